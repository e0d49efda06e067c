"""Lower bound on the diagonal-direction speed, ``0.3313 / sqrt(d)``.

The constant is the published value truncated to four digits, which can only
weaken the lower bound.
"""

import math
from dataclasses import dataclass

from .perimeter import check_dimension
from .rounding import round_down

DIAG_CONSTANT = 0.3313


@dataclass(frozen=True)
class DiagBound:
    d: int
    constant: float = DIAG_CONSTANT

    @property
    def value(self) -> float:
        return self.constant / math.sqrt(self.d)

    @property
    def display(self) -> float:
        return round_down(self.value)


def diag_lower_bound(d: int) -> float:
    d = check_dimension(d)
    return DiagBound(d).value
