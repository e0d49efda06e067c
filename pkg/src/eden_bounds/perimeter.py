"""Integer bounds on the number of perimeter and forward edges of a cluster.

A cluster of ``i`` sites inside one hyperplane of Z^d has at least
``s_i = ceil(2 (d-1) i^((d-2)/(d-1)))`` edges leaving it within that
hyperplane.  Every bound table downstream is only as rigorous as this
ceiling, so near-integer cases are settled with exact integer arithmetic.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

# Relative distance to the nearest integer below which a float ceiling is
# re-checked exactly.  Float error on these values is ~1e-15 relative.
_NEAR_INTEGER_RTOL = 1e-9


def check_dimension(d: int) -> int:
    if isinstance(d, bool) or int(d) != d:
        raise TypeError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return d


def _exact_ceiling(d: int, i: int, guess: int) -> int:
    """Smallest integer c with c^(d-1) >= (2(d-1))^(d-1) * i^(d-2)."""
    q = d - 1
    target = (2 * q) ** q * i ** (d - 2)
    c = max(guess - 2, 0)
    while c**q < target:
        c += 1
    return c


def perimeter_lower_bound(d: int, i: int) -> int:
    """Return ``s_i``, the lower bound on perimeter edges of an ``i``-site cluster.

    ``s_0`` is 0: the empty cluster has no perimeter.
    """
    d = check_dimension(d)
    if i < 0:
        raise ValueError(f"cluster size must be >= 0, got {i}")
    if i == 0:
        return 0
    x = 2 * (d - 1) * i ** ((d - 2) / (d - 1))
    c = math.ceil(x)
    if abs(x - round(x)) <= _NEAR_INTEGER_RTOL * x:
        c = _exact_ceiling(d, i, round(x))
    return c


@lru_cache(maxsize=16)
def _perimeter_array_cached(d: int, i_max: int) -> np.ndarray:
    if d == 2:
        # exponent 0: every non-empty cluster on a line has exactly 2 exits
        s = np.full(i_max + 1, 2.0)
        s[0] = 0.0
        s.setflags(write=False)
        return s
    i = np.arange(i_max + 1, dtype=np.float64)
    x = 2.0 * (d - 1) * i ** ((d - 2) / (d - 1))
    s = np.ceil(x)
    suspicious = np.nonzero(np.abs(x - np.rint(x)) <= _NEAR_INTEGER_RTOL * x)[0]
    for k in suspicious:
        if k > 0:
            s[k] = _exact_ceiling(d, int(k), int(round(x[k])))
    s[0] = 0.0
    s.setflags(write=False)
    return s


def perimeter_array(d: int, i_max: int) -> np.ndarray:
    """``s_0 .. s_{i_max}`` as a read-only float64 array (values are exact integers)."""
    d = check_dimension(d)
    if i_max < 0:
        raise ValueError(f"i_max must be >= 0, got {i_max}")
    return _perimeter_array_cached(d, int(i_max))


def forward_edge_lower_bound(i_prev: int, i: int) -> int:
    """Lower bound ``|i_prev - i|_+`` on edges from the previous plane's cluster
    to healthy sites of the current plane."""
    if i_prev < 0 or i < 0:
        raise ValueError("cluster sizes must be >= 0")
    return max(i_prev - i, 0)
