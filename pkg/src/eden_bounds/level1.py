"""Level-1 bound table: expected time for an i-site cluster in plane 0 to reach plane 1.

Backward sweep of ``T_i <= (1 + s_i T_{i+1}) / (s_i + i)`` seeded with
``T_{i_max} <= 1 / i_max``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .perimeter import check_dimension, perimeter_array

DEFAULT_I_MAX = 10**6
PLATEAU_TOL = 1e-10


@njit(cache=True)
def _sweep_level1(s, i_max):
    values = np.zeros(i_max + 1)
    values[i_max] = 1.0 / i_max
    for i in range(i_max - 1, 0, -1):
        values[i] = (1.0 + s[i] * values[i + 1]) / (s[i] + i)
    return values


@dataclass(frozen=True)
class BoundTable1D:
    """Upper bounds ``values[i] >= T_i`` for ``1 <= i <= i_max``.

    ``values[0]`` is a placeholder (0.0); no state with an empty plane-0
    cluster exists at this level.
    """

    d: int
    i_max: int
    values: np.ndarray

    @property
    def n(self) -> int:
        return 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.i_max,)

    def __getitem__(self, i: int) -> float:
        if not 1 <= i <= self.i_max:
            raise IndexError(f"cluster size {i} outside 1..{self.i_max}")
        return float(self.values[i])

    @property
    def start_value(self) -> float:
        return float(self.values[1])


def compute_level1_table(d: int, i_max: int = DEFAULT_I_MAX) -> BoundTable1D:
    d = check_dimension(d)
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    s = perimeter_array(d, i_max)
    values = _sweep_level1(s, int(i_max))
    values.setflags(write=False)
    return BoundTable1D(d=d, i_max=int(i_max), values=values)


def level1_mu_bound(d: int, i_max: int = DEFAULT_I_MAX) -> float:
    """Certified upper bound on the axis speed from the one-plane problem."""
    return compute_level1_table(d, i_max).start_value


def converged_level1_table(d: int, i_max: int = DEFAULT_I_MAX,
                           tol: float = PLATEAU_TOL,
                           max_doublings: int = 8) -> BoundTable1D:
    """Double the capacity until ``values[1]`` moves by less than ``tol``.

    Returns the larger of the last two tables; each one is a valid bound,
    and the larger capacity is never worse.
    """
    table = compute_level1_table(d, i_max)
    for _ in range(max_doublings):
        bigger = compute_level1_table(d, 2 * table.i_max)
        moved = abs(table.start_value - bigger.start_value)
        table = bigger
        if moved < tol:
            return table
    raise RuntimeError(
        f"level-1 bound for d={d} did not settle within tol={tol} "
        f"up to capacity {table.i_max}")


def plateau_capacity(d: int, tol: float = 1e-9, start: int = 1,
                     limit: int = 2**24) -> int:
    """Smallest power-of-two capacity beyond which one more doubling moves
    ``values[1]`` by less than ``tol``."""
    cap = start
    prev = level1_mu_bound(d, cap)
    while cap < limit:
        nxt = level1_mu_bound(d, 2 * cap)
        if abs(prev - nxt) < tol:
            return cap
        cap, prev = 2 * cap, nxt
    raise RuntimeError(f"no plateau below capacity {limit} for d={d}")
