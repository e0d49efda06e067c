"""n-plane backward recursion for upper bounds on E[tau_n].

State ``(i_0, ..., i_{n-1})`` holds the infected-cluster size in planes
0..n-1.  For a reachable interior state

    T <= (1 + sum_m w_m T(state + e_m)) / (sum_m w_m + i_{n-1})

with ``w_0 = s_{i_0}`` and ``w_m = s_{i_m} + |i_{m-1} - i_m|_+``.  The
``i_{n-1}`` edges into plane n end the process and add nothing to the
numerator.  States with a size at capacity are bounded by the
``(n-1)``-plane table after dropping plane 0; the corner
``(i_max, 0, ..., 0)`` is bounded by the fastest of ``i_max`` disjoint
straight paths.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numba
import numpy as np

from . import _kernels
from .config import BoxConfig
from .gamma_min import gamma_min_expectation
from .level1 import BoundTable1D, compute_level1_table
from .perimeter import (check_dimension, forward_edge_lower_bound,
                        perimeter_array, perimeter_lower_bound)
from .tables import BoundTableND, monotone_envelope, reachable_mask

log = logging.getLogger(__name__)

MAX_LEVEL = 5
DEFAULT_MEMORY_BUDGET = 8 * 2**30


class MemoryBudgetError(MemoryError):
    """A requested table would not fit in the configured memory budget."""


class CoverageError(ValueError):
    """A lower-level table does not cover the indices a face reads."""


def is_reachable(sizes: Sequence[int]) -> bool:
    if sizes[0] < 1:
        return False
    return all(not (sizes[m - 1] == 0 and sizes[m] > 0) for m in range(1, len(sizes)))


def plane_weights(d: int, sizes: Sequence[int]) -> list[int]:
    """Edge-count lower bounds per plane for a state."""
    w = [perimeter_lower_bound(d, sizes[0])]
    for m in range(1, len(sizes)):
        w.append(perimeter_lower_bound(d, sizes[m])
                 + forward_edge_lower_bound(sizes[m - 1], sizes[m]))
    return w


def recursion_step(d: int, state: Sequence[int], successors: Mapping[int, float]) -> float:
    """One application of the generalized recursion at ``state``.

    ``successors[m]`` is the table value at ``state`` with ``state[m] + 1``.
    """
    d = check_dimension(d)
    w = plane_weights(d, state)
    num = 1.0
    for m, wm in enumerate(w):
        num += wm * successors[m]
    den = sum(w) + state[-1]
    if den == 0:
        raise ValueError(f"state {tuple(state)} has no outgoing edges")
    return num / den


@dataclass
class BoundaryOracle:
    """Bounds for states with at least one index at capacity."""

    d: int
    n: int
    shape: tuple[int, ...]
    lower: BoundTable1D | BoundTableND
    corner: float

    def __call__(self, state: Sequence[int]) -> float:
        state = tuple(int(x) for x in state)
        if len(state) != self.n:
            raise ValueError(f"expected {self.n} indices, got {state}")
        if not any(x == c for x, c in zip(state, self.shape)):
            raise ValueError(f"{state} is not on a face of box {self.shape}")
        if state[0] == self.shape[0] and not any(state[1:]):
            return self.corner
        if not is_reachable(state):
            return 0.0
        rest = state[1:]
        if self.n == 2:
            return self.lower[rest[0]]
        return self.lower.value(rest)


def _check_lower_covers(lower, shape: Sequence[int]) -> None:
    need = tuple(shape[1:])
    have = tuple(lower.shape)
    if len(have) != len(need) or any(h < c for h, c in zip(have, need)):
        raise CoverageError(
            f"level-{len(need)} table of shape {have} does not cover faces of box {tuple(shape)}")


def assemble_boundary(d: int, n: int, shape: Sequence[int], lower_table,
                      corner: float | None = None) -> BoundaryOracle:
    d = check_dimension(d)
    shape = tuple(int(c) for c in shape)
    if len(shape) != n:
        raise ValueError(f"level {n} needs {n} capacities, got {shape}")
    _check_lower_covers(lower_table, shape)
    if corner is None:
        corner = gamma_min_expectation(shape_n=n, count_k=shape[0])
    return BoundaryOracle(d, n, shape, lower_table, corner)


def _lower_block(lower, caps: Sequence[int]) -> np.ndarray:
    """Lower-table values on ``[0..c_1] x ... x [0..c_{n-1}]``, flattened."""
    if isinstance(lower, BoundTable1D):
        block = np.array(lower.values[: caps[0] + 1], dtype=np.float64)
        block[0] = 0.0
        return block
    sl = tuple(slice(0, c + 1) for c in caps)
    return np.ascontiguousarray(lower.values[sl]).reshape(-1)


def _strides(dims: Sequence[int]) -> np.ndarray:
    return np.array([int(np.prod(dims[m + 1:], dtype=np.int64)) for m in range(len(dims))],
                    dtype=np.int64)


def _estimate_bytes(n: int, slice_size: int, kept: int) -> int:
    # two slices, lower block, metadata (kind, first, rest_w, rest_d), kept rows
    per_cell = 8 * 3 + 1 + 8 + 8 * max(n - 2, 1) + 8
    return slice_size * per_cell + kept * 8


@dataclass
class LevelResult:
    """Outcome of one level's sweep."""

    level: int
    box: tuple[int, ...]
    start_value: float
    table: BoundTableND | None
    seconds: float


def run_level(d: int, n: int, box: Sequence[int], lower, *,
              keep: Sequence[int] | None = None,
              memory_budget: int = DEFAULT_MEMORY_BUDGET,
              threads: int = 1) -> LevelResult:
    """Sweep one level-``n`` box seeded by ``lower`` (level ``n-1``).

    ``keep`` selects the block ``[0..keep_0] x ... x [0..keep_{n-1}]`` to
    retain as a table; ``None`` keeps nothing, ``box`` keeps everything.
    Threads > 1 switch to the anti-diagonal wavefront fill, which requires
    keeping the whole box.
    """
    t0 = time.perf_counter()
    box = tuple(int(c) for c in box)
    if len(box) != n or min(box) < 1:
        raise ValueError(f"level {n} box must have {n} capacities >= 1, got {box}")
    _check_lower_covers(lower, box)
    i0_max, caps = box[0], box[1:]
    dims = [c + 1 for c in caps]
    slice_size = int(np.prod(dims, dtype=np.int64))
    if keep is not None:
        keep = tuple(int(c) for c in keep)
        if len(keep) != n or any(k > b for k, b in zip(keep, box)):
            raise ValueError(f"kept block {keep} must lie inside box {box}")
        kept_cells = (keep[0] + 1) * int(np.prod([c + 1 for c in keep[1:]], dtype=np.int64))
    else:
        kept_cells = 0
    need = _estimate_bytes(n, slice_size, kept_cells)
    if threads > 1:
        need += (i0_max + 1) * slice_size * 8 * 2
    if need > memory_budget:
        raise MemoryBudgetError(
            f"level {n} box {box} needs ~{need / 2**30:.2f} GiB, budget {memory_budget / 2**30:.2f} GiB")

    s = perimeter_array(d, max(box) + 1)
    lower_flat = _lower_block(lower, caps)
    corner = gamma_min_expectation(shape_n=n, count_k=i0_max)
    kind, first, rest_w, rest_d = _kernels.cell_metadata(s, np.array(caps, dtype=np.int64))
    strides = _strides(dims)

    if threads > 1:
        if keep != box:
            raise ValueError("the parallel fill materializes the whole box; pass keep=box")
        full = _fill_parallel(s, i0_max, strides, lower_flat, corner,
                              kind, first, rest_w, rest_d, threads)
        start = float(full[1, 0])
        values = full.reshape([i0_max + 1] + dims)
    else:
        if keep is None:
            keep_rows, keep_idx = 0, np.zeros(0, dtype=np.int64)
            out = np.zeros((1, 0))
        else:
            keep_rows = keep[0]
            grids = np.ix_(*[np.arange(c + 1) for c in keep[1:]])
            keep_idx = np.ravel_multi_index(grids, dims).reshape(-1).astype(np.int64)
            out = np.zeros((keep_rows + 1, keep_idx.shape[0]))
        start = float(_kernels.sweep_stream(s, i0_max, strides, lower_flat, corner, kind,
                                            first, rest_w, rest_d, keep_rows, keep_idx, out))
        values = None if keep is None else out.reshape([keep[0] + 1] + [c + 1 for c in keep[1:]])

    table = None
    if values is not None:
        values = monotone_envelope(values)
        values.setflags(write=False)
        table = BoundTableND(d=d, n=n, shape=tuple(c - 1 for c in values.shape),
                             values=values, box=box)
    seconds = time.perf_counter() - t0
    log.debug("d=%d level %d box %s -> %.10f (%.1fs)", d, n, box, start, seconds)
    return LevelResult(n, box, start, table, seconds)


def _fill_parallel(s, i0_max, strides, lower_flat, corner, kind, first, rest_w, rest_d,
                   threads):
    size = lower_flat.shape[0]
    table = np.zeros((i0_max + 1, size))
    _kernels.fill_boundary_dense(i0_max, lower_flat, corner, kind, table)
    # flat multi-index sums for interior cells of rows 1..i0_max-1
    idx_sum = np.zeros(size, dtype=np.int64)
    rem = np.arange(size, dtype=np.int64)
    for st in strides:
        idx_sum += rem // st
        rem = rem % st
    interior = np.nonzero(kind == _kernels.INTERIOR)[0]
    rows = np.arange(i0_max - 1, 0, -1, dtype=np.int64)
    cells = (rows[:, None] * size + interior[None, :]).reshape(-1)
    sums = (rows[:, None] + idx_sum[interior][None, :]).reshape(-1)
    order = np.argsort(-sums, kind="stable")
    cells, sums = cells[order], sums[order]
    cuts = np.nonzero(np.diff(sums))[0] + 1
    starts = np.concatenate(([0], cuts, [cells.shape[0]])).astype(np.int64)
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        _kernels.fill_wavefront(s, strides, kind, first, rest_w, rest_d, cells, starts, table)
    finally:
        numba.set_num_threads(previous)
    return table


@dataclass
class ChainResult:
    d: int
    start_values: dict[int, float] = field(default_factory=dict)
    seconds: dict[int, float] = field(default_factory=dict)
    table: BoundTableND | BoundTable1D | None = None

    def tau_over_n(self, level: int) -> float:
        return self.start_values[level] / level


def _check_level(n: int, allow_deep: bool) -> None:
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if n > MAX_LEVEL and not allow_deep:
        raise ValueError(f"level {n} > {MAX_LEVEL}; pass allow_deep=True to override the cost guard")


def compute_chain(d: int, max_level: int, config: BoxConfig, *,
                  keep_top: bool = False, lower_table=None,
                  memory_budget: int = DEFAULT_MEMORY_BUDGET, threads: int = 1,
                  allow_deep: bool = False) -> ChainResult:
    """Build levels 1..max_level, each seeding the next.

    Each intermediate level keeps only the block the next level's faces
    read.  With ``lower_table`` (a saved level ``max_level - 1`` table) the
    lower levels are skipped.
    """
    d = check_dimension(d)
    _check_level(max_level, allow_deep)
    cfg = config.for_dimension(d)
    cfg.validate(max_level, first_level=max_level if lower_table is not None else 1)
    result = ChainResult(d)

    if lower_table is not None:
        if lower_table.d != d or lower_table.n != max_level - 1:
            raise ValueError(
                f"seed table is (d={lower_table.d}, n={lower_table.n}); "
                f"need (d={d}, n={max_level - 1})")
        first = max_level
        lower = lower_table
    else:
        first = 1
        lower = None

    for level in range(first, max_level + 1):
        if level == 1:
            t0 = time.perf_counter()
            (i1,) = cfg.shape(1)
            lower = compute_level1_table(d, i1)
            result.start_values[1] = lower.start_value
            result.seconds[1] = time.perf_counter() - t0
            continue
        box = cfg.shape(level)
        top = level == max_level
        if top:
            keep = box if keep_top else None
        else:
            nxt = cfg.shape(level + 1)
            keep = nxt[1:]
        res = run_level(d, level, box, lower, keep=keep, memory_budget=memory_budget,
                        threads=threads if (top and keep_top) else 1)
        result.start_values[level] = res.start_value
        result.seconds[level] = res.seconds
        lower = res.table
    result.table = lower if (keep_top or max_level == 1) else None
    return result


def compute_leveln_table(d: int, n: int, config: BoxConfig, *, threads: int = 1,
                         lower_table=None, memory_budget: int = DEFAULT_MEMORY_BUDGET,
                         allow_deep: bool = False) -> BoundTableND:
    """Materialize the whole level-``n`` table for the box in ``config``."""
    if n < 2:
        raise ValueError("compute_leveln_table needs n >= 2; use compute_level1_table")
    chain = compute_chain(d, n, config, keep_top=True, lower_table=lower_table,
                          memory_budget=memory_budget, threads=threads,
                          allow_deep=allow_deep)
    return chain.table


def tau_upper_bound(d: int, n: int, config: BoxConfig, **kwargs) -> float:
    """Upper bound on ``E[tau_n] / n``, hence on the axis speed."""
    chain = compute_chain(d, n, config, **kwargs)
    return chain.tau_over_n(n)


def bound_chain(d: int, max_level: int, config: BoxConfig, **kwargs) -> dict[int, float]:
    """``{level: E[tau_level] / level}`` for levels 1..max_level in one pass."""
    chain = compute_chain(d, max_level, config, **kwargs)
    return {lv: chain.tau_over_n(lv) for lv in sorted(chain.start_values)}


def reference_fill(d: int, n: int, shape: Sequence[int], lower_table,
                   corner: float | None = None) -> np.ndarray:
    """Pure-Python fill in decreasing index-sum order (slow; small boxes only).

    Returns the raw table before the monotone envelope.  Asserts that every
    unreachable successor is read with weight 0.
    """
    oracle = assemble_boundary(d, n, shape, lower_table, corner)
    shape = tuple(shape)
    values = np.zeros([c + 1 for c in shape])
    cells = [st for st in np.ndindex(*values.shape) if st[0] >= 1]
    cells.sort(key=lambda st: -sum(st))
    for st in cells:
        if any(x == c for x, c in zip(st, shape)):
            values[st] = oracle(st)
        elif not is_reachable(st):
            values[st] = 0.0
        else:
            w = plane_weights(d, st)
            succ = {}
            for m in range(n):
                nb = list(st)
                nb[m] += 1
                if not is_reachable(nb):
                    assert w[m] == 0, (st, m, w)
                succ[m] = values[tuple(nb)]
            values[st] = recursion_step(d, st, succ)
    return values


__all__ = [
    "BoundaryOracle", "ChainResult", "CoverageError", "LevelResult", "MemoryBudgetError",
    "assemble_boundary", "bound_chain", "compute_chain", "compute_leveln_table",
    "is_reachable", "plane_weights", "recursion_step", "reference_fill", "run_level",
    "tau_upper_bound", "reachable_mask",
]
