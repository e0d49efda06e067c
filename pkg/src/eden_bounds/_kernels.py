"""Compiled sweeps for the n-plane bound tables.

A level-n table is indexed by ``(i_0, i_1, ..., i_{n-1})``.  The kernels work
on "slices": for fixed ``i_0`` the remaining axes are flattened row-major,
so every successor along axes 1.. sits at a larger flat offset and a reverse
flat walk visits successors first.  The successor along axis 0 lives in the
slice for ``i_0 + 1``.

Cell kinds inside a slice (``i_0 >= 1``):
    0  interior, filled by the recursion
    1  face: some later axis is at capacity; copied from the lower table
    2  unreachable: an empty plane followed by a non-empty one; stored as 0

Every interior update evaluates, in this order,
    num = 1 + w_0 a_0 + w_1 a_1 + w_2 a_2 + ...
    den = w_0 + w_1 + (w_2 + ... + w_{k} + i_last)
so sequential and wavefront fills give bit-identical tables.
"""

import numba
import numpy as np
from numba import njit, prange

# Probing an outdated TBB only produces a warning; skip it.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

INTERIOR = 0
FACE = 1
UNREACHABLE = 2


@njit(cache=True)
def cell_metadata(s, caps):
    """Per-cell kind, first-axis size and the ``i_0``-independent weights.

    ``caps`` are the capacities of axes 1..n-1.  ``rest_w[f, m-1]`` is the
    weight of axis ``m+1`` (m >= 1) and ``rest_d[f]`` the sum of those
    weights plus the last plane's size.
    """
    k = caps.shape[0]
    size = 1
    for c in caps:
        size *= c + 1
    kind = np.zeros(size, np.int8)
    first = np.zeros(size, np.int64)
    rest_w = np.zeros((size, max(k - 1, 1)))
    rest_d = np.zeros(size)
    idx = np.zeros(k, np.int64)
    for f in range(size):
        r = f
        for m in range(k - 1, -1, -1):
            idx[m] = r % (caps[m] + 1)
            r //= caps[m] + 1
        reachable = True
        for m in range(1, k):
            if idx[m - 1] == 0 and idx[m] > 0:
                reachable = False
        saturated = False
        for m in range(k):
            if idx[m] == caps[m]:
                saturated = True
        if not reachable:
            kind[f] = UNREACHABLE
        elif saturated:
            kind[f] = FACE
        first[f] = idx[0]
        acc = 0.0
        for m in range(1, k):
            w = s[idx[m]] + max(idx[m - 1] - idx[m], 0)
            rest_w[f, m - 1] = w
            acc += w
        rest_d[f] = acc + idx[k - 1]
    return kind, first, rest_w, rest_d


@njit(cache=True)
def _interior_value(s, i0, f, strides, nxt_val, cur, first, rest_w, rest_d):
    k = strides.shape[0]
    w0 = s[i0]
    a = first[f]
    w1 = s[a] + max(i0 - a, 0)
    num = 1.0 + w0 * nxt_val + w1 * cur[f + strides[0]]
    for m in range(1, k):
        num += rest_w[f, m - 1] * cur[f + strides[m]]
    den = w0 + w1 + rest_d[f]
    return num / den


@njit(cache=True)
def sweep_stream(s, i0_max, strides, lower, corner, kind, first, rest_w,
                 rest_d, keep_rows, keep_idx, out):
    """Backward sweep over ``i_0`` keeping two slices in memory.

    Slices with ``i_0 <= keep_rows`` are gathered through ``keep_idx`` into
    ``out[i_0]``.  Returns the value at ``(1, 0, ..., 0)``.
    """
    size = lower.shape[0]
    nxt = lower.copy()
    nxt[0] = corner
    cur = np.empty(size)
    if i0_max <= keep_rows:
        for q in range(keep_idx.shape[0]):
            out[i0_max, q] = nxt[keep_idx[q]]
    for i0 in range(i0_max - 1, 0, -1):
        for f in range(size - 1, -1, -1):
            kf = kind[f]
            if kf == UNREACHABLE:
                cur[f] = 0.0
            elif kf == FACE:
                cur[f] = lower[f]
            else:
                cur[f] = _interior_value(s, i0, f, strides, nxt[f], cur,
                                         first, rest_w, rest_d)
        if i0 <= keep_rows:
            for q in range(keep_idx.shape[0]):
                out[i0, q] = cur[keep_idx[q]]
        nxt, cur = cur, nxt
    return nxt[0]


@njit(cache=True)
def fill_boundary_dense(i0_max, lower, corner, kind, table):
    """Write faces, unreachable cells and the ``i_0 = i0_max`` slice."""
    size = lower.shape[0]
    for q in range(size):
        table[i0_max, q] = lower[q]
    table[i0_max, 0] = corner
    for i0 in range(1, i0_max):
        for f in range(size):
            if kind[f] == FACE:
                table[i0, f] = lower[f]
            elif kind[f] == UNREACHABLE:
                table[i0, f] = 0.0


@njit(parallel=True, cache=True)
def fill_wavefront(s, strides, kind, first, rest_w, rest_d, order, starts, table):
    """Fill interior cells one anti-diagonal (constant index sum) at a time.

    ``order`` lists interior cells as flat ``i_0 * size + f`` indices sorted
    by decreasing index sum; ``starts`` delimits the diagonals.  Cells on one
    diagonal only read cells on later (larger-sum) diagonals.
    """
    size = table.shape[1]
    for g in range(starts.shape[0] - 1):
        lo = starts[g]
        hi = starts[g + 1]
        for p in prange(lo, hi):
            cell = order[p]
            i0 = cell // size
            f = cell - i0 * size
            table[i0, f] = _interior_value(s, i0, f, strides, table[i0 + 1, f],
                                           table[i0], first, rest_w, rest_d)
