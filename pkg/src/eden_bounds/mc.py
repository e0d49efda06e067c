"""Event-driven simulation of the unidirectional infection.

Every active edge (infected site -> healthy neighbour in the same plane or
the next one) carries an Exp(1) clock.  By memorylessness the next event
happens after Exp(#active edges) and uses a uniformly chosen active edge.
Edges into plane n end the run; they are counted, not stored.

Sites live in an open-addressing hash table keyed by their integer
coordinates, so no lattice box is allocated and d can be large.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .perimeter import check_dimension

DEFAULT_STEP_CAP = 10**7
BLOCK_SIZE = 1000

# _simulate status codes
_OK = 0
_STEP_CAP = 1
_EDGE_MISMATCH = 2


class StepCapExceeded(RuntimeError):
    """A simulation ran past its event budget without reaching plane n."""


class EdgeSetMismatch(AssertionError):
    """The incremental active-edge structure disagreed with a full recount."""


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int

    def upper(self, k: float = 3.0) -> float:
        return self.mean + k * self.std_error

    def lower(self, k: float = 3.0) -> float:
        return self.mean - k * self.std_error


@njit(cache=True)
def _hash(coords, d, mask):
    h = np.uint64(1469598103934665603)
    for k in range(d):
        h ^= np.uint64(coords[k] + 1000003)
        h *= np.uint64(1099511628211)
    # multiplication only carries upward; fold the high bits into the mask
    h ^= h >> np.uint64(33)
    h *= np.uint64(0xFF51AFD7ED558CCD)
    h ^= h >> np.uint64(33)
    return np.int64(h & np.uint64(mask))


@njit(cache=True)
def _lookup(site_xy, table, mask, d, coords):
    """Slot index holding ``coords`` or the empty slot where it would go."""
    slot = _hash(coords, d, mask)
    while True:
        sid = table[slot]
        if sid < 0:
            return slot
        same = True
        for k in range(d):
            if site_xy[sid, k] != coords[k]:
                same = False
                break
        if same:
            return slot
        slot = (slot + 1) & mask


@njit(cache=True)
def _new_state(d, cap, ecap, tsize):
    xy = np.zeros((cap, d), np.int32)
    infected = np.zeros(cap, np.bool_)
    slot_of = np.zeros(cap, np.int64)
    head = -np.ones(cap, np.int64)
    table = -np.ones(tsize, np.int64)
    etarget = np.zeros(ecap, np.int64)
    enext = np.zeros(ecap, np.int64)
    eprev = np.zeros(ecap, np.int64)
    return xy, infected, slot_of, head, table, etarget, enext, eprev


@njit(cache=True)
def _grow_sites(xy, infected, slot_of, head, nsites):
    cap = 2 * xy.shape[0]
    new_xy = np.zeros((cap, xy.shape[1]), np.int32)
    new_xy[:nsites] = xy[:nsites]
    new_inf = np.zeros(cap, np.bool_)
    new_inf[:nsites] = infected[:nsites]
    new_slot = np.zeros(cap, np.int64)
    new_slot[:nsites] = slot_of[:nsites]
    new_head = -np.ones(cap, np.int64)
    new_head[:nsites] = head[:nsites]
    return new_xy, new_inf, new_slot, new_head


@njit(cache=True)
def _grow_edges(etarget, enext, eprev, n_edges):
    ecap = 2 * etarget.shape[0]
    t2 = np.zeros(ecap, np.int64)
    n2 = np.zeros(ecap, np.int64)
    p2 = np.zeros(ecap, np.int64)
    t2[:n_edges] = etarget[:n_edges]
    n2[:n_edges] = enext[:n_edges]
    p2[:n_edges] = eprev[:n_edges]
    return t2, n2, p2


@njit(cache=True)
def _rehash(xy, slot_of, nsites, tsize):
    table = -np.ones(tsize, np.int64)
    mask = tsize - 1
    d = xy.shape[1]
    for sid in range(nsites):
        slot = _lookup(xy, table, mask, d, xy[sid])
        table[slot] = sid
        slot_of[sid] = slot
    return table


@njit(cache=True)
def _recount_ok(d, n, nsites, xy, infected, head, etarget, enext, eprev,
                n_edges, n_term):
    """Rebuild the active-edge multiset from scratch and compare."""
    expect = np.zeros(nsites, np.int64)
    term = 0
    index = {}
    for sid in range(nsites):
        key = 0
        for k in range(d):
            key = key * 1000003 + xy[sid, k]
        index[key] = sid
    nb = np.empty(d, np.int64)
    for sid in range(nsites):
        if not infected[sid]:
            continue
        if xy[sid, 0] == n - 1:
            term += 1
        for move in range(2 * d - 1):
            for k in range(d):
                nb[k] = xy[sid, k]
            if move == 2 * d - 2:
                if nb[0] == n - 1:
                    continue
                nb[0] += 1
            else:
                nb[1 + move // 2] += 1 if move % 2 == 0 else -1
            key = 0
            for k in range(d):
                key = key * 1000003 + nb[k]
            if key not in index:
                return False  # a healthy neighbour was never registered
            tid = index[key]
            if not infected[tid]:
                expect[tid] += 1
    listed = 0
    for sid in range(nsites):
        cnt = 0
        prev = -1
        e = head[sid]
        while e >= 0:
            if e >= n_edges or etarget[e] != sid or eprev[e] != prev:
                return False
            cnt += 1
            prev = e
            e = enext[e]
        if cnt != expect[sid]:
            return False
        listed += cnt
    return listed == n_edges and term == n_term


@njit(cache=True)
def _simulate(d, n, step_cap, check, state):
    """One sample of the time to reach plane ``n`` from the origin.

    ``state`` holds reusable buffers from ``_new_state`` and is returned,
    possibly grown and reset, as the last element of
    ``(time, status, events, state)``.
    """
    xy, infected, slot_of, head, table, etarget, enext, eprev = state
    mask = table.shape[0] - 1
    n_edges = 0
    n_term = 0
    coords = np.zeros(d, np.int32)
    buf = np.zeros(2 * d, np.int64)

    slot = _lookup(xy, table, mask, d, coords)
    xy[0] = coords
    table[slot] = 0
    slot_of[0] = slot
    nsites = 1
    y = 0
    t = 0.0
    events = 0
    status = _OK
    while True:
        # infect y: drop every edge pointing at it, largest position first,
        # so the edge moved into a hole never belongs to y
        cnt = 0
        e = head[y]
        while e >= 0:
            v = e
            b = cnt - 1
            while b >= 0 and buf[b] < v:
                buf[b + 1] = buf[b]
                b -= 1
            buf[b + 1] = v
            cnt += 1
            e = enext[e]
        for a in range(cnt):
            p = buf[a]
            last = n_edges - 1
            if p != last:
                tz = etarget[last]
                etarget[p] = tz
                enext[p] = enext[last]
                eprev[p] = eprev[last]
                if eprev[p] >= 0:
                    enext[eprev[p]] = p
                else:
                    head[tz] = p
                if enext[p] >= 0:
                    eprev[enext[p]] = p
            n_edges -= 1
        head[y] = -1
        infected[y] = True

        plane = xy[y, 0]
        if plane == n - 1:
            n_term += 1
        for move in range(2 * d - 1):
            for k in range(d):
                coords[k] = xy[y, k]
            if move == 2 * d - 2:
                if plane == n - 1:
                    continue
                coords[0] += 1
            else:
                coords[1 + move // 2] += 1 if move % 2 == 0 else -1
            slot = _lookup(xy, table, mask, d, coords)
            z = table[slot]
            if z < 0:
                if nsites == xy.shape[0]:
                    xy, infected, slot_of, head = _grow_sites(xy, infected, slot_of,
                                                              head, nsites)
                z = nsites
                xy[z] = coords
                table[slot] = z
                slot_of[z] = slot
                nsites += 1
                if 2 * nsites > table.shape[0]:
                    table = _rehash(xy, slot_of, nsites, 4 * table.shape[0])
                    mask = table.shape[0] - 1
            if infected[z]:
                continue
            if n_edges == etarget.shape[0]:
                etarget, enext, eprev = _grow_edges(etarget, enext, eprev, n_edges)
            etarget[n_edges] = z
            enext[n_edges] = head[z]
            eprev[n_edges] = -1
            if head[z] >= 0:
                eprev[head[z]] = n_edges
            head[z] = n_edges
            n_edges += 1

        if check and not _recount_ok(d, n, nsites, xy, infected, head, etarget,
                                     enext, eprev, n_edges, n_term):
            status = _EDGE_MISMATCH
            break
        total = n_edges + n_term
        t += np.random.exponential(1.0 / total)
        events += 1
        if events > step_cap:
            status = _STEP_CAP
            break
        r = np.random.randint(0, total)
        if r >= n_edges:
            break  # an edge into plane n fired
        y = etarget[r]

    for sid in range(nsites):
        table[slot_of[sid]] = -1
        infected[sid] = False
        head[sid] = -1
    return t, status, events, (xy, infected, slot_of, head, table, etarget, enext, eprev)


@njit(cache=True)
def _simulate_block(d, n, count, seed, step_cap, check):
    np.random.seed(seed)
    state = _new_state(d, 1024, 1024, 4096)
    out = np.empty(count)
    for r in range(count):
        t, status, _, state = _simulate(d, n, step_cap, check, state)
        if status != _OK:
            return out[:r], status
        out[r] = t
    return out, _OK


def _raise_for(status: int, d: int, n: int, step_cap: int) -> None:
    if status == _STEP_CAP:
        raise StepCapExceeded(f"simulation (d={d}, n={n}) exceeded {step_cap} events")
    if status == _EDGE_MISMATCH:
        raise EdgeSetMismatch(f"active-edge recount mismatch (d={d}, n={n})")


def _check_args(d: int, n: int) -> int:
    d = check_dimension(d)
    if n < 1:
        raise ValueError(f"level n must be >= 1, got {n}")
    return d


def simulate_unidirectional(d: int, n: int, seed: int, *, step_cap: int = DEFAULT_STEP_CAP,
                            check_edges: bool = False) -> float:
    """One sample of the time for the unidirectional infection to reach plane ``n``."""
    d = _check_args(d, n)
    times, status = _simulate_block(d, n, 1, _block_seeds(seed, 1)[0], step_cap, check_edges)
    _raise_for(status, d, n, step_cap)
    return float(times[0])


def _block_seeds(seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _run_block(args):
    d, n, count, bseed, step_cap, check = args
    times, status = _simulate_block(d, n, count, bseed, step_cap, check)
    _raise_for(status, d, n, step_cap)
    return times


def _merge(stats, block):
    """Chan et al. pairwise update of (count, mean, M2)."""
    n_a, mean_a, m2_a = stats
    n_b = block.size
    mean_b = float(block.mean())
    m2_b = float(((block - mean_b) ** 2).sum())
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return n, mean, m2


def estimate_tau(d: int, n: int, samples: int, seed: int, *, workers: int = 1,
                 step_cap: int = DEFAULT_STEP_CAP, check_edges: bool = False,
                 block_size: int = BLOCK_SIZE) -> McEstimate:
    """Mean and standard error of ``tau_n`` over independent simulations.

    Samples are drawn in fixed-size blocks with independent spawned seeds
    and merged in block order, so the result depends only on
    ``(d, n, samples, seed, block_size)``.
    """
    d = _check_args(d, n)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    jobs = [(d, n, c, s, step_cap, check_edges)
            for c, s in zip(sizes, _block_seeds(seed, len(sizes)))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(j) for j in jobs]
    stats = (0, 0.0, 0.0)
    for b in blocks:
        stats = _merge(stats, b)
    count, mean, m2 = stats
    std_error = math.sqrt(m2 / (count - 1)) / math.sqrt(count)
    return McEstimate(mean=mean, std_error=std_error, samples=count, seed=seed)
