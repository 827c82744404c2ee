"""Dynamic set cover pipeline for axis-aligned squares.

Small optimum: the reweighting engine runs over two structure-backed
oracles, a shallow-cells structure rebuilt per light-point query and a
cone-depth index over the doubling log for multiplicity-weighted sampling.

Large optimum: a box-decomposition tree whose leaves carry the few maximal
"long" squares and a canonical-rectangle cache of precomputed covers; a
solution is the union of per-leaf residual-rectangle queries.

The dispatcher tries guesses up to n^(1/3) on the small path and falls back
to the decomposition tree beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mwu, nets
from .range_index import RangeTree2D, RangeTree4D
from .static import binomial_by_doublings, greedy_cover_arrays


class StaleLevelError(RuntimeError):
    pass


# -- shallow cells of a weighted square sample --------------------------------

@dataclass
class LevelStructure:
    """Faces of the sample arrangement with depth at most b.

    Axes hold the sorted distinct edge coordinates; slab index 2i+1 is the
    line x = xs[i], slab 2i the open gap below it (slab 0 and the last slab
    are the unbounded outer gaps).  ``cells`` stores per-cell
    (x_slab, y_slab_lo, y_slab_hi, depth) arrays of the maximal vertical
    runs of uniform depth <= b; depth_grid keeps the full slab grid for
    point location.
    """

    b: int
    xs: np.ndarray
    ys: np.ndarray
    depth_grid: np.ndarray
    cells: tuple
    source_version: int
    total_weight: int

    @property
    def cell_count(self):
        return len(self.cells[0])

    def locate_depths(self, px, py):
        """Depth of each query point in the sampled multiset (vectorized)."""
        sx = _slab_index(self.xs, np.asarray(px, np.int64))
        sy = _slab_index(self.ys, np.asarray(py, np.int64))
        return self.depth_grid[sx, sy]

    def cell_representatives(self):
        """One interior point per cell in doubled coordinates."""
        cx = _slab_representative(self.xs, self.cells[0])
        cy = _slab_representative(self.ys, self.cells[1])
        return np.stack([cx, cy], axis=1)


def _slab_index(axis, vals):
    idx = np.searchsorted(axis, vals)
    on_edge = np.zeros(len(vals), dtype=bool)
    inside = idx < len(axis)
    on_edge[inside] = axis[idx[inside]] == vals[inside]
    return 2 * idx + on_edge


def _slab_representative(axis, slabs):
    """Doubled coordinate of a point interior to each slab."""
    out = np.empty(len(slabs), dtype=np.int64)
    odd = slabs % 2 == 1
    out[odd] = 2 * axis[(slabs[odd] - 1) // 2]
    ev = ~odd
    left = slabs[ev] // 2 - 1
    lo = np.where(left >= 0, axis[np.maximum(left, 0)], axis[0] - 2)
    right = slabs[ev] // 2
    hi = np.where(right < len(axis), axis[np.minimum(right, len(axis) - 1)], axis[-1] + 2)
    out[ev] = lo + hi  # doubled midpoint of the open gap
    return out


def build_level(rows, weights, b, source_version=0):
    """Shallow cells of the weighted sample given as (m, 3) center/half rows."""
    rows = np.asarray(rows, np.int64).reshape(-1, 3)
    weights = np.asarray(weights, np.int64)
    if len(rows) == 0:
        grid = np.zeros((1, 1), dtype=np.int64)
        cells = (np.zeros(1, np.int64),) * 2 + (np.zeros(1, np.int64), np.zeros(1, np.int64))
        return LevelStructure(b, np.zeros(0, np.int64), np.zeros(0, np.int64),
                              grid, cells, source_version, 0)
    x1 = rows[:, 0] - rows[:, 2]
    x2 = rows[:, 0] + rows[:, 2]
    y1 = rows[:, 1] - rows[:, 2]
    y2 = rows[:, 1] + rows[:, 2]
    xs = np.unique(np.concatenate([x1, x2]))
    ys = np.unique(np.concatenate([y1, y2]))
    nx, ny = 2 * len(xs) + 1, 2 * len(ys) + 1
    grid = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    a1 = 2 * np.searchsorted(xs, x1) + 1
    a2 = 2 * np.searchsorted(xs, x2) + 1
    b1 = 2 * np.searchsorted(ys, y1) + 1
    b2 = 2 * np.searchsorted(ys, y2) + 1
    np.add.at(grid, (a1, b1), weights)
    np.add.at(grid, (a2 + 1, b1), -weights)
    np.add.at(grid, (a1, b2 + 1), -weights)
    np.add.at(grid, (a2 + 1, b2 + 1), weights)
    np.cumsum(grid, axis=0, out=grid)
    np.cumsum(grid, axis=1, out=grid)
    grid = grid[:-1, :-1]
    flat = grid.reshape(-1)
    change = np.empty(len(flat), dtype=bool)
    change[0] = True
    np.not_equal(flat[1:], flat[:-1], out=change[1:])
    change[::ny] = True
    starts = np.flatnonzero(change)
    ends = np.append(starts[1:], len(flat))
    depths = flat[starts]
    keep = depths <= b
    cells = (starts[keep] // ny, starts[keep] % ny,
             (ends[keep] - 1) % ny, depths[keep])
    return LevelStructure(b, xs, ys, grid, cells, source_version,
                          int(weights.sum()))


def find_light_point(level: LevelStructure, x_tree: RangeTree2D,
                     expected_version=None):
    """A point of the tree with sample depth <= level.b, or None.

    Ties break toward smaller depth then smaller id.  Raises
    StaleLevelError when the level no longer matches the caller's sample
    version.
    """
    if expected_version is not None and level.source_version != expected_version:
        raise StaleLevelError(
            f"level built for version {level.source_version}, sample at {expected_version}")
    ids, xs, ys = x_tree.snapshot()
    if len(ids) == 0:
        return None
    depths = level.locate_depths(xs, ys)
    j = int(np.lexsort((ids, depths))[0])
    if depths[j] > level.b:
        return None
    return int(ids[j]), int(depths[j])


# -- cone depths of the doubling log ------------------------------------------

class ConeDepthIndex:
    """Doubling-point log with per-square containment counts.

    The count of a square equals the number of logged points it contains;
    its implicit multiplicity in the engine's multiset is 2**count.
    Counts are kept aligned to the 4D structure's snapshot.
    """

    def __init__(self, s4: RangeTree4D):
        self.s4 = s4
        self.reset()

    def reset(self):
        self.log = []
        self._ids = self.s4.snapshot()[0]
        self._counts = np.zeros(len(self._ids), dtype=np.int64)
        self.version = 0

    @property
    def counts(self):
        return self._counts

    @property
    def ids(self):
        return self._ids

    def rows_of(self, id_array):
        return np.searchsorted(self._ids, id_array)

    def depth_of(self, sid):
        row = int(np.searchsorted(self._ids, sid))
        return int(self._counts[row])

    def append(self, p):
        """Log p; returns (rows of containing squares, their pre-doubling
        multiplicity exponents)."""
        hit = self.s4.stab_ids(int(p[0]), int(p[1]))
        rows = self.rows_of(hit)
        before = self._counts[rows].copy()
        self._counts[rows] += 1
        self.log.append((int(p[0]), int(p[1])))
        self.version += 1
        return rows, before


def weighted_sample_containing(p, index: ConeDepthIndex, s4: RangeTree4D,
                               rho, rng):
    """Bernoulli(rho) per implicit copy of each square containing p.

    p must have just been appended to the index's log; the pre-doubling
    exponents returned by append drive both the sample and the exact
    aggregate (the multiset-size increase).
    """
    rows, before = index.append(p)
    agg = sum(1 << int(d) for d in before)
    new = binomial_by_doublings(rng, before, rho)
    return rows, new, agg


# -- engine oracles over the dynamic structures --------------------------------

class SquaresOracles:
    """Structure-backed oracle set for the reweighting engine."""

    def __init__(self, x_tree: RangeTree2D, s4: RangeTree4D, objects_by_id,
                 net_strategy="greedy"):
        self.x_tree = x_tree
        self.s4 = s4
        self.objects_by_id = objects_by_id
        self.net_strategy = net_strategy

    def reset_run(self, rng):
        self.rng = rng
        self.cone = ConeDepthIndex(self.s4)
        ids = self.cone.ids
        self.obj_rows = np.empty((len(ids), 3), dtype=np.int64)
        for i, oid in enumerate(ids):
            self.obj_rows[i] = self.objects_by_id[int(oid)]
        self.r_counts = np.zeros(len(ids), dtype=np.int64)
        self.r_version = 0

    def initial_multiset_size(self):
        return len(self.cone.ids)

    def begin_round(self, rho):
        self.r_counts = binomial_by_doublings(self.rng, self.cone.counts, rho)
        self.r_version += 1
        return int(self.r_counts.sum())

    def _current_level(self, bound):
        live = np.flatnonzero(self.r_counts)
        return build_level(self.obj_rows[live], self.r_counts[live], bound,
                           source_version=self.r_version)

    def find_light(self, bound):
        level = self._current_level(bound)
        return find_light_point(level, self.x_tree, expected_version=self.r_version)

    def universe_depth(self, pid):
        x, y = self.x_tree.coords(pid)
        return self.s4.stab_count(x, y)

    def double_at(self, pid, rho):
        p = self.x_tree.coords(pid)
        rows, new, agg = weighted_sample_containing(p, self.cone, self.s4,
                                                    rho, self.rng)
        self.r_counts[rows] += new
        self.r_version += 1
        return agg

    def build_net(self, eps, rng):
        live = np.flatnonzero(self.r_counts)
        sample = {int(self.cone.ids[i]): int(self.r_counts[i]) for i in live}
        if not sample:
            return None
        try:
            return nets.build_net("squares2d", self.objects_by_id, sample, eps,
                                  rng, strategy=self.net_strategy)
        except nets.NetConstructionError:
            return None

    def uncovered_by(self, net_ids):
        ids, xs, ys = self.x_tree.snapshot()
        if len(ids) == 0:
            return None
        covered = np.zeros(len(ids), dtype=bool)
        for oid in net_ids:
            cx, cy, h = self.objects_by_id[oid]
            covered |= (np.abs(xs - cx) <= h) & (np.abs(ys - cy) <= h)
        if covered.all():
            return None
        return int(ids[int(np.argmax(~covered))])


def small_opt_solve(x_tree, s4, objects_by_id, t, n, seed=0,
                    net_strategy="greedy"):
    """One engine run at guess t over the square structures."""
    oracles = SquaresOracles(x_tree, s4, objects_by_id, net_strategy)
    cfg = mwu.MwuConfig(t=t, n=n, rng_seed=seed, net_strategy=net_strategy)
    return mwu.run_mwu(oracles, cfg)


# -- maximal long squares -------------------------------------------------------

def _min_interval_cover(intervals):
    """Minimal subset of closed integer intervals covering their own union.

    intervals: (k, 3) array columns (lo, hi, id); returns indices of chosen.
    """
    if len(intervals) == 0:
        return []
    order = np.lexsort((intervals[:, 1] * -1, intervals[:, 0]))
    iv = intervals[order]
    chosen = []
    i = 0
    k = len(iv)
    while i < k:
        lo = iv[i, 0]
        cover_end = None
        best = None
        j = i
        while j < k and iv[j, 0] <= (lo if cover_end is None else cover_end + 1):
            if best is None or iv[j, 1] > iv[best, 1]:
                best = j
            j += 1
        if best is None:
            break
        chosen.append(int(order[best]))
        cover_end = iv[best, 1]
        # skip intervals fully inside the covered prefix
        while i < k and iv[i, 0] <= cover_end + 1 and iv[i, 1] <= cover_end:
            i += 1
        if i < k and iv[i, 0] > cover_end + 1:
            continue  # gap: restart at the next component
        if i == best:
            i += 1
    return chosen


def maximal_long_squares(rect, s4: RangeTree4D, candidate_ids=None):
    """Long squares for the closed rect whose union within it equals the
    union of all long squares there.

    A long square for a rectangle is one intersecting it with no vertex
    inside; every such square spans the rect's full width or height (or
    contains it), so a minimal interval cover per orientation suffices.
    """
    rx1, ry1, rx2, ry2 = (int(v) for v in rect)
    if candidate_ids is None:
        candidate_ids = s4.overlap_ids(rx1, rx2, ry1, ry2)
    ids = np.asarray(candidate_ids, dtype=np.int64)
    if len(ids) == 0:
        return []
    rows = np.empty((len(ids), 4), dtype=np.int64)
    for i, sid in enumerate(ids):
        x1, x2, y1, y2 = s4.coords(int(sid))
        rows[i] = (x1, x2, y1, y2)
    x1, x2, y1, y2 = rows.T
    inter = (x1 <= rx2) & (x2 >= rx1) & (y1 <= ry2) & (y2 >= ry1)
    vx = ((x1 >= rx1) & (x1 <= rx2)) | ((x2 >= rx1) & (x2 <= rx2))
    vy = ((y1 >= ry1) & (y1 <= ry2)) | ((y2 >= ry1) & (y2 <= ry2))
    vertex_in = vx & vy
    long_mask = inter & ~vertex_in
    if not long_mask.any():
        return []
    li = np.flatnonzero(long_mask)
    contains = (x1[li] <= rx1) & (x2[li] >= rx2) & (y1[li] <= ry1) & (y2[li] >= ry2)
    if contains.any():
        return [int(ids[li[int(np.argmax(contains))]])]
    out = []
    horiz = (x1[li] <= rx1) & (x2[li] >= rx2)
    if horiz.any():
        hi = li[horiz]
        iv = np.stack([np.maximum(y1[hi], ry1), np.minimum(y2[hi], ry2), hi], axis=1)
        out.extend(int(ids[hi[c]]) for c in range(len(hi))
                   if c in set(_min_interval_cover(iv)))
    vert = (y1[li] <= ry1) & (y2[li] >= ry2) & ~horiz
    if vert.any():
        vi = li[vert]
        iv = np.stack([np.maximum(x1[vi], rx1), np.minimum(x2[vi], rx2), vi], axis=1)
        out.extend(int(ids[vi[c]]) for c in range(len(vi))
                   if c in set(_min_interval_cover(iv)))
    return sorted(set(out))
