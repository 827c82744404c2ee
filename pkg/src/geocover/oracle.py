"""Brute-force ground truth: exact OPT, depth scans, cover and net checking.

Everything here is written directly from the membership definitions in
``geom`` and deliberately shares no code with the structures it validates.
All integer evaluations stay within int64 given the coordinate bounds (see
the margin test in tests/test_geom.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_CHUNK = 1 << 22  # cap on matrix cells materialized at once


# -- vectorized membership -----------------------------------------------

def covered_by_object(kind, obj, px, py, pz=None):
    """Boolean mask over point arrays for one object, closed membership."""
    a, b, c = (int(v) for v in obj)
    if kind == "squares2d":
        return (np.abs(px - a) <= c) & (np.abs(py - b) <= c)
    if kind == "disks2d":
        dx = px - a
        dy = py - b
        return dx * dx + dy * dy <= c * c
    if kind == "halfspaces3d":
        return pz >= a * px + b * py + c
    raise ValueError(f"unknown kind {kind!r}")


def membership_matrix(kind, obj_rows, pt_rows):
    """(n_objects, n_points) boolean matrix; inputs are (m,3)/(n,2|3) arrays."""
    obj_rows = np.asarray(obj_rows, dtype=np.int64).reshape(-1, 3)
    pt_rows = np.asarray(pt_rows, dtype=np.int64)
    if pt_rows.size == 0:
        return np.zeros((len(obj_rows), 0), dtype=bool)
    pt_rows = pt_rows.reshape(len(pt_rows), -1)
    px = pt_rows[:, 0][None, :]
    py = pt_rows[:, 1][None, :]
    pz = pt_rows[:, 2][None, :] if pt_rows.shape[1] == 3 else None
    out = np.empty((len(obj_rows), pt_rows.shape[0]), dtype=bool)
    step = max(1, _CHUNK // max(1, pt_rows.shape[0]))
    for i in range(0, len(obj_rows), step):
        block = obj_rows[i:i + step]
        a = block[:, 0][:, None]
        b = block[:, 1][:, None]
        c = block[:, 2][:, None]
        if kind == "squares2d":
            out[i:i + step] = (np.abs(px - a) <= c) & (np.abs(py - b) <= c)
        elif kind == "disks2d":
            dx = px - a
            dy = py - b
            out[i:i + step] = dx * dx + dy * dy <= c * c
        elif kind == "halfspaces3d":
            out[i:i + step] = pz >= a * px + b * py + c
        else:
            raise ValueError(f"unknown kind {kind!r}")
    return out


def point_depths(kind, obj_rows, pt_rows, weights=None):
    """Depth of each point in the object collection (optionally weighted)."""
    obj_rows = np.asarray(obj_rows, dtype=np.int64).reshape(-1, 3)
    pt_rows = np.asarray(pt_rows, dtype=np.int64)
    n = len(pt_rows)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    depths = np.zeros(n, dtype=np.int64)
    pt_rows = pt_rows.reshape(n, -1)
    px, py = pt_rows[:, 0], pt_rows[:, 1]
    pz = pt_rows[:, 2] if pt_rows.shape[1] == 3 else None
    w = None if weights is None else np.asarray(weights, dtype=np.int64)
    for i, obj in enumerate(obj_rows):
        mask = covered_by_object(kind, obj, px, py, pz)
        depths[mask] += 1 if w is None else w[i]
    return depths


def verify_cover(instance, cover_ids):
    """(ok, first uncovered point id or None), exact.

    ``cover_ids`` must reference live objects of the instance.
    """
    pids = instance.point_ids()
    if not pids:
        return True, None
    pt_rows = np.array([instance.point(p) for p in pids], dtype=np.int64)
    uncovered = np.ones(len(pids), dtype=bool)
    px, py = pt_rows[:, 0], pt_rows[:, 1]
    pz = pt_rows[:, 2] if pt_rows.shape[1] == 3 else None
    for oid in cover_ids:
        obj = instance.obj(oid)
        uncovered &= ~covered_by_object(instance.kind, obj, px, py, pz)
        if not uncovered.any():
            return True, None
    idx = int(np.argmax(uncovered))
    return False, pids[idx]


# -- exact minimum set cover ----------------------------------------------

@dataclass
class ExactResult:
    opt_size: int | None
    witness: list
    explored_nodes: int
    timed_out: bool

    @property
    def feasible(self):
        return self.opt_size is not None or self.timed_out


def exact_opt(instance, node_budget=10_000_000):
    """Exact minimum cover by branch and bound.

    Intended for instances with at most a hundred or so elements.  Branches
    on an uncovered point with the fewest candidate objects, bounds with a
    greedy completion, and prunes dominated (subset) objects up front.
    Returns opt_size None when some point is uncovered by every object.
    """
    pids = instance.point_ids()
    oids = instance.object_ids()
    n = len(pids)
    if n == 0:
        return ExactResult(0, [], 0, False)
    matrix = membership_matrix(
        instance.kind,
        np.array([instance.obj(o) for o in oids], dtype=np.int64).reshape(-1, 3),
        np.array([instance.point(p) for p in pids], dtype=np.int64),
    )
    full = (1 << n) - 1
    masks = {}
    for row, oid in zip(matrix, oids):
        m = 0
        for j in np.flatnonzero(row):
            m |= 1 << int(j)
        if m and (m not in masks):
            masks[m] = oid
    union = 0
    for m in masks:
        union |= m
    if union != full:
        return ExactResult(None, [], 0, False)

    # dominance prune: drop masks strictly contained in another
    items = sorted(masks.items(), key=lambda kv: -bin(kv[0]).count("1"))
    kept = []
    for m, oid in items:
        if not any(m | km == km for km, _ in kept):
            kept.append((m, oid))
    cover_of = {m: oid for m, oid in kept}
    all_masks = [m for m, _ in kept]
    per_point = [[m for m in all_masks if (m >> j) & 1] for j in range(n)]

    def greedy(uncovered):
        chosen = []
        while uncovered:
            best = max(all_masks, key=lambda m: bin(m & uncovered).count("1"))
            if not best & uncovered:
                return None
            chosen.append(best)
            uncovered &= ~best
        return chosen

    initial = greedy(full)
    best = {"size": len(initial), "witness": list(initial)}
    explored = 0
    budget_hit = False

    def bnb(uncovered, chosen):
        nonlocal explored, budget_hit
        explored += 1
        if explored > node_budget:
            budget_hit = True
            return
        if not uncovered:
            if len(chosen) < best["size"]:
                best["size"] = len(chosen)
                best["witness"] = list(chosen)
            return
        max_gain = max(bin(m & uncovered).count("1") for m in all_masks)
        if max_gain == 0:
            return
        need = math.ceil(bin(uncovered).count("1") / max_gain)
        if len(chosen) + need >= best["size"]:
            return
        # branch on the uncovered point with the fewest candidates
        branch_j = -1
        branch_cands = None
        for j in range(n):
            if (uncovered >> j) & 1:
                cands = [m for m in per_point[j] if m & uncovered]
                if branch_cands is None or len(cands) < len(branch_cands):
                    branch_j, branch_cands = j, cands
                    if len(cands) <= 1:
                        break
        if not branch_cands:
            return  # point became uncoverable along this branch
        for m in sorted(branch_cands, key=lambda m: -bin(m & uncovered).count("1")):
            bnb(uncovered & ~m, chosen + [m])
            if budget_hit:
                return

    bnb(full, [])
    witness = sorted(cover_of[m] for m in best["witness"])
    return ExactResult(best["size"], witness, explored, budget_hit)


# -- net checking ------------------------------------------------------------

def _as_fraction(eps):
    if isinstance(eps, Fraction):
        return eps
    if isinstance(eps, tuple):
        return Fraction(eps[0], eps[1])
    return Fraction(eps).limit_denominator(10**9)


def _deep_threshold(eps, total_weight):
    # smallest integer depth with depth >= eps * total_weight
    f = _as_fraction(eps) * total_weight
    return (f.numerator + f.denominator - 1) // f.denominator


def _square_grid_axes(vals):
    """Doubled coordinates of all edge values plus midpoints of gaps."""
    edges = np.unique(np.asarray(vals, dtype=np.int64)) * 2
    if len(edges) == 0:
        return edges
    mids = (edges[:-1] + edges[1:]) // 2
    return np.unique(np.concatenate([edges, mids]))


def net_certificate_points(kind, obj_rows, extra_points=None, cap=100_000, seed=0):
    """Certificate points whose depth extremes witness net violations.

    squares2d: the full face grid of the arrangement (edge coordinates and
    gap midpoints, in doubled coordinates; complete for closed squares).
    disks2d / halfspaces3d: integer candidates (input points, snapped
    pairwise/triple intersection spots, far probes); sound but incomplete,
    capped at ``cap`` candidates drawn deterministically from ``seed``.

    Returns (points array, scale) where coordinates are scaled by ``scale``.
    """
    obj_rows = np.asarray(obj_rows, dtype=np.int64).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    if kind == "squares2d":
        cx, cy, h = obj_rows[:, 0], obj_rows[:, 1], obj_rows[:, 2]
        xs = _square_grid_axes(np.concatenate([cx - h, cx + h]))
        ys = _square_grid_axes(np.concatenate([cy - h, cy + h]))
        pts = [np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)]
        if extra_points is not None and len(extra_points):
            pts.append(np.asarray(extra_points, dtype=np.int64)[:, :2] * 2)
        return np.concatenate(pts), 2

    cands = []
    if extra_points is not None and len(extra_points):
        cands.append(np.asarray(extra_points, dtype=np.int64))
    if kind == "disks2d":
        cands.append(obj_rows[:, :2])  # centers
        m = len(obj_rows)
        pairs = min(cap // 4, m * (m - 1) // 2)
        if pairs and m >= 2:
            ii = rng.integers(0, m, size=pairs)
            jj = rng.integers(0, m, size=pairs)
            keep = ii != jj
            ii, jj = ii[keep], jj[keep]
            c1 = obj_rows[ii].astype(np.float64)
            c2 = obj_rows[jj].astype(np.float64)
            d2 = (c1[:, 0] - c2[:, 0]) ** 2 + (c1[:, 1] - c2[:, 1]) ** 2
            ok = (d2 > 0)
            c1, c2, d2 = c1[ok], c2[ok], d2[ok]
            # radical-line midpoint and offsets toward circle crossings
            t = 0.5 + (c1[:, 2] ** 2 - c2[:, 2] ** 2) / (2 * d2)
            mx = c1[:, 0] + t * (c2[:, 0] - c1[:, 0])
            my = c1[:, 1] + t * (c2[:, 1] - c1[:, 1])
            h2 = np.maximum(c1[:, 2] ** 2 - t * t * d2, 0.0)
            off = np.sqrt(h2 / np.maximum(d2, 1))
            nx = -(c2[:, 1] - c1[:, 1]) * off
            ny = (c2[:, 0] - c1[:, 0]) * off
            for sgn in (1.0, -1.0):
                px = np.floor(mx + sgn * nx)
                py = np.floor(my + sgn * ny)
                for dx in (0, 1):
                    for dy in (0, 1):
                        cands.append(np.stack([px + dx, py + dy], axis=-1).astype(np.int64))
        pts = np.unique(np.concatenate(cands), axis=0) if cands else np.zeros((0, 2), np.int64)
        bound = 1 << 13
        pts = pts[(np.abs(pts[:, 0]) <= bound) & (np.abs(pts[:, 1]) <= bound)]
        if len(pts) > cap:
            pts = pts[rng.choice(len(pts), size=cap, replace=False)]
        return pts, 1

    if kind == "halfspaces3d":
        m = len(obj_rows)
        triples = min(cap // 4, m * (m - 1) * (m - 2) // 6 if m >= 3 else 0)
        if triples:
            ii = rng.integers(0, m, size=triples)
            jj = rng.integers(0, m, size=triples)
            kk = rng.integers(0, m, size=triples)
            keep = (ii != jj) & (jj != kk) & (ii != kk)
            A = obj_rows[ii[keep]].astype(np.float64)
            B = obj_rows[jj[keep]].astype(np.float64)
            C = obj_rows[kk[keep]].astype(np.float64)
            # xy where the three boundary planes meet: solve the 2x2 system
            a1, b1, c1 = (A - B).T
            a2, b2, c2 = (A - C).T
            det = a1 * b2 - a2 * b1
            ok = np.abs(det) > 0
            x = (-c1[ok] * b2[ok] + c2[ok] * b1[ok]) / det[ok]
            y = (-a1[ok] * c2[ok] + a2[ok] * c1[ok]) / det[ok]
            fin = np.isfinite(x) & np.isfinite(y) & (np.abs(x) < 1 << 17) & (np.abs(y) < 1 << 17)
            x, y = np.floor(x[fin]), np.floor(y[fin])
            for dx in (0, 1):
                for dy in (0, 1):
                    cands.append(np.stack([x + dx, y + dy], axis=-1).astype(np.int64))
        # far probes on a big ring
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        radius = 1 << 17
        ring = np.stack([np.round(radius * np.cos(ang)), np.round(radius * np.sin(ang))], axis=-1)
        cands.append(ring.astype(np.int64))
        if extra_points is not None and len(extra_points):
            cands[0] = np.asarray(extra_points, dtype=np.int64)[:, :2]
        pts = np.unique(np.concatenate([c.reshape(-1, 2) for c in cands]), axis=0)
        if len(pts) > cap:
            pts = pts[rng.choice(len(pts), size=cap, replace=False)]
        return pts, 1
    raise ValueError(f"unknown kind {kind!r}")


def square_face_axes(obj_rows):
    """Doubled-coordinate grid axes (edges plus gap midpoints) per axis."""
    obj_rows = np.asarray(obj_rows, dtype=np.int64).reshape(-1, 3)
    cx, cy, h = obj_rows[:, 0], obj_rows[:, 1], obj_rows[:, 2]
    xs = _square_grid_axes(np.concatenate([cx - h, cx + h]))
    ys = _square_grid_axes(np.concatenate([cy - h, cy + h]))
    return xs, ys


def square_grid_accumulate(obj_rows, weights, xs2, ys2):
    """Weighted depth of every grid vertex (xs2 x ys2, doubled coords) via a
    2D difference array; O(grid + m) instead of O(grid * m)."""
    obj_rows = np.asarray(obj_rows, dtype=np.int64).reshape(-1, 3)
    nx, ny = len(xs2), len(ys2)
    grid = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    if len(obj_rows) == 0 or nx == 0 or ny == 0:
        return grid[:-1, :-1]
    x1 = 2 * (obj_rows[:, 0] - obj_rows[:, 2])
    x2 = 2 * (obj_rows[:, 0] + obj_rows[:, 2])
    y1 = 2 * (obj_rows[:, 1] - obj_rows[:, 2])
    y2 = 2 * (obj_rows[:, 1] + obj_rows[:, 2])
    i1 = np.searchsorted(xs2, x1)
    i2 = np.searchsorted(xs2, x2, side="right") - 1
    j1 = np.searchsorted(ys2, y1)
    j2 = np.searchsorted(ys2, y2, side="right") - 1
    w = np.asarray(weights, dtype=np.int64)
    ok = (i1 <= i2) & (j1 <= j2)
    i1, i2, j1, j2, w = i1[ok], i2[ok], j1[ok], j2[ok], w[ok]
    np.add.at(grid, (i1, j1), w)
    np.add.at(grid, (i2 + 1, j1), -w)
    np.add.at(grid, (i1, j2 + 1), -w)
    np.add.at(grid, (i2 + 1, j2 + 1), w)
    np.cumsum(grid, axis=0, out=grid)
    np.cumsum(grid, axis=1, out=grid)
    return grid[:-1, :-1]


def brute_net_check(kind, objects_by_id, net_ids, sample_weights, eps,
                    extra_points=None, cap=100_000, seed=0):
    """Check the net condition: every certificate point of weighted depth
    >= eps * total_weight in the sample is covered by the net.

    ``sample_weights`` maps object id -> copy count; ``net_ids`` is the
    candidate net. Returns (ok, witness point or None).
    """
    live = [(oid, w) for oid, w in sorted(sample_weights.items()) if w > 0]
    if not live:
        return True, None
    total = sum(w for _, w in live)
    thresh = max(_deep_threshold(eps, total), 1)
    obj_rows = np.array([objects_by_id[oid] for oid, _ in live], dtype=np.int64)
    # copy counts in a sample are small; the int64 grid math relies on it
    assert total < (1 << 62), "sample weights exceed the supported range"
    weights = np.array([w for _, w in live], dtype=np.int64)
    net_rows = np.array([objects_by_id[oid] for oid in net_ids], dtype=np.int64).reshape(-1, 3)

    if kind == "squares2d":
        xs2, ys2 = square_face_axes(obj_rows)
        depth_grid = square_grid_accumulate(obj_rows, weights, xs2, ys2)
        cover_grid = square_grid_accumulate(net_rows, np.ones(len(net_rows), np.int64), xs2, ys2)
        bad = (depth_grid >= thresh) & (cover_grid == 0)
        if extra_points is not None and len(extra_points):
            pts2 = np.asarray(extra_points, dtype=np.int64)[:, :2] * 2
            sc = obj_rows * 2
            d = point_depths(kind, sc, pts2, weights)
            cov = point_depths(kind, net_rows * 2, pts2) if len(net_rows) else np.zeros(len(pts2), np.int64)
            idx = np.flatnonzero((d >= thresh) & (cov == 0))
            if len(idx):
                p = pts2[idx[0]]
                return False, (p[0] / 2, p[1] / 2)
        if bad.any():
            i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
            return False, (xs2[i] / 2, ys2[j] / 2)
        return True, None

    pts, _ = net_certificate_points(kind, obj_rows, extra_points, cap, seed)
    if len(pts) == 0:
        return True, None
    if kind == "disks2d":
        depths = point_depths(kind, obj_rows, pts, weights)
        deep = depths >= thresh
        if not deep.any():
            return True, None
        bad = deep
        px, py = pts[:, 0], pts[:, 1]
        for row in net_rows:
            bad &= ~covered_by_object(kind, row, px, py, None)
            if not bad.any():
                return True, None
        idx = int(np.argmax(bad))
        return False, (int(pts[idx][0]), int(pts[idx][1]))
    if kind == "halfspaces3d":
        return _halfspace_net_check(obj_rows, weights, net_rows, thresh, pts)
    raise ValueError(f"unknown kind {kind!r}")


def _halfspace_net_check(obj_rows, weights, net_rows, thresh, pts):
    """A 2D location (x, y) witnesses a net violation iff the weighted
    thresh-th lowest plane height there is strictly below the net envelope."""
    weights = np.asarray(weights, dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(obj_rows)))
    for start in range(0, len(pts), step):
        px = pts[start:start + step, 0]
        py = pts[start:start + step, 1]
        heights = (obj_rows[:, 0][:, None] * px[None, :] +
                   obj_rows[:, 1][:, None] * py[None, :] +
                   obj_rows[:, 2][:, None])
        order = np.argsort(heights, axis=0, kind="stable")
        cum = np.cumsum(weights[order], axis=0)
        first = np.argmax(cum >= thresh, axis=0)
        hs = np.take_along_axis(heights, order, axis=0)
        quantile = hs[first, np.arange(len(px))]
        if len(net_rows):
            env = np.min(net_rows[:, 0][:, None] * px[None, :] +
                         net_rows[:, 1][:, None] * py[None, :] +
                         net_rows[:, 2][:, None], axis=0)
        else:
            env = np.full(len(px), np.iinfo(np.int64).max)
        bad = env > quantile
        if bad.any():
            idx = int(np.argmax(bad))
            return False, (int(px[idx]), int(py[idx]))
    return True, None
