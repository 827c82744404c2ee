"""Seeded instance and update-stream generators, including planted optima.

Planted-OPT(k) instances consist of k widely separated clusters, each with a
mandatory object covering exactly its own cluster, so OPT equals k by
construction.  All generators are deterministic under their seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instance import Instance
from .oracle import membership_matrix

DISTRIBUTIONS = ("uniform", "clustered", "planted", "nested", "adversarial-grid")


@dataclass
class GeneratorSpec:
    kind: str
    n_points: int
    n_objects: int
    distribution: str = "uniform"
    seed: int = 0
    opt: int = 4                 # planted distribution only
    ensure_feasible: bool = True
    extras: dict = field(default_factory=dict)


def _coord_range(kind):
    # disks must stay liftable: |center|, r <= 2^12 keeps lifts in bounds
    return 4000 if kind == "disks2d" else 1_000_000


def gen_instance(spec: GeneratorSpec) -> Instance:
    if spec.distribution == "planted" and spec.kind == "halfspaces3d":
        return gen_planted_lifted(spec)
    rng = np.random.default_rng(spec.seed)
    kind = spec.kind
    builder = {
        "uniform": _gen_uniform,
        "clustered": _gen_clustered,
        "planted": _gen_planted,
        "nested": _gen_nested,
        "adversarial-grid": _gen_grid,
    }.get(spec.distribution)
    if builder is None:
        raise ValueError(f"unknown distribution {spec.distribution!r}")
    points, objects = builder(spec, rng)
    if spec.ensure_feasible and spec.distribution not in ("planted", "nested"):
        objects = _patch_feasible(kind, points, objects)
    return Instance.from_lists(kind, points, objects)


def _patch_feasible(kind, points, objects):
    """Replace trailing objects with small ones covering uncovered points."""
    if not points:
        return objects
    pts = np.asarray(points, dtype=np.int64)
    objs = list(objects)
    mat = membership_matrix(kind, np.asarray(objs, np.int64).reshape(-1, 3), pts)
    uncovered = ~mat.any(axis=0) if len(objs) else np.ones(len(pts), dtype=bool)
    patches = []
    for idx in np.flatnonzero(uncovered):
        x, y = int(pts[idx][0]), int(pts[idx][1])
        if kind == "squares2d":
            patches.append((x, y, 1))
        elif kind == "disks2d":
            patches.append((x, y, 1))
        else:
            z = int(pts[idx][2])
            patches.append((0, 0, z))  # horizontal plane just below the point
    for i, p in enumerate(patches):
        slot = len(objs) - 1 - i
        if slot >= 0 and not _is_sole_coverer(kind, objs, slot, pts):
            objs[slot] = p
        else:
            objs.append(p)
    return objs


def _is_sole_coverer(kind, objs, slot, pts):
    mat = membership_matrix(kind, np.asarray(objs, np.int64).reshape(-1, 3), pts)
    covered_by_slot = mat[slot]
    others = np.delete(mat, slot, axis=0)
    return bool((covered_by_slot & ~others.any(axis=0)).any())


def _gen_uniform(spec, rng):
    R = _coord_range(spec.kind)
    if spec.kind == "halfspaces3d":
        pts = np.stack([rng.integers(-R, R, spec.n_points) for _ in range(3)], axis=1)
        # planes anchored inside the point box so containment varies
        a = rng.integers(-20, 21, spec.n_objects)
        b = rng.integers(-20, 21, spec.n_objects)
        ax = rng.integers(-R, R, spec.n_objects)
        ay = rng.integers(-R, R, spec.n_objects)
        az = rng.integers(-R, R, spec.n_objects)
        c = az - a * ax - b * ay
        objs = np.stack([a, b, c], axis=1)
    else:
        pts = np.stack([rng.integers(-R, R, spec.n_points) for _ in range(2)], axis=1)
        cx = rng.integers(-R, R, spec.n_objects)
        cy = rng.integers(-R, R, spec.n_objects)
        h = rng.integers(1, max(2, R // 3), spec.n_objects)
        objs = np.stack([cx, cy, h], axis=1)
    return pts.tolist(), objs.tolist()


def _gen_clustered(spec, rng):
    R = _coord_range(spec.kind)
    k = max(1, min(8, spec.n_points // 8))
    centers = np.stack([rng.integers(-R // 2, R // 2, k) for _ in range(2)], axis=1)
    spread = max(2, R // 20)
    which = rng.integers(0, k, spec.n_points)
    pxy = centers[which] + rng.integers(-spread, spread + 1, (spec.n_points, 2))
    pxy = np.clip(pxy, -R, R)
    if spec.kind == "halfspaces3d":
        pz = rng.integers(-R, R, spec.n_points)
        pts = np.concatenate([pxy, pz[:, None]], axis=1)
        owhich = rng.integers(0, k, spec.n_objects)
        a = rng.integers(-20, 21, spec.n_objects)
        b = rng.integers(-20, 21, spec.n_objects)
        anchor = centers[owhich]
        az = rng.integers(-R, R, spec.n_objects)
        c = az - a * anchor[:, 0] - b * anchor[:, 1]
        objs = np.stack([a, b, c], axis=1)
    else:
        pts = pxy
        owhich = rng.integers(0, k, spec.n_objects)
        oc = centers[owhich] + rng.integers(-spread, spread + 1, (spec.n_objects, 2))
        h = rng.integers(1, max(2, 2 * spread), spec.n_objects)
        objs = np.concatenate([np.clip(oc, -R + 2 * spread, R - 2 * spread),
                               h[:, None]], axis=1)
    return pts.tolist(), objs.tolist()


def _planted_layout(spec, rng):
    """Cluster centers far enough apart that no object spans two clusters."""
    k = max(1, spec.opt)
    R = _coord_range(spec.kind)
    side = int(np.ceil(np.sqrt(k)))
    spacing = (2 * R) // max(side, 1)
    radius = max(2, spacing // 8)
    cells = rng.permutation(side * side)[:k]
    centers = []
    for cell in cells:
        gx, gy = int(cell) % side, int(cell) // side
        centers.append((-R + gx * spacing + spacing // 2,
                        -R + gy * spacing + spacing // 2))
    return k, centers, radius


def _gen_planted(spec, rng):
    k, centers, radius = _planted_layout(spec, rng)
    pts = []
    for i in range(spec.n_points):
        cx, cy = centers[i % k]
        px = cx + int(rng.integers(-radius // 2, radius // 2 + 1))
        py = cy + int(rng.integers(-radius // 2, radius // 2 + 1))
        pts.append((px, py))
    objs = []
    if spec.kind == "squares2d":
        for cx, cy in centers:
            objs.append((cx, cy, radius))
        for i in range(spec.n_objects - k):
            cx, cy = centers[i % k]
            h = max(1, radius // 4)
            objs.append((cx + int(rng.integers(-radius, radius + 1)),
                         cy + int(rng.integers(-radius, radius + 1)), h))
    elif spec.kind == "disks2d":
        for cx, cy in centers:
            objs.append((cx, cy, radius))
        for i in range(spec.n_objects - k):
            cx, cy = centers[i % k]
            objs.append((cx + int(rng.integers(-radius, radius + 1)),
                         cy + int(rng.integers(-radius, radius + 1)),
                         max(1, radius // 4)))
    else:
        raise ValueError("planted 3D instances come from gen_planted_lifted")
    if spec.kind == "squares2d":
        pts = [(x, y) for x, y in pts]
    return pts, objs


def gen_planted_lifted(spec: GeneratorSpec) -> Instance:
    """Planted-OPT(k) 3D halfspace instance via lifted separated disks.

    Points sit on the (negated) paraboloid, so a tiny disk around each
    cluster lifts to a halfspace containing exactly that cluster.
    """
    rng = np.random.default_rng(spec.seed)
    sub = GeneratorSpec("disks2d", spec.n_points, spec.n_objects, "planted",
                        spec.seed, spec.opt, False)
    k, centers, radius = _planted_layout(sub, rng)
    inst = Instance("halfspaces3d")
    from .geom import Disk, Point2, lift_disk, lift_point
    for i in range(spec.n_points):
        cx, cy = centers[i % k]
        px = cx + int(rng.integers(-radius // 2, radius // 2 + 1))
        py = cy + int(rng.integers(-radius // 2, radius // 2 + 1))
        p = lift_point(Point2(px, py))
        inst.insert_point((p.x, p.y, p.z))
    for cx, cy in centers:
        h = lift_disk(Disk(cx, cy, radius))
        inst.insert_object((h.a, h.b, h.c))
    for i in range(spec.n_objects - k):
        cx, cy = centers[i % k]
        h = lift_disk(Disk(cx + int(rng.integers(-radius, radius + 1)),
                           cy + int(rng.integers(-radius, radius + 1)),
                           max(1, radius // 4)))
        inst.insert_object((h.a, h.b, h.c))
    return inst


def _gen_nested(spec, rng):
    depth = spec.extras.get("depth", min(spec.n_objects, 12))
    objs = []
    if spec.kind == "halfspaces3d":
        for i in range(spec.n_objects):
            objs.append((0, 0, -(i % depth) * 10 - 1))
        pts = [(int(rng.integers(-50, 50)), int(rng.integers(-50, 50)), 0)
               for _ in range(spec.n_points)]
        return pts, objs
    base = 10
    for i in range(spec.n_objects):
        objs.append((0, 0, base + (i % depth) * base))
    pts = [(int(rng.integers(-base, base)), int(rng.integers(-base, base)))
           for _ in range(spec.n_points)]
    return pts, objs


def _gen_grid(spec, rng):
    side = max(2, int(np.ceil(np.sqrt(spec.n_points))))
    step = 10
    pts = []
    for i in range(spec.n_points):
        pts.append(((i % side) * step, (i // side) * step))
    objs = []
    if spec.kind == "halfspaces3d":
        pts = [(x, y, int(rng.integers(0, 100))) for x, y in pts]
        for i in range(spec.n_objects):
            objs.append((0, 0, int(rng.integers(0, 100))))
        return pts, objs
    for i in range(spec.n_objects):
        gx = int(rng.integers(0, side)) * step
        gy = int(rng.integers(0, side)) * step
        h = step * int(rng.integers(1, 4))
        objs.append((gx, gy, h))  # boundaries land exactly on grid points
    return pts, objs


# -- update streams -----------------------------------------------------------

def gen_stream(spec: GeneratorSpec, n_ops: int, solve_every: int = 10,
               with_estimates: bool = False):
    """Build (base_instance, ops) where ops is a JSON-lines-ready list.

    Feasibility is maintained throughout: inserted points land inside a live
    object, and object deletions never remove a sole coverer.  For planted
    instances the k mandatory objects are never deleted, so the current OPT
    stays equal to the number of live clusters (recorded per checkpoint).
    """
    if spec.distribution == "planted" and spec.kind == "halfspaces3d":
        inst = gen_planted_lifted(spec)
        protected = set(list(inst.objects_dict())[:spec.opt])
    else:
        inst = gen_instance(spec)
        protected = set(inst.object_ids()[:spec.opt]) if spec.distribution == "planted" else set()
    rng = np.random.default_rng(spec.seed + 101)
    work = Instance.from_lists(inst.kind, [inst.point(p) for p in inst.point_ids()],
                               [inst.obj(o) for o in inst.object_ids()])
    ops = []
    since_solve = 0

    def emit_solve():
        rec = {"op": "solve"}
        if spec.distribution == "planted":
            rec["opt_hint"] = _live_cluster_count(work)
        ops.append(rec)

    for _ in range(n_ops):
        choice = rng.random()
        if choice < 0.3 and work.n_points > 1:
            pid = int(rng.choice(work.point_ids()))
            ops.append({"op": "delete_point", "id": pid})
            work.delete_point(pid)
        elif choice < 0.55 and work.n_objects > 1:
            oid = _deletable_object(work, rng, protected)
            if oid is None:
                continue
            ops.append({"op": "delete_object", "id": oid})
            work.delete_object(oid)
        elif choice < 0.8:
            coords = _point_inside_some_object(work, rng)
            if coords is None:
                continue
            ops.append({"op": "insert_point", "data": list(coords)})
            work.insert_point(coords)
        else:
            coords = _fresh_object(work, rng)
            ops.append({"op": "insert_object", "data": list(coords)})
            work.insert_object(coords)
        since_solve += 1
        if since_solve >= solve_every:
            since_solve = 0
            if with_estimates and rng.random() < 0.5:
                ops.append({"op": "estimate"})
            else:
                emit_solve()
    emit_solve()
    return inst, ops


def _live_cluster_count(inst):
    if inst.n_points == 0:
        return 0
    mat = membership_matrix(
        inst.kind,
        np.array([inst.obj(o) for o in inst.object_ids()], np.int64).reshape(-1, 3),
        np.array([inst.point(p) for p in inst.point_ids()], np.int64))
    # lower bound certificate from the planted layout: number of objects
    # needed is at least the chromatic count of disjoint coverage groups;
    # planted clusters never merge, so count connected coverage groups.
    covered = mat.any(axis=0)
    if not covered.all():
        return None
    groups = 0
    remaining = np.ones(mat.shape[1], dtype=bool)
    while remaining.any():
        j = int(np.argmax(remaining))
        # all objects covering point j, then all points they cover
        objs = mat[:, j]
        pts = mat[objs].any(axis=0) if objs.any() else np.zeros_like(remaining)
        pts[j] = True
        remaining &= ~pts
        groups += 1
    return groups


def _deletable_object(work, rng, protected):
    oids = [o for o in work.object_ids() if o not in protected]
    if not oids:
        return None
    rng.shuffle(oids)
    pts = np.array([work.point(p) for p in work.point_ids()], np.int64)
    if len(pts) == 0:
        return oids[0]
    mat = membership_matrix(
        work.kind,
        np.array([work.obj(o) for o in work.object_ids()], np.int64).reshape(-1, 3),
        pts)
    cover_count = mat.sum(axis=0)
    order = {o: i for i, o in enumerate(work.object_ids())}
    for oid in oids[:20]:
        row = mat[order[oid]]
        if not (row & (cover_count == 1)).any():
            return oid
    return None


def _point_inside_some_object(work, rng):
    oids = work.object_ids()
    if not oids:
        return None
    for _ in range(10):
        oid = int(rng.choice(oids))
        a, b, c = work.obj(oid)
        if work.kind == "squares2d":
            return (a + int(rng.integers(-c, c + 1)), b + int(rng.integers(-c, c + 1)))
        if work.kind == "disks2d":
            r = max(1, c // 2)
            x = a + int(rng.integers(-r, r + 1))
            y = b + int(rng.integers(-r, r + 1))
            if (x - a) ** 2 + (y - b) ** 2 <= c * c and x * x + y * y <= 1 << 28:
                return (x, y)
            continue
        x = int(rng.integers(-1000, 1000))
        y = int(rng.integers(-1000, 1000))
        z = a * x + b * y + c + int(rng.integers(0, 100))
        if abs(z) <= 1 << 28:
            return (x, y, z)
    return None


def _fresh_object(work, rng):
    R = _coord_range(work.kind)
    if work.kind == "squares2d":
        return (int(rng.integers(-R, R)), int(rng.integers(-R, R)),
                int(rng.integers(1, max(2, R // 4))))
    if work.kind == "disks2d":
        return (int(rng.integers(-R, R)), int(rng.integers(-R, R)),
                int(rng.integers(1, max(2, R // 4))))
    a = int(rng.integers(-20, 21))
    b = int(rng.integers(-20, 21))
    x, y, z = (int(rng.integers(-1_000_000, 1_000_000)) for _ in range(3))
    return (a, b, z - a * x - b * y)
