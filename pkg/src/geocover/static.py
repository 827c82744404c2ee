"""From-scratch approximate set cover for a frozen instance.

``static_mwu_cover`` runs the reweighting engine over a dense membership
matrix, which is the right tool for every subproblem this package feeds it
(canonical-rectangle caches, per-cluster solves, small instances).  Larger
3D instances route through the partition-tree adapter instead.

``static_recursive_cover`` implements the divide-and-conquer combination for
3D halfspaces / lifted disks: a depth-reduction prefix when the optimum looks
small, and otherwise an envelope sample plus cluster recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mwu, nets, oracle

_MATRIX_LIMIT = 1 << 25  # max membership-matrix cells for the dense adapter


@dataclass
class StaticConfig:
    case_threshold_exponent: float = 5.0 / 6.0
    case_slack: float = 4.0
    b_exp: float = 1.0 / 6.0
    g_exp: float = 1.0 / 3.0
    base_cutoff: int = 256
    rng_seed: int = 0
    error_control_power: int = 3   # N = n ** power
    reruns: int = 2                # best-of reruns of the small-case engine
    net_strategy: str = "greedy"


def binomial_by_doublings(rng, doublings, rho):
    """Per-element Binomial(2^d, rho) draws; Poisson tail for d > 62.

    The Poisson branch only triggers for multiplicities beyond int64, where
    the total-variation gap is far below any measurable tolerance.
    """
    doublings = np.asarray(doublings)
    out = np.zeros(len(doublings), dtype=np.int64)
    if rho <= 0.0 or len(doublings) == 0:
        return out
    small = doublings <= 62
    if small.any():
        counts = np.left_shift(np.int64(1), doublings[small].astype(np.int64))
        out[small] = rng.binomial(counts, min(rho, 1.0))
    for idx in np.flatnonzero(~small):
        lam = min(rho, 1.0) * float(2 ** int(doublings[idx]))
        out[idx] = rng.poisson(lam)
    return out


class MatrixOracles:
    """Engine oracle set backed by a dense object x point membership matrix."""

    def __init__(self, kind, matrix, oids, pids, objects_by_id,
                 net_strategy="greedy", extra_points=None):
        self.kind = kind
        self.matrix = matrix
        self.oids = list(oids)
        self.pids = list(pids)
        self.objects_by_id = objects_by_id
        self.net_strategy = net_strategy
        self.extra_points = extra_points
        self._universe_depth = matrix.sum(axis=0)

    def reset_run(self, rng):
        self.rng = rng
        m = len(self.oids)
        self.doublings = np.zeros(m, dtype=np.int64)
        self.r_counts = np.zeros(m, dtype=np.int64)
        self.pt_depth = np.zeros(len(self.pids), dtype=np.int64)

    def initial_multiset_size(self):
        return len(self.oids)

    def begin_round(self, rho):
        self.r_counts = binomial_by_doublings(self.rng, self.doublings, rho)
        self.pt_depth = self.r_counts @ self.matrix
        return int(self.r_counts.sum())

    def find_light(self, bound):
        if len(self.pids) == 0:
            return None
        j = int(np.argmin(self.pt_depth))
        d = int(self.pt_depth[j])
        if d > bound:
            return None
        return self.pids[j], d

    def universe_depth(self, pid):
        j = self.pids.index(pid)
        return int(self._universe_depth[j])

    def double_at(self, pid, rho):
        j = self.pids.index(pid)
        col = self.matrix[:, j]
        agg = sum(1 << int(d) for d in self.doublings[col])
        new = np.zeros(len(self.oids), dtype=np.int64)
        new[col] = binomial_by_doublings(self.rng, self.doublings[col], rho)
        self.doublings[col] += 1
        self.r_counts += new
        touched = np.flatnonzero(new)
        if len(touched):
            self.pt_depth += new[touched] @ self.matrix[touched]
        return agg

    def _sample_dict(self):
        idx = np.flatnonzero(self.r_counts)
        return {self.oids[int(i)]: int(self.r_counts[int(i)]) for i in idx}

    def build_net(self, eps, rng):
        sample = self._sample_dict()
        if not sample:
            return None
        try:
            return nets.build_net(self.kind, self.objects_by_id, sample, eps, rng,
                                  strategy=self.net_strategy,
                                  extra_points=self.extra_points)
        except nets.NetConstructionError:
            return None

    def uncovered_by(self, net_ids):
        if not self.pids:
            return None
        rows = [self.oids.index(o) for o in net_ids]
        covered = self.matrix[rows].any(axis=0) if rows else np.zeros(len(self.pids), bool)
        if covered.all():
            return None
        return self.pids[int(np.argmax(~covered))]


def _matrix_for(instance):
    oids = instance.object_ids()
    pids = instance.point_ids()
    obj_rows = np.array([instance.obj(o) for o in oids], np.int64).reshape(-1, 3)
    pt_rows = np.array([instance.point(p) for p in pids], np.int64)
    return oracle.membership_matrix(instance.kind, obj_rows, pt_rows), oids, pids


def static_mwu_cover(instance, seed=0, net_strategy="greedy", t_cap=None):
    """Approximate cover of a frozen instance via the reweighting engine.

    Returns a mwu outcome: Cover, Infeasible, or (only when t_cap cuts the
    guess range short) GuessTooSmall.
    """
    if instance.n_points == 0:
        return mwu.Cover([], mwu.MwuStats())
    if instance.n_objects == 0:
        return mwu.Infeasible(instance.point_ids()[0], mwu.MwuStats())
    if instance.n_points * instance.n_objects > _MATRIX_LIMIT:
        raise ValueError("instance too large for the dense static adapter")
    matrix, oids, pids = _matrix_for(instance)
    extra = None
    if instance.kind != "squares2d":
        extra = np.array([instance.point(p) for p in pids], np.int64)
    oracles = MatrixOracles(instance.kind, matrix, oids, pids,
                            instance.objects_dict(), net_strategy, extra)
    n = instance.size

    def run_at(t):
        cfg = mwu.MwuConfig(t=t, n=n, rng_seed=seed, net_strategy=net_strategy)
        return mwu.run_mwu(oracles, cfg)

    return mwu.guess_loop(run_at, instance.n_objects, t_cap=t_cap)


def greedy_cover(instance):
    """Classical max-coverage greedy; (ids, None) or (partial, witness pid)."""
    pids = instance.point_ids()
    if not pids:
        return [], None
    matrix, oids, pids = _matrix_for(instance)
    uncovered = np.ones(len(pids), dtype=bool)
    gains = matrix.sum(axis=1)
    chosen = []
    while uncovered.any():
        best = int(np.argmax(gains))
        if gains[best] <= 0:
            return chosen, pids[int(np.argmax(uncovered))]
        chosen.append(oids[best])
        newly = matrix[best] & uncovered
        uncovered &= ~newly
        cols = np.flatnonzero(newly)
        gains = gains - matrix[:, cols].sum(axis=1)
        gains[best] = 0
    return sorted(chosen), None


def build_T0(instance, t_prime):
    """Greedy depth-reduction prefix: one pass over objects in id order.

    Objects still containing at least max(2, ceil(n/t')) live points are
    taken and their points removed, so at most t' objects qualify and every
    remaining object contains at most ceil(n/t') of the remaining points.
    Returns (prefix ids, removed point ids).
    """
    pids = instance.point_ids()
    n = len(pids)
    if n == 0 or instance.n_objects == 0:
        return [], []
    threshold = max(2, -(-n // max(1, t_prime)))
    pt_rows = np.array([instance.point(p) for p in pids], np.int64)
    live = np.ones(n, dtype=bool)
    px, py = pt_rows[:, 0], pt_rows[:, 1]
    pz = pt_rows[:, 2] if pt_rows.shape[1] == 3 else None
    prefix = []
    removed_idx = []
    for oid in instance.object_ids():
        mask = oracle.covered_by_object(instance.kind, instance.obj(oid), px, py, pz)
        mask &= live
        if int(mask.sum()) >= threshold:
            prefix.append(oid)
            removed_idx.extend(np.flatnonzero(mask).tolist())
            live &= ~mask
    removed = [pids[i] for i in removed_idx]
    return prefix, removed
