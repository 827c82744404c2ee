"""Epsilon-net construction over weighted object samples.

Two strategies behind one entry point:

* ``greedy`` (default): compute the deep part of the checker's certificate
  point set and cover it greedily with distinct sample objects.  The result
  passes the brute checker by construction and is small in practice.
* ``sampled``: draw (1/eps)*ln(2/eps) weighted samples, verify against the
  brute checker, and retry with escalating sizes; falls back to greedy.

Both are bounded by ``net_size_bound``; exceeding it is treated as a failed
attempt.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import oracle


class NetConstructionError(RuntimeError):
    pass


def net_size_bound(eps, const=16):
    """Size budget C/eps * ln(2/eps) for the sample-and-verify strategy."""
    inv = float(Fraction(eps[0], eps[1]) if isinstance(eps, tuple) else Fraction(eps))
    return max(1, math.ceil(const / inv * math.log(2.0 / inv)))


def _eps_fraction(eps):
    return Fraction(eps[0], eps[1]) if isinstance(eps, tuple) else Fraction(eps)


def build_net(kind, objects_by_id, sample_weights, eps, rng,
              strategy="greedy", size_const=16, extra_points=None,
              max_retries=6, cert_seed=0):
    """Return net ids (subset of the sample's distinct objects).

    ``sample_weights`` maps object id -> copy count in the multiset sample.
    Raises NetConstructionError when no verified net within the size bound
    can be produced.
    """
    live = {oid: w for oid, w in sample_weights.items() if w > 0}
    if not live:
        return []
    bound = net_size_bound(eps, size_const)
    if strategy == "sampled":
        net = _sampled_net(kind, objects_by_id, live, eps, rng, bound,
                           extra_points, max_retries, cert_seed)
        if net is not None:
            return net
        # fall through to the deterministic builder
    net = _greedy_net(kind, objects_by_id, live, eps, extra_points, cert_seed)
    if len(net) > bound:
        raise NetConstructionError(
            f"greedy net of size {len(net)} exceeds the bound {bound}")
    return net


def _sampled_net(kind, objects_by_id, live, eps, rng, bound,
                 extra_points, max_retries, cert_seed):
    ids = np.array(sorted(live), dtype=np.int64)
    weights = np.array([live[int(i)] for i in ids], dtype=np.float64)
    probs = weights / weights.sum()
    inv = 1.0 / float(_eps_fraction(eps))
    size = max(1, math.ceil(inv * math.log(2.0 * inv)))
    for _ in range(max_retries):
        size = min(size, len(ids) if False else size)
        draw = rng.choice(ids, size=min(size, max(1, int(size))), replace=True, p=probs)
        net = sorted(set(int(v) for v in draw))
        if len(net) <= bound:
            ok, _ = oracle.brute_net_check(kind, objects_by_id, net, live, eps,
                                           extra_points, seed=cert_seed)
            if ok:
                return net
        size = math.ceil(size * 1.5)
    return None


def _greedy_net(kind, objects_by_id, live, eps, extra_points, cert_seed):
    if kind == "squares2d":
        return _greedy_net_squares(objects_by_id, live, eps)
    return _greedy_net_candidates(kind, objects_by_id, live, eps,
                                  extra_points, cert_seed)


def _greedy_net_squares(objects_by_id, live, eps):
    oids = sorted(live)
    rows = np.array([objects_by_id[o] for o in oids], dtype=np.int64)
    weights = np.array([live[o] for o in oids], dtype=np.int64)
    total = int(weights.sum())
    thresh = max(oracle._deep_threshold(eps, total), 1)
    xs2, ys2 = oracle.square_face_axes(rows)
    depth = oracle.square_grid_accumulate(rows, weights, xs2, ys2)
    deep = depth >= thresh
    if not deep.any():
        return []
    # index ranges of each candidate square on the doubled grid
    i1 = np.searchsorted(xs2, 2 * (rows[:, 0] - rows[:, 2]))
    i2 = np.searchsorted(xs2, 2 * (rows[:, 0] + rows[:, 2]), side="right") - 1
    j1 = np.searchsorted(ys2, 2 * (rows[:, 1] - rows[:, 2]))
    j2 = np.searchsorted(ys2, 2 * (rows[:, 1] + rows[:, 2]), side="right") - 1
    chosen = []
    remaining = deep.astype(np.int64)
    while remaining.any():
        pref = remaining.cumsum(axis=0).cumsum(axis=1)
        padded = np.zeros((pref.shape[0] + 1, pref.shape[1] + 1), dtype=np.int64)
        padded[1:, 1:] = pref
        gains = (padded[i2 + 1, j2 + 1] - padded[i1, j2 + 1]
                 - padded[i2 + 1, j1] + padded[i1, j1])
        best = int(np.argmax(gains))
        if gains[best] <= 0:
            raise NetConstructionError("deep cell not coverable by the sample")
        chosen.append(oids[best])
        remaining[i1[best]:i2[best] + 1, j1[best]:j2[best] + 1] = 0
    return sorted(chosen)


def _greedy_net_candidates(kind, objects_by_id, live, eps, extra_points, cert_seed):
    oids = sorted(live)
    rows = np.array([objects_by_id[o] for o in oids], dtype=np.int64)
    weights = np.array([live[o] for o in oids], dtype=np.int64)
    total = int(weights.sum())
    thresh = max(oracle._deep_threshold(eps, total), 1)
    pts, _ = oracle.net_certificate_points(kind, rows, extra_points, seed=cert_seed)
    if len(pts) == 0:
        return []
    px, py = pts[:, 0], pts[:, 1]
    if kind == "halfspaces3d":
        heights = (rows[:, 0][:, None] * px[None, :] +
                   rows[:, 1][:, None] * py[None, :] + rows[:, 2][:, None])
        order = np.argsort(heights, axis=0, kind="stable")
        cum = np.cumsum(weights[order], axis=0)
        first = np.argmax(cum >= thresh, axis=0)
        hs = np.take_along_axis(heights, order, axis=0)
        quantile = hs[first, np.arange(len(px))]
        covers = heights <= quantile[None, :]
        active = np.ones(len(px), dtype=bool)  # all locations must be satisfied
    else:
        covers = oracle.membership_matrix(kind, rows, pts)
        depths = (covers * weights[:, None]).sum(axis=0)
        active = depths >= thresh
    chosen = []
    remaining = active.copy()
    while remaining.any():
        gains = (covers & remaining[None, :]).sum(axis=1)
        best = int(np.argmax(gains))
        if gains[best] <= 0:
            raise NetConstructionError("deep candidate not coverable by the sample")
        chosen.append(oids[best])
        remaining &= ~covers[best]
    return sorted(chosen)
