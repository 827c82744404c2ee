import math

import numpy as np
import pytest

from geocover import mwu, nets, oracle, static
from geocover.gen import GeneratorSpec, gen_instance
from geocover.instance import Instance
from geocover.oracle import brute_net_check, exact_opt, verify_cover
from geocover.static import MatrixOracles, build_T0, greedy_cover, static_mwu_cover


def make_oracles(instance, net_strategy="greedy"):
    matrix, oids, pids = static._matrix_for(instance)
    extra = None
    if instance.kind != "squares2d":
        extra = np.array([instance.point(p) for p in pids], np.int64)
    return MatrixOracles(instance.kind, matrix, oids, pids,
                         instance.objects_dict(), net_strategy, extra)


def test_single_object_instance_covers_with_small_net():
    inst = Instance.from_lists("squares2d", [(i, 0) for i in range(-3, 4)], [(0, 0, 5)])
    out = static_mwu_cover(inst, seed=1)
    assert isinstance(out, mwu.Cover)
    assert verify_cover(inst, out.ids)[0]
    assert len(out.ids) <= nets.net_size_bound((1, 8))


def test_infeasible_instance_returns_witness():
    inst = Instance.from_lists("squares2d", [(0, 0), (500, 500)], [(0, 0, 5)])
    out = static_mwu_cover(inst, seed=1)
    assert isinstance(out, mwu.Infeasible)
    assert out.witness == 1  # the uncovered point


def test_seeded_instance_cover_ratio_against_exact():
    inst = gen_instance(GeneratorSpec("squares2d", 40, 24, "planted", seed=9, opt=4))
    res = exact_opt(inst)
    assert res.opt_size == 4
    out = static_mwu_cover(inst, seed=3)
    assert isinstance(out, mwu.Cover)
    ok, _ = verify_cover(inst, out.ids)
    assert ok
    assert len(out.ids) / res.opt_size <= 32


def test_begin_round_identity_when_all_weights_one_and_rho_one():
    inst = gen_instance(GeneratorSpec("squares2d", 10, 12, "uniform", seed=2))
    orc = make_oracles(inst)
    orc.reset_run(np.random.default_rng(0))
    size = orc.begin_round(1.0)
    assert size == inst.n_objects
    assert (orc.r_counts == 1).all()


def test_begin_round_sample_size_statistics():
    inst = gen_instance(GeneratorSpec("squares2d", 32, 64, "uniform", seed=4))
    orc = make_oracles(inst)
    orc.reset_run(np.random.default_rng(7))
    t, c0 = 2, 8
    log_n = mwu.log2ceil(inst.size)
    rho = min(1.0, c0 * t * log_n / inst.n_objects)
    draws = [orc.begin_round(rho) for _ in range(1000)]
    mean = np.mean(draws)
    expect = rho * inst.n_objects
    sigma = math.sqrt(inst.n_objects * rho * (1 - rho)) / math.sqrt(len(draws))
    assert abs(mean - expect) <= 3 * max(sigma, 1e-9)


def test_doubling_step_aggregate_tracks_multiset_size():
    # one point inside one object: each doubling adds the current multiplicity
    inst = Instance.from_lists("squares2d", [(0, 0)], [(0, 0, 2), (100, 100, 1)])
    orc = make_oracles(inst)
    orc.reset_run(np.random.default_rng(0))
    orc.begin_round(0.5)
    assert orc.double_at(0, 0.5) == 1
    assert orc.double_at(0, 0.5) == 2
    assert orc.double_at(0, 0.5) == 4


def test_doubling_step_no_containing_object_is_noop_on_size():
    inst = Instance.from_lists("squares2d", [(500, 500), (0, 0)], [(0, 0, 2)])
    orc = make_oracles(inst)
    orc.reset_run(np.random.default_rng(0))
    orc.begin_round(1.0)
    assert orc.double_at(0, 1.0) == 0  # point 0 sits in no object


def test_shat_tracking_matches_brute_force_recomputation():
    inst = gen_instance(GeneratorSpec("squares2d", 30, 34, "uniform", seed=11))
    orc = make_oracles(inst)
    rng = np.random.default_rng(5)
    orc.reset_run(rng)
    orc.begin_round(0.3)
    shat = inst.n_objects
    for step in range(20):
        pid = inst.point_ids()[step % inst.n_points]
        agg = orc.double_at(pid, 0.3)
        shat += agg
        brute = sum(1 << int(d) for d in orc.doublings)
        assert shat == brute


def test_find_light_cases():
    inst = gen_instance(GeneratorSpec("squares2d", 16, 8, "uniform", seed=3))
    orc = make_oracles(inst)
    orc.reset_run(np.random.default_rng(1))
    # before any sampling every point has depth 0: some light point exists
    orc.begin_round(0.0)
    pid, depth = orc.find_light(bound=4)
    assert depth == 0 and pid in inst.point_ids()
    # force everything deep by inflating the sample counts directly
    orc.r_counts[:] = 100
    orc.pt_depth = orc.r_counts @ orc.matrix
    if (orc.pt_depth > 4).all():
        assert orc.find_light(bound=4) is None


def test_find_light_agrees_with_scan_oracle():
    inst = gen_instance(GeneratorSpec("squares2d", 128, 64, "uniform", seed=8))
    orc = make_oracles(inst)
    rng = np.random.default_rng(2)
    orc.reset_run(rng)
    orc.begin_round(0.4)
    rows = np.array([inst.obj(o) for o in inst.object_ids()], np.int64)
    pts = np.array([inst.point(p) for p in inst.point_ids()], np.int64)
    depths = oracle.point_depths("squares2d", rows, pts, orc.r_counts)
    got = orc.find_light(bound=int(depths.max()))
    assert got is not None
    pid, d = got
    assert d == depths.min()


def test_run_determinism_bit_for_bit():
    inst = gen_instance(GeneratorSpec("squares2d", 64, 40, "planted", seed=21, opt=4))
    outs = []
    for _ in range(2):
        out = static_mwu_cover(inst, seed=77)
        assert isinstance(out, mwu.Cover)
        outs.append((tuple(out.ids), out.stats.rounds, out.stats.doubling_steps,
                     tuple(out.stats.sample_sizes)))
    assert outs[0] == outs[1]


def test_guess_loop_small_opt_terminates_early():
    inst = Instance.from_lists("squares2d", [(i, i) for i in range(-4, 5)], [(0, 0, 6)])
    out = static_mwu_cover(inst, seed=2)
    assert isinstance(out, mwu.Cover)
    assert out.stats.guess_t <= 2


def test_guess_loop_infeasible_detected_at_first_guess():
    inst = Instance.from_lists("squares2d", [(900, 900)], [(0, 0, 5), (1, 1, 5)])
    out = static_mwu_cover(inst, seed=2)
    assert isinstance(out, mwu.Infeasible)


def test_guess_loop_capped_returns_guess_too_small():
    # planted OPT=8 but cap the guesses at 2: must report GuessTooSmall
    inst = gen_instance(GeneratorSpec("squares2d", 32, 16, "planted", seed=5, opt=8))
    out = static_mwu_cover(inst, seed=4, t_cap=2)
    assert isinstance(out, (mwu.GuessTooSmall, mwu.Cover))
    if isinstance(out, mwu.Cover):  # a tiny chance the net covers anyway
        assert verify_cover(inst, out.ids)[0]


# -- net builders ------------------------------------------------------------

def test_net_single_object_multiset():
    objs = {3: (0, 0, 5)}
    rng = np.random.default_rng(0)
    net = nets.build_net("squares2d", objs, {3: 9}, (1, 2), rng)
    assert net == [3]
    ok, _ = brute_net_check("squares2d", objs, net, {3: 9}, (1, 2))
    assert ok


def test_net_eps_one_requires_full_depth_points_only():
    objs = {0: (0, 0, 4), 1: (100, 0, 4)}
    weights = {0: 1, 1: 1}
    rng = np.random.default_rng(0)
    net = nets.build_net("squares2d", objs, weights, 1, rng)
    # no point has depth 2 = |R|, so the empty net is valid
    assert net == []
    ok, _ = brute_net_check("squares2d", objs, net, weights, 1)
    assert ok


@pytest.mark.parametrize("strategy", ["greedy", "sampled"])
def test_net_on_seeded_square_sample(strategy):
    rng_inst = np.random.default_rng(123)
    objs = {}
    weights = {}
    for oid in range(200):
        objs[oid] = (int(rng_inst.integers(-100, 100)),
                     int(rng_inst.integers(-100, 100)),
                     int(rng_inst.integers(1, 60)))
        weights[oid] = int(rng_inst.integers(1, 4))
    rng = np.random.default_rng(7)
    net = nets.build_net("squares2d", objs, weights, (1, 16), rng, strategy=strategy)
    ok, wit = brute_net_check("squares2d", objs, net, weights, (1, 16))
    assert ok, wit
    assert len(net) <= nets.net_size_bound((1, 16))


def test_net_halfspaces_seeded_sample():
    rng_inst = np.random.default_rng(5)
    objs = {}
    weights = {}
    for oid in range(80):
        a = int(rng_inst.integers(-10, 11))
        b = int(rng_inst.integers(-10, 11))
        c = int(rng_inst.integers(-5000, 5000))
        objs[oid] = (a, b, c)
        weights[oid] = int(rng_inst.integers(1, 3))
    rng = np.random.default_rng(9)
    net = nets.build_net("halfspaces3d", objs, weights, (1, 8), rng)
    ok, wit = brute_net_check("halfspaces3d", objs, net, weights, (1, 8))
    assert ok, wit


# -- greedy baseline and depth reduction ------------------------------------

def test_greedy_empty_and_disjoint_exact():
    inst = Instance.from_lists("squares2d", [], [(0, 0, 1)])
    assert greedy_cover(inst) == ([], None)
    pts = [(i * 100, 0) for i in range(6)]
    objs = [(i * 100, 0, 2) for i in range(6)]
    inst = Instance.from_lists("squares2d", pts, objs)
    ids, witness = greedy_cover(inst)
    assert witness is None and len(ids) == 6


def test_greedy_ratio_against_exact_on_corpus():
    worst = 0.0
    for seed in range(30):
        inst = gen_instance(GeneratorSpec("squares2d", 24, 12, "uniform", seed=seed))
        res = exact_opt(inst)
        if res.opt_size is None:
            continue
        ids, witness = greedy_cover(inst)
        assert witness is None
        worst = max(worst, len(ids) / res.opt_size)
    assert worst <= 1 + math.log(64)


def test_build_T0_threshold_cases():
    # spread instance, t' = n: nothing qualifies
    pts = [(i * 50, 0) for i in range(10)]
    objs = [(i * 50, 0, 2) for i in range(10)]
    inst = Instance.from_lists("squares2d", pts, objs)
    prefix, removed = build_T0(inst, 10)
    assert prefix == [] and removed == []
    # one object holding everything, t' = 1: taken, all points removed
    inst = Instance.from_lists("squares2d", [(i, 0) for i in range(8)], [(3, 0, 10)])
    prefix, removed = build_T0(inst, 1)
    assert prefix == [0]
    assert sorted(removed) == list(range(8))


def test_build_T0_postconditions_on_seeded_instance():
    inst = gen_instance(GeneratorSpec("halfspaces3d", 256, 128, "uniform", seed=6))
    n = inst.n_points
    t_prime = 8
    prefix, removed = build_T0(inst, t_prime)
    assert len(prefix) <= t_prime
    removed_set = set(removed)
    ok, _ = verify_cover(
        Instance.from_lists("halfspaces3d", [inst.point(p) for p in sorted(removed_set)],
                            [inst.obj(o) for o in prefix]), list(range(len(prefix))))
    assert ok
    # residual objects contain at most ceil(n/t') residual points
    residual_pts = [inst.point(p) for p in inst.point_ids() if p not in removed_set]
    limit = -(-n // t_prime)
    if residual_pts:
        rows = np.array([inst.obj(o) for o in inst.object_ids() if o not in prefix],
                        np.int64).reshape(-1, 3)
        mat = oracle.membership_matrix("halfspaces3d", rows, np.array(residual_pts, np.int64))
        assert int(mat.sum(axis=1).max(initial=0)) <= limit
