"""Geometry-agnostic randomized reweighting loop for approximate set cover.

The engine drives three geometry oracles: light-point search against the
current sample, multiplicity-weighted sampling of the objects containing a
point, and net construction over the final sample.  A run keeps an implicit
multiset of objects whose sizes double along the way; the sample stays small
so all work is proportional to the guess, not the instance.

Outcomes: ``Cover`` (verified cover within the net size budget),
``GuessTooSmall`` (round budget exhausted; caller doubles the guess), or
``Infeasible`` with a witness point covered by no object at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MwuAnomalyError(RuntimeError):
    """All guesses exhausted without a cover or an infeasibility witness."""


class OracleInconsistency(RuntimeError):
    pass


def log2ceil(n):
    return max(1, math.ceil(math.log2(max(int(n), 2))))


@dataclass
class MwuConfig:
    t: int
    n: int                     # current |X| + |S|
    c0: int = 8
    round_cap: int | None = None
    rng_seed: int = 0
    net_strategy: str = "greedy"
    net_size_const: int = 16
    max_net_retries: int = 6

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("guess must be >= 1")
        if self.c0 < 2:
            raise ValueError("c0 must be >= 2")
        if self.round_cap is None:
            self.round_cap = self.default_round_cap(self.n, self.t)

    @staticmethod
    def default_round_cap(n, t):
        return 2 * (log2ceil(max(2, n // max(t, 1))) + 2)

    @property
    def log_n(self):
        return log2ceil(self.n)

    @property
    def light_bound(self):
        return (self.c0 * self.log_n) // 2


@dataclass
class MwuStats:
    guess_t: int = 0
    rounds: int = 0
    doubling_steps: int = 0
    shat_per_round: list = field(default_factory=list)  # (start, end) pairs
    sample_sizes: list = field(default_factory=list)
    net_size: int = 0

    def as_dict(self):
        return {
            "guess_t": self.guess_t,
            "rounds": self.rounds,
            "doubling_steps": self.doubling_steps,
            "net_size": self.net_size,
            "max_sample_size": max(self.sample_sizes, default=0),
        }


@dataclass
class Cover:
    ids: list
    stats: MwuStats


@dataclass
class GuessTooSmall:
    stats: MwuStats


@dataclass
class Infeasible:
    witness: object
    stats: MwuStats


def run_mwu(oracles, config: MwuConfig):
    """One run of the reweighting loop at a fixed guess.

    The oracle adapter owns the geometry; this loop owns the sample multiset
    size bookkeeping, round structure and termination checks.
    """
    rng = np.random.default_rng([config.rng_seed, config.t])
    stats = MwuStats(guess_t=config.t)
    oracles.reset_run(rng)
    shat = oracles.initial_multiset_size()
    if shat <= 0:
        raise OracleInconsistency("empty object universe handed to the engine")
    t = config.t
    target = config.c0 * t * config.log_n
    for _round in range(config.round_cap):
        rho = min(1.0, target / float(shat))
        sample_size = oracles.begin_round(rho)
        stats.rounds += 1
        stats.sample_sizes.append(sample_size)
        shat_start = shat
        steps_this_round = 0
        light_exhausted = False
        while steps_this_round < t:
            found = oracles.find_light(config.light_bound)
            if found is None:
                light_exhausted = True
                break
            pid, depth_in_sample = found
            if depth_in_sample == 0 and oracles.universe_depth(pid) == 0:
                stats.shat_per_round.append((shat_start, shat))
                return Infeasible(pid, stats)
            added = oracles.double_at(pid, rho)
            shat += added
            stats.doubling_steps += 1
            steps_this_round += 1
        stats.shat_per_round.append((shat_start, shat))
        if light_exhausted:
            net = oracles.build_net(_net_eps(t), rng)
            if net is not None:
                missing = oracles.uncovered_by(net)
                if missing is None:
                    stats.net_size = len(net)
                    return Cover(sorted(net), stats)
            # net failed its budget or left a point uncovered; take a fresh
            # round rather than emit a bad cover (low-probability path)
    return GuessTooSmall(stats)


def _net_eps(t):
    return (1, 8 * t)


def guess_loop(run_at, n_objects, t_cap=None, raise_on_exhaust=None):
    """Double the guess from 1 until a Cover or Infeasible outcome.

    ``run_at`` maps a guess to an outcome. With a t_cap below the object
    count, exhaustion returns the last GuessTooSmall (the caller switches
    strategy); a full-range loop raises MwuAnomalyError instead, since with
    high probability some guess at or above OPT must succeed.
    """
    cap = n_objects if t_cap is None else min(t_cap, n_objects)
    if raise_on_exhaust is None:
        raise_on_exhaust = t_cap is None or t_cap >= n_objects
    t = 1
    last = None
    while t <= max(cap, 1):
        outcome = run_at(t)
        if isinstance(outcome, (Cover, Infeasible)):
            return outcome
        last = outcome
        t *= 2
    if raise_on_exhaust:
        raise MwuAnomalyError(
            f"no cover found for any guess up to {cap}; instance or oracles suspect")
    return last
