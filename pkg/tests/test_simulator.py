import dataclasses

import numpy as np
import pytest

from aoisrp import simulate, simulate_batch, solve, srp
from aoisrp.model import ChannelModel, SrpPolicy
from aoisrp.simulator import RNG_ALGORITHM, available_backends
from conftest import fig5b_config, random_config
from oracles import exact_system_metrics

FIG5B_POLICY = SrpPolicy(0.642857142857143, 0, 0, 0.357142857142857)


def within(value, target, stderr, k=3.0):
    return abs(value - target) <= k * stderr


def test_deterministic():
    cfg = fig5b_config()
    a = simulate(cfg, FIG5B_POLICY, 50_000, seed=7)
    b = simulate(cfg, FIG5B_POLICY, 50_000, seed=7)
    assert a == b
    assert a.rng == RNG_ALGORITHM
    assert simulate(cfg, FIG5B_POLICY, 50_000, seed=8) != a


@pytest.mark.skipif("cython" not in available_backends(), reason="extension not built")
@pytest.mark.parametrize("memory", ["markov", "iid"])
def test_backends_bit_identical(memory):
    cfg = fig5b_config(0.9, 0.8)
    pol = SrpPolicy(0.2, 0.3, 0.1, 0.4)
    kw = dict(slots=150_001, warmup=77, seed=11, channel_memory=memory)
    fast = simulate(cfg, pol, backend="cython", **kw)
    slow = simulate(cfg, pol, backend="python", **kw)
    assert dataclasses.replace(fast, backend="python") == slow


def test_counts_cover_exactly_slots():
    r = simulate(fig5b_config(), SrpPolicy(0.25, 0.25, 0.25, 0.25), 12_345, warmup=100, seed=2)
    assert sum(r.action_counts) == 12_345
    assert r.slots == 12_345 and r.warmup == 100


def test_cost_accounting_exact():
    cfg = fig5b_config()
    r = simulate(cfg, SrpPolicy(0.25, 0.25, 0.25, 0.25), 100_000, seed=4)
    n = r.action_counts
    c = cfg.costs
    assert r.avg_cost == (c.c1 * n[1] + c.c2 * n[2] + c.c3 * n[3]) / 100_000


def test_never_transmit():
    cfg = fig5b_config()
    r = simulate(cfg, SrpPolicy(1, 0, 0, 0), 1_000_000, seed=1)
    assert r.avg_cost == 0.0
    assert r.delivery_rate == 0.0
    # the estimate stays at its initial 0, so distortion tends to P{X=1}
    assert within(r.avg_distortion, 0.15 / 0.35, r.stderr_distortion)


def test_every_slot_delivers():
    cfg = dataclasses.replace(fig5b_config(), channel=ChannelModel(0.3, 0.2, 0.9, 1.0))
    r = simulate(cfg, SrpPolicy(0, 0, 0, 1), 500_000, seed=5)
    assert r.delivery_rate == 1.0
    assert r.avg_distortion == 0.0
    assert within(r.avg_age, 0.15 / 0.35, r.stderr_age)


@pytest.mark.slow
@pytest.mark.parametrize(
    "src, pol",
    [
        ((0.15, 0.2), FIG5B_POLICY),
        ((0.9, 0.8), SrpPolicy(0.3, 0.4, 0.0, 0.3)),
        ((0.5, 0.1), SrpPolicy(0.5, 0.1, 0.1, 0.3)),
    ],
)
def test_iid_channel_matches_closed_forms(src, pol):
    cfg = fig5b_config(*src)
    m = srp.evaluate(cfg, pol)
    r = simulate(cfg, pol, 1_000_000, seed=13, channel_memory="iid")
    assert within(r.avg_distortion, m.distortion, r.stderr_distortion)
    assert within(r.avg_age, m.age, r.stderr_age)
    assert within(r.delivery_rate, m.p_s, r.stderr_delivery)
    assert within(r.avg_cost, m.cost, r.stderr_cost)


@pytest.mark.slow
@pytest.mark.parametrize(
    "src, ch, pol",
    [
        ((0.15, 0.2), (0.3, 0.2), FIG5B_POLICY),
        ((0.9, 0.8), (0.05, 0.05), SrpPolicy(0.3, 0.4, 0.0, 0.3)),
        ((0.3, 0.6), (0.6, 0.4), SrpPolicy(0.0, 0.5, 0.0, 0.5)),
    ],
)
def test_markov_channel_matches_exact_chain(src, ch, pol):
    cfg = dataclasses.replace(
        fig5b_config(*src), channel=ChannelModel(ch[0], ch[1], 0.9, 0.6)
    )
    dist, age = exact_system_metrics(*src, *ch, pol.p1, pol.p2, pol.p3, 0.9, 0.6)
    r = simulate(cfg, pol, 1_000_000, seed=17)
    assert within(r.avg_distortion, dist, r.stderr_distortion)
    assert within(r.avg_age, age, r.stderr_age)
    # the mean delivery rate only depends on the channel's stationary law
    assert within(r.delivery_rate, srp.evaluate(cfg, pol).p_s, r.stderr_delivery)


def test_unit_sum_channel_has_no_memory():
    # q01 + q10 = 1 makes both transition rows equal, so the closed forms are exact
    dist, age = exact_system_metrics(0.3, 0.6, 0.6, 0.4, 0.5, 0, 0.5, 0.9, 0.6)
    m = srp.evaluate(
        dataclasses.replace(fig5b_config(0.3, 0.6), channel=ChannelModel(0.6, 0.4, 0.9, 0.6)),
        SrpPolicy(0, 0.5, 0, 0.5),
    )
    assert dist == pytest.approx(m.distortion, abs=1e-9)
    assert age == pytest.approx(m.age, abs=1e-9)


def test_estimate_zero_frequency():
    cfg = fig5b_config(0.9, 0.8)
    r = simulate(cfg, SrpPolicy(0, 0, 0, 1), 400_000, seed=21)
    assert abs(r.xhat0_rate - 0.8 / 1.7) < 0.01


def test_stderr_shrinks_with_slots():
    cfg = fig5b_config()
    small = simulate(cfg, FIG5B_POLICY, 40_000, seed=3)
    big = simulate(cfg, FIG5B_POLICY, 1_000_000, seed=3)
    assert big.stderr_age < small.stderr_age
    assert big.stderr_age == pytest.approx(small.stderr_age / 5, rel=0.5)


def test_batch_runs():
    cfg = fig5b_config()
    one = simulate_batch(cfg, FIG5B_POLICY, 20_000, 1, base_seed=9)
    assert one == [simulate(cfg, FIG5B_POLICY, 20_000, seed=9)]
    serial = simulate_batch(cfg, FIG5B_POLICY, 5_000, 32, base_seed=100)
    again = simulate_batch(cfg, FIG5B_POLICY, 5_000, 32, base_seed=100, workers=4)
    assert serial == again
    assert [r.seed for r in serial] == list(range(100, 132))


@pytest.mark.parametrize(
    "kwargs", [dict(slots=0), dict(slots=10, warmup=-1), dict(slots=10, channel_memory="none")]
)
def test_invalid_arguments(kwargs):
    with pytest.raises(ValueError):
        simulate(fig5b_config(), FIG5B_POLICY, **kwargs)


def test_result_ranges():
    r = simulate(fig5b_config(), FIG5B_POLICY, 10_000, seed=0)
    assert 0 <= r.avg_distortion <= 1
    assert r.to_dict()["action_counts"] == list(r.action_counts)


def _feasible_cases(n, seed=20261015):
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < n:
        cfg = random_config(rng)
        res = solve(cfg)
        if res.optimal and res.p_s >= 0.05:
            cases.append((cfg, res))
    return cases


# 80 checks per test below; 3.5 stderr keeps the chance of a false alarm near 4%
def _z(value, target, stderr):
    return abs(value - target) / stderr if stderr > 0 else (0.0 if value == target else float("inf"))


@pytest.mark.slow
def test_random_optima_iid_channel_vs_closed_forms():
    for k, (cfg, res) in enumerate(_feasible_cases(20)):
        m = res.metrics
        r = simulate(cfg, res.policy, 1_000_000, seed=20261015 + k, channel_memory="iid")
        assert _z(r.avg_distortion, m.distortion, r.stderr_distortion) <= 3.5
        assert _z(r.avg_age, m.age, r.stderr_age) <= 3.5
        assert _z(r.avg_cost, m.cost, r.stderr_cost) <= 3.5
        assert _z(r.delivery_rate, m.p_s, r.stderr_delivery) <= 3.5


@pytest.mark.slow
def test_random_optima_markov_channel_vs_exact_chain():
    for k, (cfg, res) in enumerate(_feasible_cases(20)):
        p, ch = res.policy, cfg.channel
        dist, age = exact_system_metrics(
            cfg.source.p01, cfg.source.p10, ch.p01, ch.p10, p.p1, p.p2, p.p3, ch.p1r, ch.p0p,
            a_max=int(min(600, 40 / res.p_s)),
        )
        r = simulate(cfg, res.policy, 1_000_000, seed=20261015 + k)
        assert _z(r.avg_distortion, dist, r.stderr_distortion) <= 3.5
        assert _z(r.avg_age, age, r.stderr_age) <= 3.5


def test_env_var_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, AOISRP_PURE_PYTHON="1")
    code = "from aoisrp import simulator; print(simulator.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
