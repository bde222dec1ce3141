import numpy as np
import pytest

from lmsr_market import AgentSpec, ConstantBias, Gained, Interval, IntegratorConfig, MarketState, Sinusoid, integrate
from lmsr_market.dynamics import RestKind, classify_rest_point
from lmsr_market.errors import ConfigError
from lmsr_market.experiments import (
    DEFAULTS,
    ExperimentConfig,
    instance_rng,
    interval_population,
    kind_counts,
    run_constant_info_suite,
    run_interval_tracking,
    run_lag_sweep,
    run_lorenz_demo,
    run_multi_asset_mc,
    sample_intervals,
    with_gain,
)
from lmsr_market.signals import Constant

SHORT_LORENZ = {"t_end": 400.0}


class TestConfig:
    def test_defaults_fill_in(self):
        P = ExperimentConfig("lag_sweep", 1, {"reps": 3}).resolved()
        assert P["reps"] == 3
        assert P["alphas"] == list(range(1, 16))

    def test_unknown_param(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("lag_sweep", 1, {"repz": 3}).resolved()

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("nope").resolved()

    def test_resolved_does_not_mutate(self):
        params = {"alphas": [1, 2]}
        ExperimentConfig("lag_sweep", 0, params).resolved()["alphas"].append(3)
        assert params == {"alphas": [1, 2]}
        assert DEFAULTS["lag_sweep"]["alphas"] == list(range(1, 16))


class TestSeeding:
    def test_instance_streams_are_independent_of_order(self):
        a = instance_rng(5, 3).random(4)
        instance_rng(5, 2).random(100)
        assert np.array_equal(a, instance_rng(5, 3).random(4))
        assert not np.array_equal(a, instance_rng(6, 3).random(4))

    def test_intervals_ordered_and_in_range(self):
        rng = instance_rng(0, 0)
        for a, b in sample_intervals(rng, 500, -1.0, 0.0):
            assert -1.0 <= a < b <= 0.0

    def test_population_shape(self):
        pop = interval_population(instance_rng(1, 0), 7, alpha=2.0, nu=1)
        assert sum(a.asset_class == 1 for a in pop) == 7
        assert all(a.characteristic.alpha == 2.0 for a in pop)
        regained = with_gain(pop, 5.0, -1)
        assert [a.characteristic.base_fn for a in regained] == [a.characteristic.base_fn for a in pop]
        assert all(a.characteristic.nu == -1 for a in regained)


class TestLorenzDemo:
    def test_swap_reflects(self):
        cfg = ExperimentConfig("lorenz_demo", 0, SHORT_LORENZ)
        plain = run_lorenz_demo(cfg)
        swapped = run_lorenz_demo(cfg, swap=True)
        for a, b in zip(plain.trajectories, swapped.trajectories):
            assert np.abs(a.p - (1 - b.p)).max() <= 1e-12

    def test_identical_ics_identical_paths(self):
        cfg = ExperimentConfig("lorenz_demo", 0, {**SHORT_LORENZ, "ics": [[1, -1, 1], [1, -1, 1]]})
        res = run_lorenz_demo(cfg)
        assert np.array_equal(res.trajectories[0].prices, res.trajectories[1].prices)


class TestTracking:
    def test_all_covering_interval_rises_inside(self):
        agents = [AgentSpec(1, Gained(Interval(0.0, 1.0)))]
        sig = Sinusoid(1.0, 2 * np.pi / 2000)
        traj = integrate(MarketState([0, 0], 0.01), agents, sig, IntegratorConfig(0.01, 2000.0, 1),
                         record_signal=True)
        inside = (traj.signal_samples[:-1, 0] > 0) & (traj.signal_samples[:-1, 0] < 1)
        dp = np.diff(traj.p)
        buying = inside & (traj.N[:-1] > 0)
        assert buying.any()
        assert np.all(dp[buying] > 0)
        assert np.all(dp[~inside] == 0)

    def test_deterministic(self):
        cfg = ExperimentConfig("interval_tracking", 4, {"t_end": 5000.0})
        a, b = run_interval_tracking(cfg), run_interval_tracking(cfg)
        assert np.array_equal(a.trajectory.prices, b.trajectory.prices)
        assert a.agents == b.agents


class TestLagSweep:
    PARAMS = {"per_class": 5, "alphas": [1, 6], "nus": [-1, 1], "reps": 2, "t_end": 50000.0}

    def test_shape_and_thread_invariance(self):
        cfg = ExperimentConfig("lag_sweep", 2, self.PARAMS)
        one = run_lag_sweep(cfg, threads=1)
        two = run_lag_sweep(cfg, threads=2)
        assert [(s.alpha, s.nu, s.n_reps) for s in one.summaries] == [(1, -1, 2), (1, 1, 2), (6, -1, 2), (6, 1, 2)]
        assert one.summaries == two.summaries
        assert all(s.mean_phase_ratio > 1 for s in one.summaries)

    def test_needs_replications(self):
        with pytest.raises(ConfigError):
            run_lag_sweep(ExperimentConfig("lag_sweep", 0, {**self.PARAMS, "reps": 1}))


class TestConstantInformation:
    def test_binary_suite_converges(self):
        res = run_constant_info_suite(ExperimentConfig("constant_info_suite", 9, {"n_instances": 30}))
        assert kind_counts([r.report for r in res])["NotConverged"] == 0
        assert all(r.monotone_violation <= r.chatter_bound for r in res)

    def test_multi_asset_m2_has_no_unconverged(self):
        res = run_multi_asset_mc(ExperimentConfig("multi_asset_mc", 1, {"n_assets": 2, "n_instances": 40}))
        assert kind_counts([r.report for r in res])["NotConverged"] == 0

    def test_inactive_agents_rest_at_start(self):
        agents = [AgentSpec(j, ConstantBias(-10.0)) for j in range(3) for _ in range(4)]
        traj = integrate(MarketState([0.0, 0.0, 0.0], 0.01), agents, Constant([0.0]), IntegratorConfig(0.01, 300.0, 10))
        r = classify_rest_point(traj, agents)
        assert r.kind == RestKind.INTERIOR_ZERO_DRIFT
        assert r.p_star.p == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_thread_count_does_not_change_results(self):
        cfg = ExperimentConfig("multi_asset_mc", 3, {"n_instances": 12})
        a = run_multi_asset_mc(cfg, threads=1)
        b = run_multi_asset_mc(cfg, threads=3)
        assert [(x.report.kind, x.p_end) for x in a] == [(x.report.kind, x.p_end) for x in b]
