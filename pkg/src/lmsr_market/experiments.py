"""Seeded reproductions of the market experiments.

Every experiment takes an :class:`ExperimentConfig` whose ``params`` override
the defaults in :data:`DEFAULTS`. Randomness is drawn from per-instance
streams keyed by ``(seed, instance index)``, so results do not depend on the
order in which instances run or on the number of worker threads.
"""

from __future__ import annotations

import copy
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .agents import LOGISTIC, AgentSpec, ConstantBias, Coordinate, Gained, Interval, SigmoidFn
from .analysis import (
    PHASE_CONVENTION,
    SweepSummary,
    count_reversals,
    mean_ci,
    monotone_violation,
    phase_ratio,
    zero_drift_runs,
)
from .dynamics import IntegratorConfig, RestKind, RestPointReport, Trajectory, classify_rest_point, integrate
from .errors import ConfigError, DegenerateMeasurement
from .lmsr import MarketState
from .signals import DEFAULT_OMEGA, Constant, LorenzParams, LorenzTrace, Sinusoid

log = logging.getLogger(__name__)

KINDS = ("constant_info_suite", "lorenz_demo", "interval_tracking", "lag_sweep", "multi_asset_mc")

DEFAULTS: dict[str, dict[str, Any]] = {
    "constant_info_suite": dict(
        n_instances=1000, beta=0.01, epsilon=0.01, t_end=5000.0, class_size_range=[0, 10],
        L_range=[-5.0, 5.0], p0_range=[0.02, 0.98], record_stride=1,
        convergence_window=100.0, convergence_tol=1e-6,
    ),
    "lorenz_demo": dict(
        ics=[[1.0, -1.0, 1.0], [1.01, -1.0, 1.0]], beta=0.01, epsilon=0.01, t_end=3000.0,
        lorenz={"s": 0.05, "sigma_L": -3.0, "rho": 26.5, "alpha_L": 1.0}, lorenz_form="textbook",
        record_stride=10,
    ),
    "interval_tracking": dict(
        per_class=5, amplitude=1.0, omega=DEFAULT_OMEGA, beta=0.01, epsilon=0.01, t_end=75000.0,
        alpha=1.0, nu=0, record_stride=100,
    ),
    "lag_sweep": dict(
        per_class=125, alphas=list(range(1, 16)), nus=[-1, 0, 1], reps=5, amplitude=1.0,
        omega=DEFAULT_OMEGA, beta=0.01, epsilon=0.01, t_end=75000.0, burn_in_periods=1,
        record_stride=100, confidence=0.95,
    ),
    "multi_asset_mc": dict(
        n_assets=3, n_instances=3000, L_range=[-2.0, 2.0], class_size_range=[1, 10], beta=0.01,
        epsilon=0.01, t_end=5000.0, record_stride=100, burn_in_fraction=0.1,
        convergence_window=100.0, convergence_tol=1e-6, max_reversals=2,
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        unknown = set(self.params) - set(DEFAULTS[self.kind])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.kind}: {sorted(unknown)}")

    def resolved(self) -> dict[str, Any]:
        """Defaults with overrides applied."""
        out = copy.deepcopy(DEFAULTS[self.kind])
        out.update(copy.deepcopy(self.params))
        return out


def instance_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for one instance, derived from the run seed and its index."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _map(fn: Callable, items: Sequence, threads: int | None) -> list:
    """Map in parallel (the integration kernel releases the GIL); order-preserving."""
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sample_intervals(rng: np.random.Generator, n: int, lo: float, hi: float) -> list[tuple[float, float]]:
    """``n`` intervals with endpoints uniform on [lo, hi], redrawn until a < b."""
    out = []
    while len(out) < n:
        a, b = rng.uniform(lo, hi, size=2)
        if a < b:
            out.append((float(a), float(b)))
    return out


def interval_population(rng: np.random.Generator, per_class: int, alpha: float = 1.0, nu: int = 0) -> list[AgentSpec]:
    """Class-1 agents on intervals inside [0, 1], class-0 agents inside [-1, 0]."""
    agents = []
    for cls, (lo, hi) in ((1, (0.0, 1.0)), (0, (-1.0, 0.0))):
        for a, b in sample_intervals(rng, per_class, lo, hi):
            base = Interval(a, b)
            ch = base if (alpha == 1.0 and nu == 0) else Gained(base, alpha=alpha, nu=nu)
            agents.append(AgentSpec(cls, ch))
    return agents


def with_gain(agents: Sequence[AgentSpec], alpha: float, nu: int) -> list[AgentSpec]:
    out = []
    for ag in agents:
        ch = ag.characteristic
        base = ch.base_fn if isinstance(ch, Gained) else ch
        out.append(AgentSpec(ag.asset_class, Gained(base, alpha=alpha, nu=nu)))
    return out


def constant_bias_population(rng: np.random.Generator, n_assets: int, size_range, L_range) -> list[AgentSpec]:
    lo, hi = size_range
    agents = []
    for j in range(n_assets):
        for _ in range(int(rng.integers(lo, hi + 1))):
            agents.append(AgentSpec(j, ConstantBias(float(rng.uniform(*L_range)))))
    return agents


# ---------------------------------------------------------------------------
# constant information, binary market


@dataclass
class ConstantInfoInstance:
    index: int
    agents: list[AgentSpec]
    p0: float
    report: RestPointReport
    monotone_violation: float
    chatter_bound: float


def run_constant_info_suite(config: ExperimentConfig, threads: int | None = None) -> list[ConstantInfoInstance]:
    """Random constant-information binary markets, each integrated and classified."""
    P = config.resolved()
    icfg = IntegratorConfig(P["epsilon"], P["t_end"], P["record_stride"], P["convergence_window"], P["convergence_tol"])

    def one(i: int) -> ConstantInfoInstance:
        rng = instance_rng(config.seed, i)
        agents: list[AgentSpec] = []
        while not agents:
            agents = constant_bias_population(rng, 2, P["class_size_range"], P["L_range"])
        p0 = float(rng.uniform(*P["p0_range"]))
        market = MarketState.from_prices([1 - p0, p0], P["beta"])
        traj = integrate(market, agents, Constant([0.0]), icfg)
        return ConstantInfoInstance(
            i, agents, p0, classify_rest_point(traj, agents), monotone_violation(traj), traj.chatter_bound
        )

    return _map(one, range(P["n_instances"]), threads)


# ---------------------------------------------------------------------------
# Lorenz-driven market


@dataclass
class LorenzDemoResult:
    trajectories: list[Trajectory]
    traces: list[LorenzTrace]


def lorenz_agents(swap: bool = False) -> list[AgentSpec]:
    """One agent per class reading the first Lorenz coordinate with opposite signs."""
    s = -1 if swap else 1
    return [AgentSpec(1, Coordinate(0, s)), AgentSpec(0, Coordinate(0, -s))]


def run_lorenz_demo(config: ExperimentConfig, swap: bool = False) -> LorenzDemoResult:
    P = config.resolved()
    params = LorenzParams(**P["lorenz"])
    eps = P["epsilon"]
    icfg = IntegratorConfig(eps, P["t_end"], P["record_stride"], convergence_window=max(100.0, 10 * eps))
    trajs, traces = [], []
    for ic in P["ics"]:
        trace = LorenzTrace.compute(ic, P["t_end"], params, step=eps / 10, form=P["lorenz_form"], store_every=10)
        market = MarketState(np.zeros(2), P["beta"])
        trajs.append(integrate(market, lorenz_agents(swap), trace, icfg, record_signal=True))
        traces.append(trace)
    return LorenzDemoResult(trajs, traces)


# ---------------------------------------------------------------------------
# interval agents tracking a sinusoid


@dataclass
class TrackingResult:
    trajectory: Trajectory
    agents: list[AgentSpec]

    @property
    def zero_drift_runs(self) -> list[tuple[float, float]]:
        return zero_drift_runs(self.trajectory.times, self.trajectory.N)


def run_interval_tracking(config: ExperimentConfig) -> TrackingResult:
    P = config.resolved()
    if P["per_class"] < 1:
        raise ConfigError("per_class must be at least 1")
    rng = instance_rng(config.seed, 0)
    agents = interval_population(rng, P["per_class"], P["alpha"], P["nu"])
    icfg = IntegratorConfig(P["epsilon"], P["t_end"], P["record_stride"])
    market = MarketState(np.zeros(2), P["beta"])
    traj = integrate(market, agents, Sinusoid(P["amplitude"], P["omega"]), icfg, record_signal=True)
    return TrackingResult(traj, agents)


# ---------------------------------------------------------------------------
# phase-lag sweep over input gain and price sensitivity


@dataclass
class SweepResult:
    summaries: list[SweepSummary]
    ratios: dict[tuple[float, int], list[float]]
    n_degenerate: int


def lag_run(agents, P, alpha: float, nu: int) -> float:
    """Phase ratio of one market run, measured after the burn-in periods."""
    sig = Sinusoid(P["amplitude"], P["omega"])
    icfg = IntegratorConfig(P["epsilon"], P["t_end"], P["record_stride"])
    traj = integrate(MarketState(np.zeros(2), P["beta"]), with_gain(agents, alpha, nu), sig, icfg, record_signal=True)
    dt = P["record_stride"] * P["epsilon"]
    k0 = int(round(P["burn_in_periods"] * sig.period / dt))
    return phase_ratio(traj.p[k0:], traj.signal_samples[k0:, 0], dt, sig.omega, t0=float(traj.times[k0]))


def run_lag_sweep(config: ExperimentConfig, threads: int | None = None, progress: Callable | None = None) -> SweepResult:
    """Mean phase ratio with a t-interval for every (alpha, nu) cell.

    Replication ``r`` uses the same random intervals in every cell (common
    random numbers), so differences between cells are not masked by
    population noise.
    """
    P = config.resolved()
    if P["reps"] < 2:
        raise ConfigError("lag sweep needs at least 2 replications")
    period = 2 * math.pi / P["omega"]
    if P["t_end"] < (P["burn_in_periods"] + 1) * period * (1 - 1e-9):
        raise ConfigError(f"t_end={P['t_end']} leaves less than one signal period after burn-in (period {period:g})")
    alphas = [float(a) for a in P["alphas"]]
    nus = [int(v) for v in P["nus"]]
    pops = [interval_population(instance_rng(config.seed, r), P["per_class"]) for r in range(P["reps"])]
    jobs = [(ai, vi, r) for ai in range(len(alphas)) for vi in range(len(nus)) for r in range(P["reps"])]

    def one(job):
        ai, vi, r = job
        try:
            out = lag_run(pops[r], P, alphas[ai], nus[vi])
        except DegenerateMeasurement as exc:
            log.warning("degenerate phase measurement alpha=%g nu=%d rep=%d: %s", alphas[ai], nus[vi], r, exc)
            out = None
        if progress is not None:
            progress(job)
        return out

    results = _map(one, jobs, threads)
    ratios: dict[tuple[float, int], list[float]] = {(a, v): [] for a in alphas for v in nus}
    degenerate = {(a, v): 0 for a in alphas for v in nus}
    for (ai, vi, _), val in zip(jobs, results):
        key = (alphas[ai], nus[vi])
        if val is None:
            degenerate[key] += 1
        else:
            ratios[key].append(val)
    summaries = []
    for a in alphas:
        for v in nus:
            vals = ratios[(a, v)]
            if len(vals) >= 2:
                mean, hw = mean_ci(vals, P["confidence"])
            else:
                mean, hw = (vals[0] if vals else math.nan), math.nan
            summaries.append(SweepSummary(a, v, mean, hw, len(vals), degenerate[(a, v)]))
    return SweepResult(summaries, ratios, sum(degenerate.values()))


# ---------------------------------------------------------------------------
# M-asset constant-information Monte Carlo


@dataclass
class MultiAssetInstance:
    index: int
    class_sizes: list[int]
    report: RestPointReport
    oscillating: bool
    max_reversals: int
    p_end: list[float]


def oscillation_reversals(traj: Trajectory, burn_in_fraction: float) -> int:
    """Largest zigzag reversal count over price coordinates after the burn-in.

    Swings count only if they exceed ``10 * convergence_tol`` plus twice the
    one-step chatter bound, so chatter on a discontinuity surface is ignored.
    """
    t_cut = burn_in_fraction * traj.times[-1]
    k0 = int(np.searchsorted(traj.times, t_cut))
    swing = 10 * traj.config.convergence_tol + 2 * traj.chatter_bound
    return max(count_reversals(traj.prices[k0:, j], swing) for j in range(traj.n_assets))


def run_multi_asset_mc(config: ExperimentConfig, threads: int | None = None) -> list[MultiAssetInstance]:
    P = config.resolved()
    M = int(P["n_assets"])
    if M < 2:
        raise ConfigError("n_assets must be at least 2")
    icfg = IntegratorConfig(P["epsilon"], P["t_end"], P["record_stride"], P["convergence_window"], P["convergence_tol"])

    def one(i: int) -> MultiAssetInstance:
        rng = instance_rng(config.seed, i)
        agents = constant_bias_population(rng, M, P["class_size_range"], P["L_range"])
        traj = integrate(MarketState(np.zeros(M), P["beta"]), agents, Constant([0.0]), icfg)
        rev = oscillation_reversals(traj, P["burn_in_fraction"])
        return MultiAssetInstance(
            i,
            [int(c) for c in traj.class_sizes],
            classify_rest_point(traj, agents),
            rev > P["max_reversals"],
            rev,
            traj.prices[-1].tolist(),
        )

    return _map(one, range(P["n_instances"]), threads)


def kind_counts(reports: Sequence[RestPointReport]) -> dict[str, int]:
    counts = {k.value: 0 for k in RestKind}
    for r in reports:
        counts[r.kind.value] += 1
    return counts


CONVENTIONS = {
    "phase": PHASE_CONVENTION,
    "lorenz_form": "paper: ydot = s*x*(rho - z - y); textbook: ydot = s*(x*(rho - z) - y)",
    "price_sensitivity": "psi = alpha * (base + nu * (p_own - 1/2)), p_own = price of the agent's asset",
    "seeding": "numpy SeedSequence(seed, spawn_key=(instance,)) per instance",
    "settle_tolerance": "convergence_tol + 2 * beta * N_max * epsilon / 4",
}
