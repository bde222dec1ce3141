"""Self-check harness behind ``lmsr-market validate``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .agents import AgentSpec, ConstantBias
from .analysis import monotone_violation
from .dynamics import IntegratorConfig, classify_rest_point, integrate, RestKind
from .experiments import constant_bias_population, instance_rng
from .lmsr import MarketState, spot_prices, trade_cost
from .signals import Constant


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_simplex(rng, n=2000) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 6))
        st = MarketState(rng.uniform(-1e3, 1e3, M), float(10 ** rng.uniform(-3, 1)))
        p = spot_prices(st).p
        worst = max(worst, abs(p.sum() - 1))
    return CheckResult("simplex", worst <= 1e-12, f"max |sum p - 1| = {worst:.2e}")


def check_translation(rng, n=2000) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 6))
        beta = float(10 ** rng.uniform(-3, 0))
        q = rng.uniform(-50, 50, M)
        c = float(rng.uniform(-100, 100)) / beta
        a = spot_prices(MarketState(q, beta)).p
        b = spot_prices(MarketState(q + c, beta)).p
        worst = max(worst, float(np.abs(a - b).max()))
    return CheckResult("translation invariance", worst <= 1e-12, f"max deviation = {worst:.2e}")


def check_path_independence(rng, n=2000) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        M = int(rng.integers(2, 5))
        st = MarketState(rng.uniform(-20, 20, M), float(10 ** rng.uniform(-3, 0)))
        i = int(rng.integers(M))
        a, b = rng.uniform(0, 5, 2)
        whole = trade_cost(st, i, a + b)
        split = trade_cost(st, i, a) + trade_cost(st.bought(i, a), i, b)
        worst = max(worst, abs(whole - split))
    return CheckResult("path independence", worst <= 1e-12, f"max |whole - split| = {worst:.2e}")


def check_small_beta(rng, n=1000) -> CheckResult:
    worst = 0.0
    for beta in (0.1, 0.01, 0.001):
        for p in rng.uniform(0.01, 0.99, n):
            st = MarketState.from_prices([1 - p, p], beta)
            worst = max(worst, abs(trade_cost(st, 1, 1.0) - p) / beta)
    return CheckResult("small-beta cost", worst <= 1.0, f"max |kappa - p| / beta = {worst:.3f}")


def check_logistic(rng) -> CheckResult:
    beta = 0.01
    agents = [AgentSpec(1, ConstantBias(50.0))]
    traj = integrate(MarketState([0.0, 0.0], beta), agents, Constant([0.0]), IntegratorConfig(0.01, 1000.0, 100))
    exact = 1 / (1 + np.exp(-beta * traj.times))
    err = float(np.abs(traj.p - exact).max())
    return CheckResult("logistic oracle", err <= 1e-3, f"max error = {err:.2e}")


def check_monotone(rng, n=20) -> CheckResult:
    worst, bad = 0.0, 0
    for i in range(n):
        r = instance_rng(int(rng.integers(2**32)), i)
        agents = constant_bias_population(r, 2, (1, 10), (-5, 5))
        traj = integrate(MarketState.from_prices([0.5, 0.5], 0.01), agents, Constant([0.0]),
                         IntegratorConfig(0.01, 5000.0, 1))
        worst = max(worst, monotone_violation(traj) / traj.chatter_bound)
        bad += classify_rest_point(traj, agents).kind == RestKind.NOT_CONVERGED
    return CheckResult("monotone convergence", worst <= 1.0 and bad == 0,
                       f"max violation / chatter bound = {worst:.3f}, not converged = {bad}")


CHECKS = (check_simplex, check_translation, check_path_independence, check_small_beta, check_logistic, check_monotone)


def run_validation(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
