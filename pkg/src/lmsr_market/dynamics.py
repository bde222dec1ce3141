"""Market price dynamics: ODE right-hand sides, Euler integration, rest points.

The integrator advances outstanding quantities rather than prices,
``q_j <- q_j + eps * (number of class-j buyers)``, and recomputes prices from
``q`` every step, so prices stay on the simplex without projection. Near a
discontinuity of the drift the fixed step makes the price chatter across it;
classification of rest points allows for that chatter explicitly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .agents import LOGISTIC, AgentSpec, SigmoidFn, class_sizes, compile_population, drift_counts
from .errors import IntegrationFault
from .lmsr import MarketState, PriceSimplex, softmax
from .signals import Constant, LorenzTrace, Signal, kernel_args

__all__ = [
    "IntegrationFault",
    "IntegratorConfig",
    "RestKind",
    "RestPointReport",
    "Trajectory",
    "classify_rest_point",
    "integrate",
    "rhs_binary",
    "rhs_multi",
]


def rhs_binary(p: float, x, agents: Sequence[AgentSpec], beta: float, sigma: SigmoidFn = LOGISTIC) -> float:
    """``beta * p * (1 - p) * N(x, p)`` for the price ``p`` of asset 1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary price must lie in [0, 1], got {p}")
    counts = drift_counts(agents, x, [1.0 - p, p], sigma)
    return beta * p * (1.0 - p) * float(counts[1] - counts[0])


def rhs_from_rates(p, qdot, beta: float) -> np.ndarray:
    """``pdot_i = sum_j beta * p_i * p_j * (qdot_i - qdot_j)``."""
    p = np.asarray(p, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    return beta * p * (qdot * p.sum() - p @ qdot)


def rhs_multi(p, x, agents: Sequence[AgentSpec], beta: float, sigma: SigmoidFn = LOGISTIC) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return rhs_from_rates(p, drift_counts(agents, x, p, sigma), beta)


@dataclass(frozen=True)
class IntegratorConfig:
    epsilon: float = 0.01
    t_end: float = 5000.0
    record_stride: int = 1
    convergence_window: float = 100.0
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        if self.convergence_window < 10 * self.epsilon:
            raise ValueError("convergence_window must be at least 10 * epsilon")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.epsilon - 1e-9))


@dataclass(eq=False)
class Trajectory:
    """Recorded solution. ``prices[k]`` is the simplex price at ``times[k]``;
    ``drifts[k]`` holds the buyer counts per class used for the step taken there."""

    times: np.ndarray
    prices: np.ndarray
    drifts: np.ndarray | None
    beta: float
    config: IntegratorConfig
    class_sizes: np.ndarray
    signal: Signal | None = field(default=None, repr=False)
    signal_samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_assets(self) -> int:
        return self.prices.shape[1]

    @property
    def p(self) -> np.ndarray:
        """Asset-1 price series (the binary market's ``p``)."""
        return self.prices[:, 1]

    @property
    def N(self) -> np.ndarray:
        """Binary drift: class-1 buyers minus class-0 buyers."""
        if self.drifts is None:
            raise ValueError("trajectory was recorded without drift counts")
        return self.drifts[:, 1] - self.drifts[:, 0]

    @property
    def n_max(self) -> int:
        return int(self.class_sizes.max()) if self.class_sizes.size else 0

    @property
    def chatter_bound(self) -> float:
        """Largest possible price move in one Euler step, ``beta * N_max * eps / 4``."""
        return self.beta * self.n_max * self.config.epsilon / 4

    def price_at(self, k: int) -> PriceSimplex:
        return PriceSimplex(self.prices[k])

    def to_csv(self, path) -> None:
        """Write ``t, p_0.., [n_0.., N], [x_0..]`` with 17 significant digits."""
        M = self.n_assets
        header = ["t"] + [f"p_{j}" for j in range(M)]
        cols = [self.times] + [self.prices[:, j] for j in range(M)]
        int_cols = []
        if self.drifts is not None:
            header += [f"n_{j}" for j in range(M)]
            int_cols = [self.drifts[:, j] for j in range(M)]
            if M == 2:
                header.append("N")
                int_cols.append(self.N)
        x_cols = []
        if self.signal_samples is not None:
            header += [f"x_{d}" for d in range(self.signal_samples.shape[1])]
            x_cols = [self.signal_samples[:, d] for d in range(self.signal_samples.shape[1])]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k in range(self.times.size):
                row = [f"{c[k]:.17g}" for c in cols]
                row += [str(int(c[k])) for c in int_cols]
                row += [f"{c[k]:.17g}" for c in x_cols]
                w.writerow(row)


def _signal_dim(signal: Signal) -> int:
    return signal.dim


def integrate(
    market: MarketState,
    agents: Sequence[AgentSpec],
    signal: Signal,
    config: IntegratorConfig,
    sigma: SigmoidFn = LOGISTIC,
    record_signal: bool = False,
) -> Trajectory:
    """Forward-Euler integration of the market from ``market`` to ``config.t_end``.

    Records every ``record_stride`` steps plus the final state. Raises
    IntegrationFault if the quantities stop being finite.
    """
    M = market.n_assets
    for agent in agents:
        if agent.asset_class >= M:
            raise ValueError(f"agent class {agent.asset_class} does not exist in a {M}-asset market")
    n_steps = config.n_steps
    if isinstance(signal, LorenzTrace) and signal.horizon < n_steps * config.epsilon * (1 - 1e-12):
        raise ValueError(f"Lorenz trace horizon {signal.horizon} shorter than t_end {config.t_end}")
    pop = compile_population(agents)
    x_dim = _signal_dim(signal)
    if pop is not None and pop.signal_dim > x_dim:
        raise ValueError(f"agents read signal component {pop.signal_dim - 1} but the signal has {x_dim}")

    if pop is not None and sigma.code >= 0:
        sig = kernel_args(signal, x_dim)
        times, prices, drifts, xs, status, fault = _kernels.euler_market(
            np.array(market.q, dtype=float), market.beta, config.epsilon, n_steps, config.record_stride,
            pop.cls, pop.kind, pop.L, pop.dim, pop.sign, pop.a, pop.b, pop.alpha, pop.nu, sigma.code,
            *sig, x_dim,
        )
    else:
        times, prices, drifts, xs, status, fault = _euler_python(market, agents, signal, config, sigma)
    if status != _kernels.STATUS_OK:
        raise IntegrationFault("non-finite market state", fault)
    return Trajectory(
        times=times,
        prices=prices,
        drifts=drifts,
        beta=market.beta,
        config=config,
        class_sizes=class_sizes(agents, M),
        signal=signal,
        signal_samples=xs if record_signal else None,
    )


def _euler_python(market, agents, signal, config, sigma):
    """Reference loop used for Custom characteristics or user sigmoids."""
    eps, n_steps, stride = config.epsilon, config.n_steps, config.record_stride
    beta = market.beta
    q = np.array(market.q, dtype=float)
    times, prices, drifts, xs = [], [], [], []
    for k in range(n_steps + 1):
        t = k * eps
        p = softmax(beta * q)
        x = signal.sample(t)
        counts = drift_counts(agents, x, p, sigma)
        if k % stride == 0 or k == n_steps:
            times.append(t)
            prices.append(p)
            drifts.append(counts)
            xs.append(x)
        if k == n_steps:
            break
        q = q + eps * (counts - counts.min())
        with np.errstate(over="ignore"):
            scale = np.abs(beta * q).max()
        if not np.isfinite(scale):
            return np.array(times), np.array(prices), np.array(drifts), np.array(xs), _kernels.STATUS_NONFINITE, k
        if scale > _kernels.RESET_THRESHOLD:
            q = q - q.mean()
    return np.array(times), np.array(prices), np.array(drifts), np.array(xs), _kernels.STATUS_OK, -1


# ---------------------------------------------------------------------------
# rest points


class RestKind(str, Enum):
    BOUNDARY_ASYMPTOTE = "BoundaryAsymptote"
    INTERIOR_ZERO_DRIFT = "InteriorZeroDrift"
    SLIDING_MODE = "SlidingMode"
    NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class RestPointReport:
    kind: RestKind
    p_star: PriceSimplex | None = None
    t_settle: float | None = None
    asset: int | None = None

    def __post_init__(self):
        if self.kind in (RestKind.SLIDING_MODE, RestKind.INTERIOR_ZERO_DRIFT):
            if self.p_star is None or not np.all((self.p_star.p > 0) & (self.p_star.p < 1)):
                raise ValueError(f"{self.kind.value} needs an interior p_star")


def classify_rest_point(
    traj: Trajectory,
    agents: Sequence[AgentSpec],
    sigma: SigmoidFn = LOGISTIC,
    x=None,
) -> RestPointReport:
    """Classify where a constant-information trajectory came to rest.

    Checks, in order: a vertex of the simplex (boundary asymptote); motion
    over the trailing window beyond the settle tolerance (not converged);
    zero drift at the final price; and for binary markets a sign change of
    N across the final price (sliding mode). The settle tolerance is
    ``convergence_tol`` widened by twice the one-step chatter bound.
    """
    cfg = traj.config
    window, tol = cfg.convergence_window, cfg.convergence_tol
    t_end = traj.times[-1]
    if t_end - traj.times[0] < window:
        raise ValueError(f"trajectory spans {t_end - traj.times[0]}, shorter than convergence window {window}")
    if x is None:
        x = traj.signal.sample(t_end)
    beta = traj.beta
    settle_tol = tol + 2 * traj.chatter_bound
    p_end = traj.prices[-1]
    k_window = int(np.searchsorted(traj.times, t_end - window * (1 + 1e-12)))
    moved = float(np.abs(p_end - traj.prices[k_window]).max())

    j = int(np.argmax(p_end))
    if p_end[j] >= 1 - tol:
        rate = rhs_multi(p_end, x, agents, beta, sigma)
        if rate[j] >= 0:
            vertex = np.zeros_like(p_end)
            vertex[j] = 1.0
            return RestPointReport(RestKind.BOUNDARY_ASYMPTOTE, PriceSimplex(vertex),
                                   _settle_time(traj, vertex, tol), asset=j)

    if moved > settle_tol:
        return RestPointReport(RestKind.NOT_CONVERGED)

    counts = drift_counts(agents, x, p_end, sigma)
    p_mean = traj.prices[k_window:].mean(axis=0)
    p_mean = p_mean / p_mean.sum()
    if traj.n_assets == 2:
        p1 = p_end[1]
        below = _binary_N(agents, x, max(p1 - settle_tol, 0.0), sigma)
        above = _binary_N(agents, x, min(p1 + settle_tol, 1.0), sigma)
        # an isolated zero of N (the path landed exactly on the switching price) is still a sliding point
        if below > 0 and above < 0:
            return RestPointReport(RestKind.SLIDING_MODE, PriceSimplex(p_mean), _settle_time(traj, p_mean, settle_tol))
    if np.all(counts == counts[0]):
        return RestPointReport(RestKind.INTERIOR_ZERO_DRIFT, PriceSimplex(p_end), _settle_time(traj, p_end, settle_tol))
    if traj.n_assets == 2:
        return RestPointReport(RestKind.NOT_CONVERGED)
    # M > 2: stationary within the chatter band while the drift is nonzero means
    # the state is pinned on a discontinuity surface.
    return RestPointReport(RestKind.SLIDING_MODE, PriceSimplex(p_mean), _settle_time(traj, p_mean, settle_tol))


def _binary_N(agents, x, p1, sigma) -> int:
    c = drift_counts(agents, x, [1.0 - p1, p1], sigma)
    return int(c[1] - c[0])


def _settle_time(traj: Trajectory, p_ref: np.ndarray, band: float) -> float:
    """First recorded time after which the price stays within ``band`` of ``p_ref``."""
    dev = np.abs(traj.prices - p_ref).max(axis=1)
    outside = np.nonzero(dev > band)[0]
    if outside.size == 0:
        return float(traj.times[0])
    last = outside[-1]
    return float(traj.times[min(last + 1, traj.times.size - 1)])
