"""Exogenous information sources x(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import IntegrationFault

DEFAULT_OMEGA = 2 * math.pi / 25000


@dataclass(frozen=True)
class Constant:
    value: tuple

    def __post_init__(self):
        object.__setattr__(self, "value", tuple(float(v) for v in np.atleast_1d(self.value)))

    @property
    def dim(self) -> int:
        return len(self.value)

    def sample(self, t: float) -> np.ndarray:
        _check_time(t)
        return np.array(self.value)


@dataclass(frozen=True)
class Sinusoid:
    """Scalar signal ``A * sin(omega * t)``."""

    A: float = 1.0
    omega: float = DEFAULT_OMEGA

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    dim = 1

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def sample(self, t: float) -> np.ndarray:
        _check_time(t)
        return np.array([self.A * math.sin(self.omega * t)])


@dataclass(frozen=True)
class LorenzParams:
    """Time scale ``s`` and the Lorenz constants (sigma_L, rho, alpha_L)."""

    s: float = 0.05
    sigma_L: float = -3.0
    rho: float = 26.5
    alpha_L: float = 1.0


def lorenz_rhs(state, params: LorenzParams = LorenzParams(), form: str = "paper") -> np.ndarray:
    """Vector field of the slowed Lorenz system.

    ``form="paper"`` uses ``ydot = s * x * (rho - z - y)``; ``form="textbook"``
    uses the usual ``ydot = s * (x * (rho - z) - y)``.
    """
    textbook = _form_flag(form)
    x, y, z = (float(v) for v in state)
    return np.array(_kernels._lorenz_rhs(x, y, z, params.s, params.sigma_L, params.rho, params.alpha_L, textbook))


def integrate_lorenz(ic, params: LorenzParams = LorenzParams(), step: float = 0.001, t_end: float = 100.0,
                     form: str = "paper", store_every: int = 1):
    """Classical fixed-step RK4 trace; returns ``(times, states)``.

    Only every ``store_every``-th state is kept, so the stored spacing is
    ``step * store_every``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    n_steps = int(math.ceil(t_end / step - 1e-9))
    n_steps += (-n_steps) % store_every
    ic = np.asarray(ic, dtype=float)
    if ic.shape != (3,) or not np.all(np.isfinite(ic)):
        raise ValueError("Lorenz initial condition must be a finite 3-vector")
    states, fault = _kernels.rk4_lorenz(
        ic, params.s, params.sigma_L, params.rho, params.alpha_L, _form_flag(form), step, n_steps, store_every
    )
    if fault >= 0:
        raise IntegrationFault("non-finite Lorenz state", fault)
    times = np.arange(states.shape[0]) * (step * store_every)
    return times, states


@dataclass(frozen=True, eq=False)
class LorenzTrace:
    """Precomputed Lorenz solution, linearly interpolated between stored samples."""

    ic: tuple
    params: LorenzParams
    step: float
    form: str
    times: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)

    @classmethod
    def compute(cls, ic, t_end: float, params: LorenzParams = LorenzParams(), step: float = 0.001,
                form: str = "paper", store_every: int = 1) -> "LorenzTrace":
        times, samples = integrate_lorenz(ic, params, step, t_end, form, store_every)
        times.setflags(write=False)
        samples.setflags(write=False)
        return cls(tuple(float(v) for v in ic), params, step, form, times, samples)

    dim = 3

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def sample(self, t: float) -> np.ndarray:
        _check_time(t)
        if t > self.horizon * (1 + 1e-12):
            raise ValueError(f"t={t} beyond Lorenz trace horizon {self.horizon}")
        return np.array([np.interp(t, self.times, self.samples[:, d]) for d in range(3)])


Signal = Constant | Sinusoid | LorenzTrace


def sample(signal: Signal, t: float) -> np.ndarray:
    return signal.sample(t)


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError("signal time must be nonnegative")


def _form_flag(form: str) -> bool:
    if form not in ("paper", "textbook"):
        raise ValueError(f"Lorenz form must be 'paper' or 'textbook', got {form!r}")
    return form == "textbook"


def kernel_args(signal: Signal, dim: int):
    """Arguments describing ``signal`` to the compiled Euler kernel."""
    empty = np.zeros((2, max(dim, 1)))
    if isinstance(signal, Constant):
        const = np.zeros(max(dim, signal.dim))
        const[: signal.dim] = signal.value
        return _kernels.SIG_CONSTANT, const, 0.0, 1.0, empty, 1.0
    if isinstance(signal, Sinusoid):
        return _kernels.SIG_SINUSOID, np.zeros(1), float(signal.A), float(signal.omega), empty, 1.0
    if isinstance(signal, LorenzTrace):
        return _kernels.SIG_TABLE, np.zeros(3), 0.0, 1.0, np.ascontiguousarray(signal.samples), signal.spacing
    raise TypeError(f"unsupported signal type {type(signal).__name__}")
