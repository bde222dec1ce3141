"""Phase-lag measurement at a single frequency, monotonicity and replication statistics.

Phase convention: the series is projected onto ``exp(-i*omega*t)``, so
``sin(omega*t)`` has phase ``-pi/2`` and ``cos(omega*t)`` has phase 0. Lags are
``(-phase) mod 2*pi``, i.e. measured behind ``cos(omega*t)``; a pure
``sin(omega*t)`` input therefore has lag ``pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .errors import DegenerateMeasurement

PHASE_CONVENTION = (
    "projection onto exp(-i*omega*t) over whole periods after mean removal; "
    "lag = (-phase) mod 2pi, measured behind cos(omega*t); sin(omega*t) has lag pi/2"
)


@dataclass(frozen=True)
class PhaseResult:
    phase: float
    amplitude: float
    omega: float

    @property
    def lag(self) -> float:
        """Nonnegative lag in [0, 2*pi)."""
        lag = (-self.phase) % (2 * math.pi)
        return 0.0 if lag >= 2 * math.pi else lag


@dataclass(frozen=True)
class SweepSummary:
    alpha: float
    nu: int
    mean_phase_ratio: float
    ci_halfwidth: float
    n_reps: int
    n_degenerate: int = 0


def whole_period_length(n: int, dt: float, omega: float) -> int:
    """Number of leading samples spanning the largest whole number of periods."""
    period = 2 * math.pi / omega
    k = math.floor(n * dt / period + 1e-9)
    if k < 1:
        raise ValueError(f"series covers {n * dt:g} time units, less than one period {period:g}")
    return min(n, int(round(k * period / dt)))


def dft_phase(series, dt: float, omega: float, t0: float = 0.0) -> PhaseResult:
    """Phase and amplitude of ``series`` at angular frequency ``omega``.

    Samples are taken at ``t0 + k*dt``. The series is truncated to whole
    periods and its mean removed; amplitude is scaled so that ``A*sin`` gives ``A``.
    """
    x = np.asarray(series, dtype=float)
    n = whole_period_length(x.size, dt, omega)
    x = x[:n] - x[:n].mean()
    t = t0 + dt * np.arange(n)
    coef = 2.0 / n * np.sum(x * np.exp(-1j * omega * t))
    amp = float(abs(coef))
    scale = float(np.abs(x).max()) if n else 0.0
    if amp <= 1e-12 * max(scale, 1.0):
        return PhaseResult(0.0, 0.0, omega)
    phase = float(np.angle(coef))
    if phase <= -math.pi:
        phase += 2 * math.pi
    return PhaseResult(phase, amp, omega)


def phase_ratio(p_series, x_series, dt: float, omega: float, t0: float = 0.0, min_amplitude: float = 1e-9) -> float:
    """Lag of the price divided by lag of the information, both at ``omega``."""
    p_series = np.asarray(p_series, dtype=float)
    x_series = np.asarray(x_series, dtype=float)
    if p_series.shape != x_series.shape:
        raise ValueError("price and information series must have the same length")
    ph_p = dft_phase(p_series, dt, omega, t0)
    ph_x = dft_phase(x_series, dt, omega, t0)
    if ph_p.amplitude <= min_amplitude or ph_x.amplitude <= min_amplitude:
        raise DegenerateMeasurement(
            f"no energy at omega={omega:g} (price amplitude {ph_p.amplitude:g}, signal amplitude {ph_x.amplitude:g})"
        )
    if ph_x.lag == 0.0:
        raise DegenerateMeasurement("information series has zero lag; ratio undefined")
    return ph_p.lag / ph_x.lag


def monotone_violation(traj_or_series, tol: float = 0.0) -> float:
    """Largest single move against the net direction of a binary price series.

    The net direction is the sign of ``p_end - p_0``; when that is within
    ``tol`` of zero the series counts as flat and every move is a violation.
    """
    p = getattr(traj_or_series, "p", traj_or_series)
    p = np.asarray(p, dtype=float)
    if p.size < 2:
        return 0.0
    d = np.diff(p)
    net = p[-1] - p[0]
    if abs(net) <= tol:
        return float(np.abs(d).max())
    against = -d if net > 0 else d
    return float(max(against.max(), 0.0))


def total_variation(series) -> float:
    return float(np.abs(np.diff(np.asarray(series, dtype=float))).sum())


def mean_ci(samples, confidence: float = 0.95) -> tuple[float, float]:
    """Student-t confidence interval on the mean: ``(mean, halfwidth)``."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples for a confidence interval")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    q = stats.t.ppf(0.5 + confidence / 2, df=x.size - 1)
    return mean, float(q * sd / math.sqrt(x.size))


def zero_drift_runs(times, N) -> list[tuple[float, float]]:
    """Maximal time intervals over which the recorded drift is zero."""
    times = np.asarray(times)
    zero = np.asarray(N) == 0
    runs = []
    k = 0
    while k < zero.size:
        if zero[k]:
            j = k
            while j + 1 < zero.size and zero[j + 1]:
                j += 1
            end = times[j + 1] if j + 1 < times.size else times[j]
            runs.append((float(times[k]), float(end)))
            k = j + 1
        else:
            k += 1
    return runs


def count_reversals(series, min_swing: float) -> int:
    """Number of direction reversals whose peak-to-trough swing exceeds ``min_swing``.

    Swings smaller than ``min_swing`` are absorbed into the current leg (a
    zigzag filter), so chatter below the threshold never counts.
    """
    x = np.ascontiguousarray(series, dtype=float)
    return int(_kernels.zigzag_reversals(x, float(min_swing)))
