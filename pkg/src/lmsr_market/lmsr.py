"""LMSR pricing: spot prices and trade costs for M >= 2 assets.

Prices are the softmax of ``beta * q`` and costs are differences of the
log-sum-exp potential. Everything is computed with max-subtraction so that
large outstanding quantities never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-12
_SMALL = 16  # below this size, plain Python beats numpy reductions


@dataclass(frozen=True)
class MarketState:
    """Outstanding share quantities ``q`` and liquidity factor ``beta``."""

    q: np.ndarray
    beta: float

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 1 or q.size < 2:
            raise ValueError("MarketState needs a quantity vector with at least two assets")
        # a finite sum implies finite entries; only fall back to the full scan otherwise
        if not math.isfinite(q.sum()) and not np.isfinite(q).all():
            raise ValueError("quantities must be finite")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta}")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def n_assets(self) -> int:
        return self.q.size

    @classmethod
    def from_prices(cls, p, beta: float) -> "MarketState":
        """Quantities (mean zero) whose spot prices equal ``p``; entries of ``p`` must be > 0."""
        p = np.asarray(p, dtype=float)
        if np.any(p <= 0):
            raise ValueError("prices must be strictly positive to invert the softmax")
        logp = np.log(p)
        return cls(q=(logp - logp.mean()) / beta, beta=beta)

    def bought(self, asset: int, dq: float) -> "MarketState":
        q = self.q.copy()
        q[asset] += dq
        return MarketState(q=q, beta=self.beta)


class PriceSimplex:
    """A price vector on the unit simplex."""

    __slots__ = ("p",)

    def __init__(self, p):
        p = np.array(p, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("price vector needs at least two entries")
        if p.size <= _SMALL:
            vals = p.tolist()
            lo, hi, total = min(vals), max(vals), math.fsum(vals)
        else:
            lo, hi, total = float(p.min()), float(p.max()), float(p.sum())
        if lo < 0 or hi > 1:
            raise ValueError(f"prices must lie in [0, 1], got {p}")
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"prices must sum to 1, got sum {total!r}")
        p.setflags(write=False)
        self.p = p

    @classmethod
    def binary(cls, p1: float) -> "PriceSimplex":
        """Binary market with price ``p1`` for asset 1."""
        return cls([1.0 - p1, p1])

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __getitem__(self, i):
        return self.p[i]

    def __len__(self):
        return self.p.size

    def __repr__(self):
        return f"PriceSimplex({self.p.tolist()})"


def _logsumexp(z) -> float:
    if len(z) <= _SMALL:
        zl = z.tolist() if isinstance(z, np.ndarray) else z
        m = max(zl)
        return m + math.log(math.fsum([math.exp(v - m) for v in zl]))
    m = float(z.max())
    return m + math.log(float(np.exp(z - m).sum()))


def softmax(z: np.ndarray) -> np.ndarray:
    if z.size <= _SMALL:
        zl = z.tolist()
        m = max(zl)
        e = [math.exp(v - m) for v in zl]
        total = math.fsum(e)
        return np.array([v / total for v in e])
    e = np.exp(z - z.max())
    return e / e.sum()


def cost_potential(state: MarketState) -> float:
    """LMSR potential ``(1/beta) * log(sum_j exp(beta * q_j))``."""
    return _logsumexp(state.beta * state.q) / state.beta


def spot_prices(state: MarketState) -> PriceSimplex:
    return PriceSimplex(softmax(state.beta * state.q))


def trade_cost(state: MarketState, asset: int, dq: float) -> float:
    """Exact cost of buying ``dq`` shares of ``asset``.

    Algebraically ``cost_potential(after) - cost_potential(before)``, evaluated
    as ``(1/beta) * softplus(log p_asset + log(expm1(beta * dq)))`` so that tiny
    trades keep full relative precision and huge ones do not overflow.
    """
    if not 0 <= asset < state.n_assets:
        raise IndexError(f"asset {asset} out of range for {state.n_assets} assets")
    if dq < 0:
        raise ValueError("dq must be nonnegative (no selling back)")
    if dq == 0:
        return 0.0
    z = [state.beta * v for v in state.q.tolist()] if state.q.size <= _SMALL else state.beta * state.q
    log_p = float(z[asset]) - _logsumexp(z)
    x = state.beta * float(dq)
    if x == 0.0:
        # beta * dq underflowed; first order is exact here
        return math.exp(log_p) * float(dq)
    log_expm1 = math.log(math.expm1(x)) if x < 700 else x + math.log1p(-math.exp(-x))
    t = log_p + log_expm1
    softplus = t + math.log1p(math.exp(-t)) if t > 0 else math.log1p(math.exp(t))
    return softplus / state.beta


def unit_cost_approx(state: MarketState, asset: int) -> float:
    """Small-beta approximation of the one-share cost: the spot price itself."""
    return float(spot_prices(state).p[asset])
