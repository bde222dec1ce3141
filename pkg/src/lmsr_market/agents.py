"""Agent populations: characteristic functions, valuations and purchase decisions.

An agent specialises in one asset class. It values its asset at
``sigma(psi(x, p))`` and buys one share whenever that valuation strictly
exceeds the asset's spot price (the small-beta one-share cost).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

# ---------------------------------------------------------------------------
# squashing maps


def logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _tanh01(z: float) -> float:
    return 0.5 * (1.0 + math.tanh(z))


def _clipped_linear(z: float) -> float:
    return min(1.0, max(0.0, 0.5 * (z + 1.0)))


# Codes understood by the compiled integration kernel.
SIGMOID_CODES = {"logistic": 0, "tanh": 1, "clipped_linear": 2}
_NAMED = {"logistic": logistic, "tanh": _tanh01, "clipped_linear": _clipped_linear}


@dataclass(frozen=True)
class SigmoidFn:
    """A nondecreasing map from the reals into [0, 1].

    Use :meth:`named` for the built-in maps; passing an arbitrary callable is
    allowed but forces the slow pure-Python integration path.
    """

    name: str
    fn: Callable[[float], float] = field(repr=False, compare=False)

    def __post_init__(self):
        grid = np.linspace(-50.0, 50.0, 2001)
        vals = np.array([self.fn(float(z)) for z in grid])
        if np.any(vals < 0) or np.any(vals > 1) or not np.all(np.isfinite(vals)):
            raise ValueError(f"sigmoid {self.name!r} leaves [0, 1]")
        if np.any(np.diff(vals) < 0):
            raise ValueError(f"sigmoid {self.name!r} is not monotone nondecreasing")

    @classmethod
    def named(cls, name: str = "logistic") -> "SigmoidFn":
        try:
            return cls(name, _NAMED[name])
        except KeyError:
            raise ValueError(f"unknown sigmoid {name!r}; choose from {sorted(_NAMED)}") from None

    @property
    def code(self) -> int:
        if self.name in SIGMOID_CODES and self.fn is _NAMED[self.name]:
            return SIGMOID_CODES[self.name]
        return -1

    def __call__(self, z: float) -> float:
        return self.fn(z)


LOGISTIC = SigmoidFn.named("logistic")

# ---------------------------------------------------------------------------
# characteristic functions


@dataclass(frozen=True)
class ConstantBias:
    L: float

    def base(self, x: np.ndarray) -> float:
        return float(self.L)


@dataclass(frozen=True)
class Coordinate:
    dim: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("Coordinate sign must be +1 or -1")
        if self.dim < 0:
            raise ValueError("Coordinate dim must be nonnegative")

    def base(self, x: np.ndarray) -> float:
        if self.dim >= x.size:
            raise ValueError(f"signal has {x.size} components, agent reads component {self.dim}")
        return float(self.sign * x[self.dim])


@dataclass(frozen=True)
class Interval:
    """+1 while the first signal component lies strictly inside (a, b), else -1."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got ({self.a}, {self.b})")

    def base(self, x: np.ndarray) -> float:
        if x.size < 1:
            raise ValueError("interval agents need a nonempty signal")
        return 1.0 if self.a < x[0] < self.b else -1.0


@dataclass(frozen=True)
class Custom:
    """User-supplied ``psi(x, p_own)``. Not used by the shipped experiments."""

    fn: Callable[[np.ndarray, float], float] = field(compare=False)
    name: str = "custom"

    def base(self, x: np.ndarray) -> float:
        raise TypeError("Custom characteristics are evaluated through eval_psi")


BaseFn = Union[ConstantBias, Coordinate, Interval]


@dataclass(frozen=True)
class Gained:
    """Gain ``alpha`` and price sensitivity ``nu`` around a base characteristic.

    ``psi = alpha * (base(x) + nu * (p_own - 1/2))`` where ``p_own`` is the
    price of the agent's own asset. For a binary market this is
    ``nu * (p - 1/2)`` for class 1 and ``nu * (1/2 - p)`` for class 0.
    """

    base_fn: BaseFn
    alpha: float = 1.0
    nu: int = 0

    def __post_init__(self):
        if not isinstance(self.base_fn, (ConstantBias, Coordinate, Interval)):
            raise TypeError("Gained wraps a ConstantBias, Coordinate or Interval characteristic")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.nu not in (-1, 0, 1):
            raise ValueError(f"nu must be -1, 0 or 1, got {self.nu}")

    def base(self, x: np.ndarray) -> float:
        return self.base_fn.base(x)


CharacteristicFn = Union[ConstantBias, Coordinate, Interval, Gained, Custom]


@dataclass(frozen=True)
class AgentSpec:
    asset_class: int
    characteristic: CharacteristicFn

    def __post_init__(self):
        if self.asset_class < 0:
            raise ValueError("asset_class must be nonnegative")
        ch = self.characteristic
        iv = ch.base_fn if isinstance(ch, Gained) else ch
        if isinstance(iv, Interval):
            if self.asset_class == 1 and not (iv.a >= 0 and iv.b <= 1):
                raise ValueError(f"class-1 interval must sit inside [0, 1], got ({iv.a}, {iv.b})")
            if self.asset_class == 0 and not (iv.a >= -1 and iv.b <= 0):
                raise ValueError(f"class-0 interval must sit inside [-1, 0], got ({iv.a}, {iv.b})")


def eval_psi(agent: AgentSpec, x, p) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p_own = float(np.asarray(p, dtype=float)[agent.asset_class])
    ch = agent.characteristic
    if isinstance(ch, Custom):
        return float(ch.fn(x, p_own))
    if isinstance(ch, Gained):
        return ch.alpha * (ch.base(x) + ch.nu * (p_own - 0.5))
    return ch.base(x)


def purchase_decision(agent: AgentSpec, x, p, sigma: SigmoidFn = LOGISTIC) -> int:
    """1 iff ``sigma(psi) > p_own`` strictly (the unit step is 0 at 0)."""
    p_own = float(np.asarray(p, dtype=float)[agent.asset_class])
    return int(sigma(eval_psi(agent, x, p)) > p_own)


def drift_counts(agents: Sequence[AgentSpec], x, p, sigma: SigmoidFn = LOGISTIC) -> np.ndarray:
    """Number of buyers per asset class at information ``x`` and prices ``p``."""
    p = np.asarray(p, dtype=float)
    counts = np.zeros(p.size, dtype=np.int64)
    for agent in agents:
        if agent.asset_class >= p.size:
            raise ValueError(f"agent class {agent.asset_class} does not exist in a {p.size}-asset market")
        counts[agent.asset_class] += purchase_decision(agent, x, p, sigma)
    return counts


def binary_drift(agents: Sequence[AgentSpec], x, p1: float, sigma: SigmoidFn = LOGISTIC) -> int:
    """N(x, p): class-1 buyers minus class-0 buyers at asset-1 price ``p1``."""
    c = drift_counts(agents, x, [1.0 - p1, p1], sigma)
    return int(c[1] - c[0])


def class_sizes(agents: Sequence[AgentSpec], n_assets: int) -> np.ndarray:
    return np.bincount([a.asset_class for a in agents], minlength=n_assets)[:n_assets]


# ---------------------------------------------------------------------------
# compiled form for the integration kernel

KIND_CONSTANT, KIND_COORDINATE, KIND_INTERVAL = 0, 1, 2


@dataclass(frozen=True)
class PopulationArrays:
    """Flat per-agent arrays; ``psi = alpha * (base + nu * (p_own - 1/2))``."""

    cls: np.ndarray
    kind: np.ndarray
    L: np.ndarray
    dim: np.ndarray
    sign: np.ndarray
    a: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    nu: np.ndarray

    @property
    def signal_dim(self) -> int:
        used = self.dim[self.kind == KIND_COORDINATE]
        if np.any(self.kind == KIND_INTERVAL):
            used = np.append(used, 0)
        return int(used.max()) + 1 if used.size else 0


def compile_population(agents: Sequence[AgentSpec]) -> PopulationArrays | None:
    """Flatten a population into arrays, or None if it holds Custom agents."""
    n = len(agents)
    arr = dict(
        cls=np.zeros(n, np.int64),
        kind=np.zeros(n, np.int64),
        L=np.zeros(n),
        dim=np.zeros(n, np.int64),
        sign=np.ones(n),
        a=np.zeros(n),
        b=np.zeros(n),
        alpha=np.ones(n),
        nu=np.zeros(n),
    )
    for i, agent in enumerate(agents):
        ch = agent.characteristic
        if isinstance(ch, Custom):
            return None
        if isinstance(ch, Gained):
            arr["alpha"][i] = ch.alpha
            arr["nu"][i] = ch.nu
            ch = ch.base_fn
        arr["cls"][i] = agent.asset_class
        if isinstance(ch, ConstantBias):
            arr["kind"][i] = KIND_CONSTANT
            arr["L"][i] = ch.L
        elif isinstance(ch, Coordinate):
            arr["kind"][i] = KIND_COORDINATE
            arr["dim"][i] = ch.dim
            arr["sign"][i] = ch.sign
        else:
            arr["kind"][i] = KIND_INTERVAL
            arr["a"][i] = ch.a
            arr["b"][i] = ch.b
    return PopulationArrays(**arr)


# ---------------------------------------------------------------------------
# JSON documents: list of {"class", "kind", "params"}


def _base_to_dict(ch) -> dict:
    if isinstance(ch, ConstantBias):
        return {"kind": "constant", "params": {"L": ch.L}}
    if isinstance(ch, Coordinate):
        return {"kind": "coordinate", "params": {"dim": ch.dim, "sign": ch.sign}}
    if isinstance(ch, Interval):
        return {"kind": "interval", "params": {"a": ch.a, "b": ch.b}}
    if isinstance(ch, Gained):
        return {
            "kind": "gained",
            "params": {"base": _base_to_dict(ch.base_fn), "alpha": ch.alpha, "nu": ch.nu},
        }
    raise TypeError(f"{type(ch).__name__} characteristics cannot be serialised")


def _base_from_dict(d: dict):
    kind, params = d["kind"], d.get("params", {})
    if kind == "constant":
        return ConstantBias(L=float(params["L"]))
    if kind == "coordinate":
        return Coordinate(dim=int(params["dim"]), sign=int(params.get("sign", 1)))
    if kind == "interval":
        return Interval(a=float(params["a"]), b=float(params["b"]))
    if kind == "gained":
        return Gained(
            _base_from_dict(params["base"]),
            alpha=float(params.get("alpha", 1.0)),
            nu=int(params.get("nu", 0)),
        )
    raise ValueError(f"unknown characteristic kind {kind!r}")


def agent_to_dict(agent: AgentSpec) -> dict:
    return {"class": agent.asset_class, **_base_to_dict(agent.characteristic)}


def agent_from_dict(d: dict) -> AgentSpec:
    return AgentSpec(int(d["class"]), _base_from_dict(d))


def agents_to_json(agents: Sequence[AgentSpec]) -> list[dict]:
    return [agent_to_dict(a) for a in agents]


def agents_from_json(docs: Sequence[dict]) -> list[AgentSpec]:
    return [agent_from_dict(d) for d in docs]
