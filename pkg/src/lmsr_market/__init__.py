"""Continuous-time LMSR option markets driven by exogenous information."""

__version__ = "0.1.0"

from .lmsr import MarketState, PriceSimplex, cost_potential, spot_prices, trade_cost, unit_cost_approx
from .agents import (
    AgentSpec,
    ConstantBias,
    Coordinate,
    Custom,
    Gained,
    Interval,
    SigmoidFn,
    drift_counts,
    eval_psi,
    purchase_decision,
)
from .signals import Constant, LorenzParams, LorenzTrace, Sinusoid
from .dynamics import (
    IntegrationFault,
    IntegratorConfig,
    RestPointReport,
    Trajectory,
    classify_rest_point,
    integrate,
    rhs_binary,
    rhs_multi,
)

__all__ = [
    "AgentSpec",
    "Constant",
    "ConstantBias",
    "Coordinate",
    "Custom",
    "Gained",
    "IntegrationFault",
    "IntegratorConfig",
    "Interval",
    "LorenzParams",
    "LorenzTrace",
    "MarketState",
    "PriceSimplex",
    "RestPointReport",
    "SigmoidFn",
    "Sinusoid",
    "Trajectory",
    "classify_rest_point",
    "cost_potential",
    "drift_counts",
    "eval_psi",
    "integrate",
    "purchase_decision",
    "rhs_binary",
    "rhs_multi",
    "spot_prices",
    "trade_cost",
    "unit_cost_approx",
]
