
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lmsr_market import (
    AgentSpec,
    ConstantBias,
    Coordinate,
    Custom,
    Gained,
    Interval,
    PriceSimplex,
    SigmoidFn,
    drift_counts,
    eval_psi,
    purchase_decision,
)
from lmsr_market.agents import (
    agents_from_json,
    agents_to_json,
    binary_drift,
    class_sizes,
    compile_population,
    logistic,
)

HALF = PriceSimplex.binary(0.5)


def brute_force_counts(agents, x, p, sigma):
    """Oracle: enumerate each agent's buy decision from first principles."""
    counts = [0] * len(p)
    for a in agents:
        ch = a.characteristic
        own = p[a.asset_class]
        if isinstance(ch, ConstantBias):
            psi = ch.L
        elif isinstance(ch, Coordinate):
            psi = ch.sign * x[ch.dim]
        elif isinstance(ch, Interval):
            psi = 1.0 if ch.a < x[0] < ch.b else -1.0
        else:
            base = brute_psi_base(ch.base_fn, x)
            psi = ch.alpha * (base + ch.nu * (own - 0.5))
        if sigma(psi) - own > 0:
            counts[a.asset_class] += 1
    return counts


def brute_psi_base(b, x):
    return b.L if isinstance(b, ConstantBias) else (b.sign * x[b.dim] if isinstance(b, Coordinate)
                                                    else (1.0 if b.a < x[0] < b.b else -1.0))


class TestSigmoid:
    def test_logistic_stable_tails(self):
        assert logistic(-800) == 0.0
        assert logistic(800) == 1.0
        assert logistic(0) == 0.5

    @pytest.mark.parametrize("name", ["logistic", "tanh", "clipped_linear"])
    def test_named_maps_are_valid(self, name):
        s = SigmoidFn.named(name)
        assert s.code >= 0
        assert s(0.0) == pytest.approx(0.5)

    def test_rejects_out_of_range_and_decreasing(self):
        with pytest.raises(ValueError):
            SigmoidFn("bad", lambda z: 2.0)
        with pytest.raises(ValueError):
            SigmoidFn("dec", lambda z: 1 - logistic(z))
        with pytest.raises(ValueError):
            SigmoidFn.named("softsign")

    def test_custom_map_has_no_kernel_code(self):
        assert SigmoidFn("mine", lambda z: logistic(2 * z)).code == -1


class TestEvalPsi:
    def test_constant(self):
        assert eval_psi(AgentSpec(1, ConstantBias(2.0)), [0.3], HALF) == 2.0
        assert eval_psi(AgentSpec(0, ConstantBias(2.0)), [-9.0, 4.0], PriceSimplex.binary(0.9)) == 2.0

    def test_interval(self):
        a = AgentSpec(1, Interval(0.2, 0.6))
        assert eval_psi(a, [0.4], HALF) == 1.0
        assert eval_psi(a, [0.7], HALF) == -1.0
        # open interval: endpoints are outside
        assert eval_psi(a, [0.2], HALF) == -1.0
        assert eval_psi(a, [0.6], HALF) == -1.0

    def test_gained_example(self):
        a = AgentSpec(1, Gained(ConstantBias(0.0), alpha=3, nu=1))
        assert eval_psi(a, [0.0], PriceSimplex.binary(0.75)) == pytest.approx(0.75, abs=1e-15)

    def test_gained_uses_own_price(self):
        g = Gained(ConstantBias(0.0), alpha=2, nu=1)
        p = PriceSimplex.binary(0.75)
        assert eval_psi(AgentSpec(0, g), [0.0], p) == pytest.approx(2 * (0.25 - 0.5))

    def test_coordinate(self):
        assert eval_psi(AgentSpec(1, Coordinate(2, -1)), [1.0, 2.0, 3.0], HALF) == -3.0
        with pytest.raises(ValueError):
            eval_psi(AgentSpec(1, Coordinate(3)), [1.0, 2.0, 3.0], HALF)

    def test_custom(self):
        a = AgentSpec(1, Custom(lambda x, p: x[0] - p))
        assert eval_psi(a, [2.0], PriceSimplex.binary(0.25)) == 1.75


class TestPurchaseDecision:
    def test_high_valuation_buys(self):
        assert purchase_decision(AgentSpec(1, ConstantBias(800.0)), [0], HALF) == 1

    def test_tie_does_not_buy(self):
        assert purchase_decision(AgentSpec(1, ConstantBias(0.0)), [0], HALF) == 0

    def test_logistic_half(self):
        a = AgentSpec(1, ConstantBias(0.0))
        assert purchase_decision(a, [0], PriceSimplex.binary(0.49)) == 1
        assert purchase_decision(a, [0], PriceSimplex.binary(0.51)) == 0


class TestDriftCounts:
    def test_empty(self):
        assert drift_counts([], [0.0], HALF).tolist() == [0, 0]
        assert drift_counts([], [0.0], PriceSimplex([0.2, 0.3, 0.5])).tolist() == [0, 0, 0]

    def test_always_buy(self):
        assert drift_counts([AgentSpec(1, ConstantBias(50.0))], [0], HALF).tolist() == [0, 1]
        assert binary_drift([AgentSpec(1, ConstantBias(50.0))], [0], 0.5) == 1

    def test_hand_enumerated(self):
        agents = [AgentSpec(1, ConstantBias(0.0))] * 3 + [AgentSpec(0, ConstantBias(0.0))] * 2
        p = PriceSimplex([0.6, 0.4])
        assert drift_counts(agents, [0], p).tolist() == [0, 3]
        assert drift_counts(agents, [0], p).tolist() == brute_force_counts(agents, [0], p.p, logistic)

    def test_class_out_of_range(self):
        with pytest.raises(ValueError):
            drift_counts([AgentSpec(2, ConstantBias(0.0))], [0], HALF)

    @given(st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        M = int(rng.integers(2, 5))
        agents = []
        for _ in range(int(rng.integers(0, 12))):
            c = int(rng.integers(M))
            kind = rng.integers(4)
            if kind == 0:
                ch = ConstantBias(float(rng.uniform(-5, 5)))
            elif kind == 1:
                ch = Coordinate(int(rng.integers(2)), int(rng.choice([-1, 1])))
            elif kind == 2 and c <= 1:
                lo, hi = (0, 1) if c == 1 else (-1, 0)
                a, b = sorted(rng.uniform(lo, hi, 2))
                ch = Interval(float(a), float(b) + 1e-9)
            else:
                ch = Gained(ConstantBias(float(rng.uniform(-2, 2))), float(rng.uniform(1, 5)), int(rng.integers(-1, 2)))
            agents.append(AgentSpec(c, ch))
        p = rng.dirichlet(np.ones(M))
        x = rng.uniform(-1, 1, 2)
        assert drift_counts(agents, x, p).tolist() == brute_force_counts(agents, x, p, logistic)


class TestSpecsAndSerialisation:
    def test_interval_bounds_per_class(self):
        AgentSpec(1, Interval(0.1, 0.9))
        AgentSpec(0, Interval(-0.9, -0.1))
        with pytest.raises(ValueError):
            AgentSpec(1, Interval(-0.5, 0.5))
        with pytest.raises(ValueError):
            AgentSpec(0, Gained(Interval(0.1, 0.2)))
        with pytest.raises(ValueError):
            Interval(0.5, 0.5)

    def test_gained_parameter_checks(self):
        with pytest.raises(ValueError):
            Gained(ConstantBias(0), alpha=0.5)
        with pytest.raises(ValueError):
            Gained(ConstantBias(0), nu=2)
        with pytest.raises(TypeError):
            Gained(Gained(ConstantBias(0)))

    def test_json_round_trip(self):
        agents = [
            AgentSpec(1, ConstantBias(1.5)),
            AgentSpec(0, Coordinate(1, -1)),
            AgentSpec(1, Interval(0.25, 0.75)),
            AgentSpec(0, Gained(Interval(-0.5, -0.25), 3.0, -1)),
        ]
        assert agents_from_json(agents_to_json(agents)) == agents

    def test_compile_population(self):
        agents = [AgentSpec(1, Gained(Coordinate(2, -1), 2.0, 1)), AgentSpec(0, ConstantBias(-1.0))]
        arr = compile_population(agents)
        assert arr.cls.tolist() == [1, 0]
        assert arr.signal_dim == 3
        assert compile_population([AgentSpec(1, Custom(lambda x, p: 0.0))]) is None

    def test_class_sizes(self):
        agents = [AgentSpec(c, ConstantBias(0)) for c in (0, 2, 2)]
        assert class_sizes(agents, 3).tolist() == [1, 0, 2]
