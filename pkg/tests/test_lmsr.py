import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmsr_market import MarketState, PriceSimplex, cost_potential, spot_prices, trade_cost, unit_cost_approx
from lmsr_market.lmsr import softmax

finite_q = st.lists(st.floats(-200, 200, allow_nan=False), min_size=2, max_size=6)
betas = st.floats(1e-3, 2.0)


def potential_difference(q, beta, asset, dq):
    """Oracle: C(q + dq e_i) - C(q) straight from the definition in extended precision."""
    import mpmath

    mpmath.mp.dps = 50
    c = lambda v: mpmath.log(sum(mpmath.e ** (beta * mpmath.mpf(x)) for x in v)) / beta
    q2 = list(q)
    q2[asset] += dq
    return float(c(q2) - c(q))


class TestCostPotential:
    def test_symmetric_two_assets(self):
        assert cost_potential(MarketState([0, 0], 1.0)) == pytest.approx(math.log(2), abs=1e-15)

    @pytest.mark.parametrize("c,beta,M", [(3.0, 0.5, 2), (-7.0, 0.01, 4), (1e3, 2.0, 3)])
    def test_identical_quantities(self, c, beta, M):
        assert cost_potential(MarketState([c] * M, beta)) == pytest.approx(c + math.log(M) / beta, rel=1e-14)

    def test_closed_form(self):
        assert cost_potential(MarketState([1, 0], 1.0)) == pytest.approx(1.313262, abs=1e-6)
        assert cost_potential(MarketState([1, 0], 1.0)) == pytest.approx(math.log(1 + math.e), abs=1e-15)

    def test_no_overflow_at_large_quantities(self):
        assert math.isfinite(cost_potential(MarketState([1e6, 0], 1.0)))


class TestSpotPrices:
    def test_symmetry_and_translation(self):
        for beta in (0.01, 1, 50):
            assert np.allclose(spot_prices(MarketState([0, 0], beta)).p, 0.5, atol=0)
            assert np.allclose(spot_prices(MarketState([5, 5], beta)).p, 0.5, atol=1e-16)

    def test_closed_form(self):
        p = spot_prices(MarketState([1, 0], 1.0)).p
        assert p == pytest.approx([math.e / (1 + math.e), 1 / (1 + math.e)], abs=1e-15)
        assert p == pytest.approx([0.731059, 0.268941], abs=1e-6)

    @given(finite_q, betas)
    def test_simplex(self, q, beta):
        p = spot_prices(MarketState(q, beta)).p
        assert abs(p.sum() - 1) <= 1e-12
        assert np.all((p >= 0) & (p <= 1))

    @given(finite_q, betas, st.floats(-1e3, 1e3))
    def test_translation_invariance(self, q, beta, c):
        a = spot_prices(MarketState(q, beta)).p
        b = spot_prices(MarketState(np.asarray(q) + c, beta)).p
        assert np.abs(a - b).max() <= 1e-12

    def test_extreme_inputs_stay_finite(self):
        p = spot_prices(MarketState([1e5, -1e5, 0], 10.0)).p
        assert p.tolist() == [1.0, 0.0, 0.0]

    def test_softmax_matches_gradient_of_potential(self):
        q, beta, h = np.array([0.3, -1.2, 2.0]), 0.7, 1e-6
        grad = [(cost_potential(MarketState(q + h * e, beta)) - cost_potential(MarketState(q - h * e, beta))) / (2 * h)
                for e in np.eye(3)]
        assert spot_prices(MarketState(q, beta)).p == pytest.approx(grad, abs=1e-8)


class TestTradeCost:
    def test_empty_trade(self):
        assert trade_cost(MarketState([3, -1], 0.2), 0, 0.0) == 0.0

    def test_closed_forms(self):
        assert trade_cost(MarketState([0, 0], 1.0), 1, 1.0) == pytest.approx(math.log((1 + math.e) / 2), abs=1e-15)
        assert trade_cost(MarketState([0, 0], 1.0), 1, 1.0) == pytest.approx(0.620115, abs=1e-6)
        assert trade_cost(MarketState([0, 0], 0.01), 1, 1.0) == pytest.approx(0.501250, abs=1e-6)

    @pytest.mark.parametrize("q,beta,asset,dq", [
        ([0.0, 0.0], 1.0, 1, 1.0),
        ([3.0, -2.0, 0.5], 0.3, 2, 7.5),
        ([100.0, 0.0], 0.01, 1, 1.0),
        ([-40.0, 40.0], 2.0, 0, 0.25),
        ([0.0, 0.0], 1.0, 0, 900.0),
    ])
    def test_matches_potential_difference(self, q, beta, asset, dq):
        assert trade_cost(MarketState(q, beta), asset, dq) == pytest.approx(potential_difference(q, beta, asset, dq),
                                                                            rel=1e-13, abs=1e-13)

    @given(finite_q, betas, st.data())
    def test_path_independence(self, q, beta, data):
        state = MarketState(q, beta)
        i = data.draw(st.integers(0, len(q) - 1))
        a = data.draw(st.floats(0, 20))
        b = data.draw(st.floats(0, 20))
        whole = trade_cost(state, i, a + b)
        split = trade_cost(state, i, a) + trade_cost(state.bought(i, a), i, b)
        assert abs(whole - split) <= 1e-12 * max(1.0, abs(whole))

    @given(finite_q, betas, st.data())
    def test_bounded_by_quantity(self, q, beta, data):
        # each unit pays out at most 1, so cost lies in [p_i * dq, dq]
        state = MarketState(q, beta)
        i = data.draw(st.integers(0, len(q) - 1))
        dq = data.draw(st.floats(0, 50))
        c = trade_cost(state, i, dq)
        assert spot_prices(state).p[i] * dq - 1e-12 <= c <= dq + 1e-12

    def test_underflowing_trade(self):
        s = MarketState([0, 0], 0.5)
        assert trade_cost(s, 0, 5e-324) == pytest.approx(0.5 * 5e-324)
        assert trade_cost(s, 0, 1e-300) == pytest.approx(0.5e-300, rel=1e-12)

    def test_rejects_bad_arguments(self):
        s = MarketState([0, 0], 1.0)
        with pytest.raises(ValueError):
            trade_cost(s, 0, -1.0)
        with pytest.raises(IndexError):
            trade_cost(s, 2, 1.0)


class TestUnitCostApprox:
    def test_symmetric(self):
        s = MarketState([0, 0], 0.05)
        assert unit_cost_approx(s, 0) == unit_cost_approx(s, 1) == 0.5

    def test_softmax_value(self):
        assert unit_cost_approx(MarketState([1, 0], 0.01), 0) == pytest.approx(0.502500, abs=1e-6)

    @pytest.mark.parametrize("beta", [0.1, 0.01, 0.001])
    def test_within_beta_of_exact(self, beta):
        s = MarketState([0, 0], beta)
        assert abs(unit_cost_approx(s, 1) - trade_cost(s, 1, 1.0)) <= beta


class TestValidation:
    @pytest.mark.parametrize("q,beta", [([1.0], 1.0), ([0, np.nan], 1.0), ([0, 0], 0.0), ([0, 0], -1.0)])
    def test_market_state_rejects(self, q, beta):
        with pytest.raises(ValueError):
            MarketState(q, beta)

    def test_price_simplex_rejects(self):
        with pytest.raises(ValueError):
            PriceSimplex([0.5, 0.6])
        with pytest.raises(ValueError):
            PriceSimplex([1.5, -0.5])

    def test_from_prices_round_trip(self):
        p = np.array([0.2, 0.5, 0.3])
        assert spot_prices(MarketState.from_prices(p, 0.01)).p == pytest.approx(p, abs=1e-14)

    def test_softmax_helper(self):
        assert softmax(np.array([0.0, 0.0])).tolist() == [0.5, 0.5]
