"""Privacy accountant tests."""

import math

import numpy as np
import pytest

from dphypo import accountant
from dphypo.accountant import (
    AdaptivityBounds,
    RdpCurve,
    RdpPoint,
    hypo_curve,
    hypo_pure_dp,
    hypo_rdp,
    hypo_rdp_best,
    rdp_to_dp,
    solve_base_budget,
)
from dphypo.negbin import NegBinParams

NO_ADAPT = AdaptivityBounds(C=1.0, c=1.0)
GEO_HALF = NegBinParams(theta=1.0, gamma=0.5)


class TestStructures:
    def test_rdp_point_validation(self):
        with pytest.raises(ValueError):
            RdpPoint(alpha=1.0, epsilon=0.5)
        with pytest.raises(ValueError):
            RdpPoint(alpha=2.0, epsilon=-0.1)

    def test_curve_alphas_strictly_increasing(self):
        with pytest.raises(ValueError):
            RdpCurve(points=(RdpPoint(2.0, 1.0), RdpPoint(2.0, 2.0)))

    def test_curve_json_roundtrip(self):
        curve = RdpCurve(points=(RdpPoint(2.0, 1.0), RdpPoint(4.0, 1.5)), pure_epsilon=3.0)
        assert RdpCurve.from_json(curve.to_json()) == curve

    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            AdaptivityBounds(C=0.9, c=0.5)  # C < 1
        with pytest.raises(ValueError):
            AdaptivityBounds(C=2.0, c=1.5)  # c > 1
        with pytest.raises(ValueError):
            AdaptivityBounds(C=2.0, c=0.0)


class TestHypoRdp:
    def test_pure_base_geometric(self):
        # base (2, 1)-RDP plus pure eps_hat=1, theta=1, gamma=0.5, C=c=1:
        # 1 + 2*1 + log 2
        val = hypo_rdp(2.0, 1.0, math.inf, 1.0, GEO_HALF, NO_ADAPT)
        assert val == pytest.approx(1 + 2 + math.log(2), abs=1e-12)

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 4.0, 16.0])
    def test_zero_divergence_leaves_mean_term(self, alpha):
        val = hypo_rdp(alpha, 0.0, math.inf, 0.0, GEO_HALF, NO_ADAPT)
        assert val == pytest.approx(math.log(2) / (alpha - 1), abs=1e-12)

    def test_alpha_hat_one_literal(self):
        # alpha=2, eps=eps_hat=0, C/c=e, theta=0, gamma=0.5, alpha_hat=1:
        # 3*1 + log 2 + log(1/log 2)
        params = NegBinParams(theta=0.0, gamma=0.5)
        bounds = AdaptivityBounds(C=math.e, c=1.0)
        expected = 3.0 + math.log(2) + math.log(1 / math.log(2))
        assert hypo_rdp(2.0, 0.0, 1.0, 0.0, params, bounds) == pytest.approx(expected, abs=1e-12)

    def test_rejects_bad_orders(self):
        with pytest.raises(ValueError):
            hypo_rdp(1.0, 0.0, 2.0, 0.0, GEO_HALF, NO_ADAPT)
        with pytest.raises(ValueError):
            hypo_rdp(2.0, 0.0, 0.5, 0.0, GEO_HALF, NO_ADAPT)


class TestHypoRdpBest:
    def test_singleton_curve(self):
        curve = RdpCurve(points=(RdpPoint(2.0, 0.7),))
        val, ahat = hypo_rdp_best(2.0, curve, GEO_HALF, NO_ADAPT)
        assert val == pytest.approx(hypo_rdp(2.0, 0.7, 2.0, 0.7, GEO_HALF, NO_ADAPT))
        assert ahat == 2.0

    def test_dominated_point_never_selected(self):
        # eps_hat matters through (1+theta)(1-1/ahat)eps_hat + (1+theta)log(1/gamma)/ahat;
        # a hugely worse eps at the same structure loses.
        curve = RdpCurve(points=(RdpPoint(2.0, 0.1), RdpPoint(4.0, 50.0)))
        _, ahat = hypo_rdp_best(2.0, curve, GEO_HALF, NO_ADAPT)
        assert ahat == 2.0

    def test_at_most_every_candidate(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            alphas = np.sort(rng.uniform(1.1, 30, size=5))
            epss = rng.uniform(0.0, 5.0, size=5)
            pure = float(rng.uniform(0.0, 5.0))
            curve = RdpCurve(
                points=tuple(RdpPoint(float(a), float(e)) for a, e in zip(alphas, epss)),
                pure_epsilon=pure,
            )
            alpha = float(alphas[2])
            eps = curve.epsilon_at(alpha)
            best, _ = hypo_rdp_best(alpha, curve, GEO_HALF, NO_ADAPT)
            for ahat, ehat in curve.alpha_hat_candidates():
                assert best <= hypo_rdp(alpha, eps, ahat, ehat, GEO_HALF, NO_ADAPT) + 1e-12


class TestHypoPureDp:
    def test_zero_budget_no_adaptivity(self):
        params = NegBinParams(theta=0.0, gamma=0.5)
        assert hypo_pure_dp(0.0, params, NO_ADAPT) == 0.0

    def test_with_adaptivity(self):
        bounds = AdaptivityBounds(C=math.e, c=1.0)
        assert hypo_pure_dp(1.0, GEO_HALF, bounds) == pytest.approx(6.0, abs=1e-12)


class TestRdpToDp:
    def test_single_point(self):
        curve = RdpCurve(points=(RdpPoint(2.0, 0.0),))
        assert rdp_to_dp(curve, math.exp(-1)) == pytest.approx(1.0, abs=1e-12)

    def test_picks_best_point(self):
        curve = RdpCurve(points=(RdpPoint(2.0, 1.0), RdpPoint(4.0, 1.0)))
        assert rdp_to_dp(curve, math.exp(-3)) == pytest.approx(2.0, abs=1e-12)

    def test_more_points_never_worse(self):
        small = RdpCurve(points=(RdpPoint(2.0, 1.0),))
        big = RdpCurve(points=(RdpPoint(2.0, 1.0), RdpPoint(8.0, 0.5)), pure_epsilon=1.1)
        delta = 1e-5
        assert rdp_to_dp(big, delta) <= rdp_to_dp(small, delta)

    def test_rejects_bad_delta(self):
        curve = RdpCurve(points=(RdpPoint(2.0, 1.0),))
        with pytest.raises(ValueError):
            rdp_to_dp(curve, 0.0)


class TestHypoCurve:
    def test_maps_point_by_point(self):
        base = RdpCurve(points=(RdpPoint(2.0, 0.5), RdpPoint(4.0, 0.8)), pure_epsilon=1.0)
        out = hypo_curve(base, GEO_HALF, NO_ADAPT)
        for p_in, p_out in zip(base.points, out.points):
            assert p_out.alpha == p_in.alpha
            assert p_out.epsilon == pytest.approx(
                hypo_rdp_best(p_in.alpha, base, GEO_HALF, NO_ADAPT)[0]
            )
        assert out.pure_epsilon == pytest.approx(hypo_pure_dp(1.0, GEO_HALF, NO_ADAPT))


def linear_shape(scale):
    return RdpCurve(points=(RdpPoint(2.0, scale),))


class TestSolveBaseBudget:
    def test_closed_form_inversion(self):
        # shape scale -> {(2, scale)}: total(s) = (2s + 2 log 2) + log(1/delta)/(2-1)
        delta = math.exp(-1)
        target = 4.0
        expected = (target - 2 * math.log(2) - 1.0) / 2.0
        got = solve_base_budget(target, delta, GEO_HALF, NO_ADAPT, linear_shape)
        assert got == pytest.approx(expected, abs=1e-5)

    def test_closed_form_with_pure_point(self):
        # shape with a matching pure bound: the pure route gives total = 3s exactly
        shape = lambda s: RdpCurve(points=(RdpPoint(2.0, s),), pure_epsilon=s)
        target = 1.5
        got = solve_base_budget(target, math.exp(-1), GEO_HALF, NO_ADAPT, shape)
        assert got == pytest.approx(target / 3.0, abs=1e-5)

    def test_unreachable_target(self):
        with pytest.raises(ValueError):
            # minimum achievable total is 2*log2 + 1 > 0.1
            solve_base_budget(0.1, math.exp(-1), GEO_HALF, NO_ADAPT, linear_shape)

    def test_monotone_in_target(self):
        delta = math.exp(-1)
        prev = None
        for target in (3.0, 6.0, 12.0, 24.0):
            s = solve_base_budget(target, delta, GEO_HALF, NO_ADAPT, linear_shape)
            if prev is not None:
                assert s >= prev
            prev = s
