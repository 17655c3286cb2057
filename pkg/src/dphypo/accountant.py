"""Privacy accounting for the adaptive tuning loop.

Given the Renyi-DP guarantees of the base training algorithm, the stopping
time distribution NegBin(theta, gamma), and the adaptivity bounds (C, c)
on the sampling density, these functions compute the RDP / pure-DP cost of
the whole hyperparameter search, convert RDP curves to (eps, delta)-DP,
and invert the accounting to find the base budget that meets a total.
"""

import json
import math
from dataclasses import dataclass

from . import negbin
from .negbin import NegBinParams


@dataclass(frozen=True)
class RdpPoint:
    """One (alpha, epsilon) Renyi-DP guarantee; alpha > 1, epsilon >= 0."""

    alpha: float
    epsilon: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class RdpCurve:
    """An RDP guarantee sampled at a grid of orders.

    ``pure_epsilon`` is an optional alpha = infinity point, i.e. an
    (epsilon, 0)-DP guarantee for the same algorithm.
    """

    points: tuple
    pure_epsilon: float | None = None

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not pts and self.pure_epsilon is None:
            raise ValueError("curve must contain at least one point")
        alphas = [p.alpha for p in pts]
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ValueError("alphas must be strictly increasing")
        if self.pure_epsilon is not None and self.pure_epsilon < 0:
            raise ValueError("pure_epsilon must be >= 0")

    def epsilon_at(self, alpha: float) -> float:
        """Epsilon of the grid point with this exact alpha (no interpolation)."""
        if math.isinf(alpha):
            if self.pure_epsilon is None:
                raise KeyError("curve has no pure-DP (alpha = inf) point")
            return self.pure_epsilon
        for p in self.points:
            if p.alpha == alpha:
                return p.epsilon
        raise KeyError(f"alpha {alpha} not on the curve grid")

    def alpha_hat_candidates(self) -> list[tuple[float, float]]:
        """All (alpha_hat, eps_hat) pairs available on this curve."""
        cands = [(p.alpha, p.epsilon) for p in self.points]
        if self.pure_epsilon is not None:
            cands.append((math.inf, self.pure_epsilon))
        return cands

    def to_json(self) -> str:
        obj = {"points": [{"alpha": p.alpha, "epsilon": p.epsilon} for p in self.points]}
        if self.pure_epsilon is not None:
            obj["pure_epsilon"] = self.pure_epsilon
        return json.dumps(obj, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RdpCurve":
        obj = json.loads(text)
        points = tuple(RdpPoint(p["alpha"], p["epsilon"]) for p in obj.get("points", []))
        return cls(points=points, pure_epsilon=obj.get("pure_epsilon"))


@dataclass(frozen=True)
class AdaptivityBounds:
    """Density-ratio bounds: posterior / prior must stay within [c, C]."""

    C: float
    c: float

    def __post_init__(self):
        if not 0 < self.c <= 1 <= self.C:
            raise ValueError(f"need 0 < c <= 1 <= C, got c={self.c}, C={self.C}")

    @property
    def log_ratio(self) -> float:
        return math.log(self.C / self.c)


def hypo_rdp(
    alpha: float,
    epsilon: float,
    alpha_hat: float,
    epsilon_hat: float,
    params: NegBinParams,
    bounds: AdaptivityBounds,
) -> float:
    """RDP cost at order alpha of the whole adaptive search.

    With every base run (alpha, eps)-RDP and (alpha_hat, eps_hat)-RDP, the
    search with T ~ NegBin(theta, gamma) and density bounds (C, c) is
    (alpha, eps')-RDP for

        eps' = eps + (1+theta)(1 - 1/alpha_hat) eps_hat
             + (alpha/(alpha-1) + 1 + theta) log(C/c)
             + (1+theta) log(1/gamma) / alpha_hat
             + log E[T] / (alpha - 1).

    alpha_hat may be math.inf (pure-DP base guarantee), in which case the
    1/alpha_hat terms vanish.
    """
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1, got {alpha}")
    if not alpha_hat >= 1:
        raise ValueError(f"alpha_hat must be >= 1, got {alpha_hat}")
    if epsilon < 0 or epsilon_hat < 0:
        raise ValueError("epsilons must be >= 0")
    theta, gamma = params.theta, params.gamma
    inv_ahat = 0.0 if math.isinf(alpha_hat) else 1.0 / alpha_hat
    return (
        epsilon
        + (1 + theta) * (1 - inv_ahat) * epsilon_hat
        + (alpha / (alpha - 1) + 1 + theta) * bounds.log_ratio
        + (1 + theta) * math.log(1 / gamma) * inv_ahat
        + math.log(negbin.mean(params)) / (alpha - 1)
    )


def hypo_rdp_best(
    alpha: float,
    curve: RdpCurve,
    params: NegBinParams,
    bounds: AdaptivityBounds,
) -> tuple[float, float]:
    """Minimize hypo_rdp over the alpha_hat grid available on the curve.

    The base epsilon at the requested alpha must be a point of the curve.
    Returns (epsilon_prime, chosen alpha_hat).
    """
    epsilon = curve.epsilon_at(alpha)
    best = (math.inf, math.nan)
    for alpha_hat, eps_hat in curve.alpha_hat_candidates():
        val = hypo_rdp(alpha, epsilon, alpha_hat, eps_hat, params, bounds)
        if val < best[0]:
            best = (val, alpha_hat)
    return best


def hypo_pure_dp(epsilon: float, params: NegBinParams, bounds: AdaptivityBounds) -> float:
    """Pure-DP cost (2 + theta)(epsilon + log(C/c)) of the whole search."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return (2 + params.theta) * (epsilon + bounds.log_ratio)


def rdp_to_dp(curve: RdpCurve, delta: float) -> float:
    """Standard conversion: eps = min_alpha eps_alpha + log(1/delta)/(alpha-1)."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    best = math.inf
    for p in curve.points:
        best = min(best, p.epsilon + math.log(1 / delta) / (p.alpha - 1))
    if curve.pure_epsilon is not None:
        best = min(best, curve.pure_epsilon)
    return best


def hypo_curve(
    base_curve: RdpCurve, params: NegBinParams, bounds: AdaptivityBounds
) -> RdpCurve:
    """Map a base RDP curve through the search accounting, point by point."""
    pts = tuple(
        RdpPoint(p.alpha, hypo_rdp_best(p.alpha, base_curve, params, bounds)[0])
        for p in base_curve.points
    )
    pure = None
    if base_curve.pure_epsilon is not None:
        pure = hypo_pure_dp(base_curve.pure_epsilon, params, bounds)
    return RdpCurve(points=pts, pure_epsilon=pure)


def total_cost(
    scale: float,
    curve_shape,
    params: NegBinParams,
    bounds: AdaptivityBounds,
    delta: float,
) -> float:
    """(eps, delta)-DP cost of the whole search at a given base budget scale."""
    return rdp_to_dp(hypo_curve(curve_shape(scale), params, bounds), delta)


def solve_base_budget(
    total_epsilon: float,
    delta: float,
    params: NegBinParams,
    bounds: AdaptivityBounds,
    curve_shape,
    tol: float = 1e-6,
    max_scale: float = 1e6,
) -> float:
    """Invert the accounting: find the base scale whose total cost meets a target.

    ``curve_shape`` maps a nonnegative scale to the base RdpCurve at that
    budget; the induced total cost must be nondecreasing in scale. Solved by
    bracketed bisection until the cost is within ``tol`` of total_epsilon.
    """
    lo, hi = 0.0, 1.0
    cost_lo = total_cost(lo, curve_shape, params, bounds, delta)
    if cost_lo > total_epsilon + tol:
        raise ValueError(
            f"target {total_epsilon} below minimum achievable cost {cost_lo}"
        )
    cost_hi = total_cost(hi, curve_shape, params, bounds, delta)
    if cost_hi < cost_lo - 1e-12:
        raise ValueError("total cost is not nondecreasing in scale")
    while cost_hi < total_epsilon:
        lo, cost_lo = hi, cost_hi
        hi *= 2
        if hi > max_scale:
            raise ValueError(f"target {total_epsilon} unreachable below scale {max_scale}")
        cost_hi = total_cost(hi, curve_shape, params, bounds, delta)
        if cost_hi < cost_lo - 1e-12:
            raise ValueError("total cost is not nondecreasing in scale")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cost_mid = total_cost(mid, curve_shape, params, bounds, delta)
        if abs(cost_mid - total_epsilon) < tol:
            return mid
        if cost_mid < total_epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
