"""Projection of discretized densities onto the bounded-ratio set.

The feasible set is {f : c pi0 <= f <= C pi0, sum_i f_i w_i = 1} for a
strictly positive prior density pi0 on the same grid. The weighted-L2
projection has a single scalar dual variable (KKT clip structure), found
by bisection; a KL-penalized variant shares the same outer loop.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .accountant import AdaptivityBounds

NORM_TOL = 1e-9
DUAL_TOL = 1e-12


class InfeasibleBoundsError(ValueError):
    """The bounded-ratio set is empty for the given (C, c) and prior."""


@dataclass(frozen=True)
class DiscreteDensity:
    """Density values f_i and cell measures w_i on a discretized grid.

    Normalization sum_i f_i w_i = 1 is enforced to NORM_TOL.
    """

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if values.ndim != 1 or values.shape != weights.shape or values.size < 1:
            raise ValueError("values and weights must be equal-length 1-d arrays")
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        total = float(values @ weights)
        if abs(total - 1) > NORM_TOL:
            raise ValueError(f"density must integrate to 1, got {total}")

    @property
    def probabilities(self) -> np.ndarray:
        """Per-cell probability masses f_i w_i."""
        return self.values * self.weights

    @classmethod
    def from_probabilities(cls, probs, weights) -> "DiscreteDensity":
        probs = np.asarray(probs, dtype=float)
        weights = np.asarray(weights, dtype=float)
        return cls(values=probs / weights, weights=weights)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["point_id", "weight", "value"])
        for i, (w, v) in enumerate(zip(self.weights, self.values)):
            writer.writerow([i, repr(float(w)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscreteDensity":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != ["point_id", "weight", "value"]:
            raise ValueError(f"unexpected density CSV header: {header}")
        weights, values = [], []
        for row in reader:
            if not row:
                continue
            weights.append(float(row[1]))
            values.append(float(row[2]))
        return cls(values=np.array(values), weights=np.array(weights))


def uniform_density(weights) -> DiscreteDensity:
    """The uniform density 1/mu(Lambda) on a grid with the given measures."""
    weights = np.asarray(weights, dtype=float)
    return DiscreteDensity(values=np.full_like(weights, 1 / weights.sum()), weights=weights)


@dataclass(frozen=True)
class Prior:
    """A strictly positive reference density (the initial sampling law)."""

    density: DiscreteDensity

    def __post_init__(self):
        if np.any(self.density.values <= 0):
            raise ValueError("prior density must be strictly positive")


def bounds_feasible(bounds: AdaptivityBounds, prior: Prior) -> bool:
    """Whether {c pi0 <= f <= C pi0, sum f w = 1} is nonempty."""
    p = prior.density
    total = float(p.values @ p.weights)  # = 1 up to NORM_TOL
    return bounds.c * total <= 1 + NORM_TOL and bounds.C * total >= 1 - NORM_TOL


def _box(bounds: AdaptivityBounds, prior: Prior) -> tuple[np.ndarray, np.ndarray]:
    lo = bounds.c * prior.density.values
    hi = bounds.C * prior.density.values
    return lo, hi


def _in_set(pi: DiscreteDensity, lo, hi) -> bool:
    v = pi.values
    return bool(
        np.all(v >= lo - DUAL_TOL)
        and np.all(v <= hi + DUAL_TOL)
        and abs(v @ pi.weights - 1) <= DUAL_TOL
    )


def _bisect_dual(f_of_lam, weights, lo_lam, hi_lam, increasing=True, iters=200):
    """Find lam with sum f(lam) w = 1 by bisection; f monotone in lam."""
    sign = 1.0 if increasing else -1.0
    prev = None
    for _ in range(iters):
        mid = 0.5 * (lo_lam + hi_lam)
        total = float(f_of_lam(mid) @ weights)
        if prev is not None and increasing and total < prev[1] - 1e-9 and mid > prev[0]:
            raise RuntimeError("dual objective not monotone")
        prev = (mid, total)
        if abs(total - 1) < DUAL_TOL:
            return mid
        if sign * (total - 1) < 0:
            lo_lam = mid
        else:
            hi_lam = mid
    return 0.5 * (lo_lam + hi_lam)


def project_l2(
    pi: DiscreteDensity, bounds: AdaptivityBounds, prior: Prior
) -> DiscreteDensity:
    """Weighted-L2 projection onto the bounded-ratio set.

    KKT: f_i = clip(pi_i + lam, c pi0_i, C pi0_i) with a scalar dual lam
    (the weights cancel from the clip). sum f_i w_i is nondecreasing in lam.
    """
    if not bounds_feasible(bounds, prior):
        raise InfeasibleBoundsError("need c <= 1 <= C relative to the prior")
    lo, hi = _box(bounds, prior)
    if _in_set(pi, lo, hi):
        return pi
    w = pi.weights
    v = pi.values
    lam = _bisect_dual(
        lambda lam: np.clip(v + lam, lo, hi),
        w,
        float(np.min(lo - v)) - 1.0,
        float(np.max(hi - v)) + 1.0,
        increasing=True,
    )
    return DiscreteDensity(values=np.clip(v + lam, lo, hi), weights=w)


def project_kl_penalized(
    pi: DiscreteDensity,
    bounds: AdaptivityBounds,
    prior: Prior,
    nu: float,
) -> DiscreteDensity:
    """Projection with an added KL(pi, f) penalty weighted by nu >= 0.

    Minimizes sum_i [(f_i - pi_i)^2 - nu pi_i log f_i] w_i over the same
    constraint set. Per-coordinate stationarity 2(f - pi) - nu pi / f = lam
    is a quadratic in f with a unique positive root, increasing in lam;
    the root is clipped to the box and the scalar dual found by bisection.
    nu = 0 reduces exactly to project_l2.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if nu == 0:
        return project_l2(pi, bounds, prior)
    if not bounds_feasible(bounds, prior):
        raise InfeasibleBoundsError("need c <= 1 <= C relative to the prior")
    if np.any(pi.values <= 0):
        raise ValueError("KL penalty requires strictly positive input density")
    lo, hi = _box(bounds, prior)
    if _in_set(pi, lo, hi):
        return pi
    w = pi.weights
    v = pi.values

    def f_of_lam(lam):
        # positive root of 2 f^2 - (2 pi + lam) f - nu pi = 0
        b = 2 * v + lam
        root = (b + np.sqrt(b * b + 8 * nu * v)) / 4
        return np.clip(root, lo, hi)

    # root -> hi as lam -> +inf and -> 0 as lam -> -inf; bracket by doubling
    lo_lam, hi_lam = -1.0, 1.0
    while float(f_of_lam(lo_lam) @ w) > 1:
        lo_lam *= 2
        if lo_lam < -1e12:
            raise RuntimeError("failed to bracket the dual")
    while float(f_of_lam(hi_lam) @ w) < 1:
        hi_lam *= 2
        if hi_lam > 1e12:
            raise RuntimeError("failed to bracket the dual")
    lam = _bisect_dual(f_of_lam, w, lo_lam, hi_lam, increasing=True)
    return DiscreteDensity(values=f_of_lam(lam), weights=w)
