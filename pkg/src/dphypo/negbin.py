"""Truncated negative binomial distribution on {1, 2, ...}.

NegBin(theta, gamma) generalizes the geometric distribution (theta = 1).
It is the stopping-time law for the number of tuning runs; the privacy
accounting depends on it only through its mean and probability generating
function, both available in closed form.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Cumulative pmf is truncated once the tail mass drops below this value.
TAIL_TOL = 1e-12


@dataclass(frozen=True)
class NegBinParams:
    """Parameters of NegBin(theta, gamma): theta > -1, 0 < gamma < 1."""

    theta: float
    gamma: float

    def __post_init__(self):
        if not self.theta > -1:
            raise ValueError(f"theta must be > -1, got {self.theta}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")


def log_pmf(params: NegBinParams, k: int) -> float:
    """log P[T = k] for k >= 1, evaluated in log space."""
    if k < 1:
        raise ValueError(f"support is k >= 1, got {k}")
    theta, gamma = params.theta, params.gamma
    if theta == 0:
        return k * math.log1p(-gamma) - math.log(k) - math.log(math.log(1 / gamma))
    # log prod_{l=0}^{k-1} (l+theta)/(l+1); for theta in (-1, 0) the l=0 factor
    # and the normalizer gamma^(-theta) - 1 are both negative and cancel.
    log_prod = sum(math.log(abs(l + theta)) - math.log(l + 1) for l in range(k))
    return k * math.log1p(-gamma) + log_prod - math.log(abs(gamma ** (-theta) - 1))


def pmf(params: NegBinParams, k: int) -> float:
    """P[T = k] for k >= 1."""
    return math.exp(log_pmf(params, k))


def mean(params: NegBinParams) -> float:
    """E[T] in closed form."""
    theta, gamma = params.theta, params.gamma
    if theta == 0:
        return (1 / gamma - 1) / math.log(1 / gamma)
    return theta * (1 - gamma) / (gamma * (1 - gamma**theta))


def pgf(params: NegBinParams, x: float) -> float:
    """Probability generating function f(x) = E[x^T] on [0, 1], f(1) = 1."""
    if not 0 <= x <= 1:
        raise ValueError(f"pgf argument must be in [0, 1], got {x}")
    if x == 1:
        return 1.0
    theta, gamma = params.theta, params.gamma
    base = 1 - (1 - gamma) * x
    if theta == 0:
        return math.log(base) / math.log(gamma)
    return (base ** (-theta) - 1) / (gamma ** (-theta) - 1)


def pgf_derivative(params: NegBinParams, x: float) -> float:
    """f'(x) = (1 - (1-gamma) x)^(-theta-1) * gamma^(theta+1) * E[T]."""
    if not 0 <= x <= 1:
        raise ValueError(f"pgf argument must be in [0, 1], got {x}")
    theta, gamma = params.theta, params.gamma
    return (1 - (1 - gamma) * x) ** (-theta - 1) * gamma ** (theta + 1) * mean(params)


@lru_cache(maxsize=64)
def _cached_cdf(theta: float, gamma: float) -> np.ndarray:
    """Cumulative pmf over k = 1, 2, ... truncated at tail mass < TAIL_TOL.

    Probabilities are accumulated iteratively via the one-step pmf ratio
    p(k+1)/p(k) = (1-gamma) (k+theta)/(k+1) * k/(k) ... computed from logs,
    which avoids re-evaluating the product for every k.
    """
    params = NegBinParams(theta, gamma)
    log_terms = []
    lp = log_pmf(params, 1)
    log_terms.append(lp)
    total = math.exp(lp)
    k = 1
    while total < 1 - TAIL_TOL:
        k += 1
        # ratio p(k)/p(k-1); for theta=0 this is (1-gamma)(k-1)/k
        if theta == 0:
            lp += math.log1p(-gamma) + math.log((k - 1) / k)
        else:
            lp += math.log1p(-gamma) + math.log(k - 1 + theta) - math.log(k)
        log_terms.append(lp)
        total += math.exp(lp)
        if k > 10_000_000:  # enormous means only; never hit in practice
            break
    return np.cumsum(np.exp(np.array(log_terms)))


def support_cap(params: NegBinParams, tail: float = TAIL_TOL) -> int:
    """Smallest k with P[T > k] < tail."""
    cdf = _cached_cdf(params.theta, params.gamma)
    idx = int(np.searchsorted(cdf, 1 - tail, side="left"))
    return min(idx + 1, len(cdf))


def sample_detailed(params: NegBinParams, rng: np.random.Generator) -> tuple[int, bool]:
    """Draw T >= 1 by inverse CDF; consumes exactly one uniform from rng.

    Returns (value, truncated). If the uniform falls past the cached tail
    (probability < TAIL_TOL) the cap index is returned with truncated=True.
    """
    cdf = _cached_cdf(params.theta, params.gamma)
    u = rng.random()
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= len(cdf):
        return len(cdf), True
    return idx + 1, False


def sample(params: NegBinParams, rng: np.random.Generator) -> int:
    """Draw T >= 1 distributed per pmf (truncation flag dropped)."""
    return sample_detailed(params, rng)[0]


def sample_many(params: NegBinParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized inverse-CDF sampling of n draws."""
    cdf = _cached_cdf(params.theta, params.gamma)
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx + 1, len(cdf)).astype(np.int64)
