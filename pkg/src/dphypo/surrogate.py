"""Gaussian-process surrogate: posterior, optimism scores, softmax density.

The surrogate regresses observed scores on hyperparameter coordinates with
a squared-exponential kernel, turns the posterior into per-point scores
mu + tau * sigma, and exponentiates them into a sampling density. Kernel
hyperparameters are fixed per run; there is no marginal-likelihood fitting.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .projection import DiscreteDensity


@dataclass(frozen=True)
class GpConfig:
    """Fixed kernel and acquisition parameters.

    lengthscales: one positive value per hyperparameter dimension.
    tau: exploration weight in the score mu + tau * sigma.
    beta: inverse temperature of the softmax sampling density.
    center_q: center observations by their mean before regression
      (the mean is added back), so prior_mean stays meaningful across
      landscapes with different score levels.
    """

    lengthscales: tuple
    signal_variance: float = 1.0
    noise_variance: float = 0.0
    jitter: float = 1e-8
    prior_mean: float = 0.0
    tau: float = 0.0
    beta: float = 0.0
    center_q: bool = True

    def __post_init__(self):
        ls = tuple(float(l) for l in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, "lengthscales", ls)
        if any(l <= 0 for l in ls):
            raise ValueError("lengthscales must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.jitter <= 0:
            raise ValueError("jitter must be positive")
        if self.tau < 0 or self.beta < 0:
            raise ValueError("tau and beta must be nonnegative")


@dataclass
class ObservationSet:
    """Observed (hyperparameter vector, score) pairs."""

    points: list = field(default_factory=list)
    scores: list = field(default_factory=list)

    def add(self, x, q: float):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.points and x.shape != self.points[0].shape:
            raise ValueError("observation dimensionality mismatch")
        self.points.append(x)
        self.scores.append(float(q))

    def __len__(self):
        return len(self.points)


def _sq_exp_kernel(xa: np.ndarray, xb: np.ndarray, config: GpConfig) -> np.ndarray:
    ls = np.asarray(config.lengthscales)
    d = (xa[:, None, :] - xb[None, :, :]) / ls
    return config.signal_variance * np.exp(-0.5 * np.sum(d * d, axis=-1))


def posterior(
    config: GpConfig, obs: ObservationSet, grid
) -> tuple[np.ndarray, np.ndarray]:
    """Exact GP posterior (mu, sigma) over the grid points.

    sigma is the latent-function posterior standard deviation, clamped at 0.
    On a Cholesky failure the jitter escalates by factors of 10 up to 1e-2
    before giving up.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    n_grid = grid.shape[0]
    prior_sigma = np.sqrt(config.signal_variance)
    if len(obs) == 0:
        return (
            np.full(n_grid, config.prior_mean),
            np.full(n_grid, prior_sigma),
        )
    x = np.stack(obs.points)
    q = np.asarray(obs.scores, dtype=float)
    if x.shape[1] != grid.shape[1]:
        raise ValueError("grid and observation dimensionality mismatch")
    center = config.prior_mean + (q.mean() if config.center_q else 0.0)
    y = q - center
    k_xx = _sq_exp_kernel(x, x, config)
    k_gx = _sq_exp_kernel(grid, x, config)
    jitter = config.jitter
    while True:
        try:
            chol = cho_factor(
                k_xx + (config.noise_variance + jitter) * np.eye(len(x)), lower=True
            )
            break
        except np.linalg.LinAlgError:
            jitter *= 10
            if jitter > 1e-2:
                raise RuntimeError("GP factorization failed even at jitter 1e-2")
    alpha = cho_solve(chol, y)
    mu = center + k_gx @ alpha
    var = config.signal_variance - np.sum(k_gx * cho_solve(chol, k_gx.T).T, axis=1)
    sigma = np.sqrt(np.clip(var, 0.0, None))
    return mu, sigma


def scores(mu: np.ndarray, sigma: np.ndarray, tau: float) -> np.ndarray:
    """Optimism-adjusted scores mu + tau * sigma."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if mu.shape != sigma.shape:
        raise ValueError("mu and sigma must have equal length")
    return mu + tau * sigma


def softmax_density(s: np.ndarray, beta: float, weights) -> DiscreteDensity:
    """Density f_i = exp(beta s_i) / sum_j exp(beta s_j) w_j.

    Max-subtraction keeps the exponentials finite; the result integrates
    to 1 against the weights by construction.
    """
    s = np.asarray(s, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    z = beta * s
    z -= z.max()
    e = np.exp(z)
    return DiscreteDensity(values=e / (e @ weights), weights=weights)
