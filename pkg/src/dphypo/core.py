"""The adaptive private tuning loop with pluggable sampling strategies.

One run draws a stopping time T, then repeats: ask the strategy for a raw
density over the grid, project it onto the bounded-ratio set, sample a
candidate from the projected density, query the score oracle, record the
trial. The best trial (highest q, first occurrence on ties) is released.

Randomness contract: a run consumes its generator in a fixed documented
order — one uniform for T, then per iteration one uniform for the
candidate draw followed by whatever the oracle consumes (one standard
normal for landscape oracles). Independent runs should use generators
derived via ``np.random.default_rng(np.random.SeedSequence([master_seed,
run_index]))``.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import negbin, projection, surrogate
from .accountant import AdaptivityBounds
from .negbin import NegBinParams
from .projection import DiscreteDensity, Prior

# transcripts stop recording per-iteration densities above this grid size
DENSITY_RECORD_LIMIT = 10_000


@dataclass(frozen=True)
class Trial:
    lambda_index: int
    lam: tuple
    q: float
    iteration: int


@dataclass
class Transcript:
    """Ordered record of one run."""

    seed: object
    t: int
    trials: list
    best: Trial
    fixed_t: bool = False  # fixed-T runs are benchmarks, not privacy-accounted
    t_truncated: bool = False
    densities: list | None = None
    config_digest: str = ""

    def to_json(self) -> str:
        obj = {
            "seed": self.seed,
            "t": self.t,
            "fixed_t": self.fixed_t,
            "t_truncated": self.t_truncated,
            "config_digest": self.config_digest,
            "trials": [dataclasses.asdict(t) for t in self.trials],
            "best": dataclasses.asdict(self.best),
        }
        return json.dumps(obj, indent=2)


class UniformStrategy:
    """Never updates: every iteration samples from the prior."""

    def __init__(self, prior: Prior):
        self.prior = prior

    def update(self, history) -> DiscreteDensity:
        return self.prior.density


class GpStrategy:
    """GP surrogate posterior -> UCB scores -> softmax density.

    The raw (unprojected) density is recomputed from the full history each
    iteration; the loop projects a fresh copy every time, so the carried
    state is exactly the history. Log-scaled grid axes are regressed in
    log coordinates.
    """

    def __init__(self, grid_points, config: surrogate.GpConfig, prior: Prior, log_mask=None):
        pts = np.atleast_2d(np.asarray(grid_points, dtype=float))
        if log_mask is not None:
            pts = pts.copy()
            mask = np.asarray(log_mask, dtype=bool)
            pts[:, mask] = np.log(pts[:, mask])
        self.grid_points = pts
        self.config = config
        self.prior = prior

    def update(self, history) -> DiscreteDensity:
        if not history:
            return self.prior.density
        obs = surrogate.ObservationSet()
        for trial in history:
            obs.add(self.grid_points[trial.lambda_index], trial.q)
        mu, sigma = surrogate.posterior(self.config, obs, self.grid_points)
        s = surrogate.scores(mu, sigma, self.config.tau)
        return surrogate.softmax_density(s, self.config.beta, self.prior.density.weights)


def make_uniform_strategy(prior: Prior) -> UniformStrategy:
    return UniformStrategy(prior)


def make_gp_strategy(grid_points, config, prior: Prior, log_mask=None) -> GpStrategy:
    return GpStrategy(grid_points, config, prior, log_mask=log_mask)


def sample_index(density: DiscreteDensity, rng: np.random.Generator) -> int:
    """Measure-weighted categorical draw; consumes exactly one uniform."""
    cdf = np.cumsum(density.probabilities)
    u = rng.random() * cdf[-1]
    return int(np.searchsorted(cdf, u, side="right"))


def _run_loop(
    oracle,
    strategy,
    t: int,
    bounds: AdaptivityBounds,
    prior: Prior,
    rng: np.random.Generator,
    grid_points,
    record_densities: bool,
) -> tuple[list, list | None]:
    grid_points = np.atleast_2d(np.asarray(grid_points, dtype=float))
    trials: list = []
    densities = [] if record_densities and prior.density.values.size <= DENSITY_RECORD_LIMIT else None
    for j in range(t):
        raw = prior.density if j == 0 else strategy.update(trials)
        proj = projection.project_l2(raw, bounds, prior)
        if densities is not None:
            densities.append(proj)
        idx = sample_index(proj, rng)
        try:
            q = oracle(idx, rng)
        except Exception as exc:
            exc.partial_trials = trials
            raise
        trials.append(
            Trial(lambda_index=idx, lam=tuple(grid_points[idx]), q=float(q), iteration=j)
        )
    return trials, densities


def _best(trials) -> Trial:
    best = trials[0]
    for t in trials[1:]:
        if t.q > best.q:
            best = t
    return best


def run_hypo(
    oracle,
    strategy,
    params: NegBinParams,
    bounds: AdaptivityBounds,
    prior: Prior,
    rng: np.random.Generator,
    grid_points=None,
    seed=None,
    record_densities: bool = False,
    config_digest: str = "",
) -> Transcript:
    """One private tuning run with T ~ NegBin(theta, gamma).

    ``oracle(index, rng) -> q`` scores a grid point. ``grid_points``
    defaults to the 1-d index grid when omitted.
    """
    if not projection.bounds_feasible(bounds, prior):
        raise projection.InfeasibleBoundsError("infeasible bounds for the prior")
    if grid_points is None:
        grid_points = np.arange(prior.density.values.size, dtype=float)[:, None]
    t, truncated = negbin.sample_detailed(params, rng)
    trials, densities = _run_loop(
        oracle, strategy, t, bounds, prior, rng, grid_points, record_densities
    )
    return Transcript(
        seed=seed,
        t=t,
        trials=trials,
        best=_best(trials),
        t_truncated=truncated,
        densities=densities,
        config_digest=config_digest,
    )


def run_fixed_t(
    oracle,
    strategy,
    t: int,
    bounds: AdaptivityBounds,
    prior: Prior,
    rng: np.random.Generator,
    grid_points=None,
    seed=None,
    record_densities: bool = False,
    config_digest: str = "",
) -> Transcript:
    """Benchmark variant with a fixed number of trials (no T draw).

    The transcript is flagged fixed_t=True: it has no privacy accounting.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if not projection.bounds_feasible(bounds, prior):
        raise projection.InfeasibleBoundsError("infeasible bounds for the prior")
    if grid_points is None:
        grid_points = np.arange(prior.density.values.size, dtype=float)[:, None]
    trials, densities = _run_loop(
        oracle, strategy, t, bounds, prior, rng, grid_points, record_densities
    )
    return Transcript(
        seed=seed,
        t=t,
        trials=trials,
        best=_best(trials),
        fixed_t=True,
        densities=densities,
        config_digest=config_digest,
    )


def derive_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """The documented per-run stream splitting rule."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, run_index]))


def digest_config(obj) -> str:
    """Short stable digest of a configuration mapping for transcripts."""
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]
