"""Seeded benchmark sweeps comparing sampling strategies on a landscape.

Configuration is a flat key=value file with sections (configparser
syntax). Each repetition gets its own generator derived from
(master_seed, run_index), so reports are byte-identical regardless of the
worker count. Runs are scored by the landscape's true mean at the
released hyperparameter.
"""

import concurrent.futures
import configparser
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import accountant, core, landscape as landscape_mod, surrogate
from .accountant import AdaptivityBounds
from .negbin import NegBinParams
from .projection import Prior, uniform_density


@dataclass
class RunConfig:
    landscape_path: str | None = None
    synth: dict | None = None
    grid: landscape_mod.GridSpec | None = None
    strategies: tuple = ("uniform",)
    gp: surrogate.GpConfig | None = None
    theta: float | None = None
    gammas: tuple = ()
    fixed_ts: tuple = ()
    C: float = 1.0
    c: float = 1.0
    master_seed: int = 0
    repetitions: int = 1
    direction: str = "max"
    privacy_mode: str | None = None  # "white" | "black"
    base_pure_eps: float | None = None
    total_eps: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if bool(self.gammas) == bool(self.fixed_ts) and not (self.gammas or self.fixed_ts):
            raise ValueError("need a gamma sweep or a fixed-T sweep")
        if self.direction not in ("max", "min"):
            raise ValueError("direction must be max or min")


class ConfigError(ValueError):
    pass


def _parse_grid(section) -> landscape_mod.GridSpec:
    dims = []
    for key in sorted(k for k in section if k.startswith("dim")):
        parts = section[key].split()
        if len(parts) != 5:
            raise ConfigError(f"grid {key}: expected 'name scale min max count'")
        dims.append(
            landscape_mod.DimSpec(
                name=parts[0],
                scale=parts[1],
                min=float(parts[2]),
                max=float(parts[3]),
                count=int(parts[4]),
            )
        )
    if not dims:
        raise ConfigError("grid section has no dim entries")
    return landscape_mod.GridSpec(dims=tuple(dims))


def parse_run_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep option case: C and c are distinct bounds
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc))
    kw: dict = {}
    if parser.has_section("landscape"):
        sec = parser["landscape"]
        if "path" in sec:
            kw["landscape_path"] = sec["path"]
        else:
            synth = {"generator": sec.get("generator", "needle"), "seed": sec.getint("seed", 0)}
            for key in sec:
                if key in ("generator", "seed"):
                    continue
                synth[key] = sec[key]
            kw["synth"] = synth
    if parser.has_section("grid"):
        kw["grid"] = _parse_grid(parser["grid"])
    run = parser["run"] if parser.has_section("run") else {}
    kw["strategies"] = tuple(run.get("strategies", "uniform").split())
    if "theta" in run:
        kw["theta"] = float(run["theta"])
    kw["C"] = float(run.get("C", 1.0))
    kw["c"] = float(run.get("c", 1.0))
    kw["master_seed"] = int(run.get("master_seed", 0))
    kw["repetitions"] = int(run.get("repetitions", 1))
    kw["direction"] = run.get("direction", "max")
    if parser.has_section("sweep"):
        sweep = parser["sweep"]
        if "gamma" in sweep:
            kw["gammas"] = tuple(float(g) for g in sweep["gamma"].split())
        if "fixed_t" in sweep:
            kw["fixed_ts"] = tuple(int(t) for t in sweep["fixed_t"].split())
    if parser.has_section("gp"):
        gp = parser["gp"]
        kw["gp"] = surrogate.GpConfig(
            lengthscales=tuple(float(x) for x in gp.get("lengthscales", "1.0").split()),
            signal_variance=float(gp.get("signal_variance", 1.0)),
            noise_variance=float(gp.get("noise_variance", 0.0)),
            jitter=float(gp.get("jitter", 1e-8)),
            prior_mean=float(gp.get("prior_mean", 0.0)),
            tau=float(gp.get("tau", 0.0)),
            beta=float(gp.get("beta", 0.0)),
        )
    if parser.has_section("privacy"):
        priv = parser["privacy"]
        kw["privacy_mode"] = priv.get("mode", "black")
        if "pure_eps" in priv:
            kw["base_pure_eps"] = float(priv["pure_eps"])
        if "total_eps" in priv:
            kw["total_eps"] = float(priv["total_eps"])
        if "delta" in priv:
            kw["delta"] = float(priv["delta"])
    try:
        return RunConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))


def build_landscape(config: RunConfig) -> landscape_mod.Landscape:
    if config.landscape_path:
        return landscape_mod.load_landscape(config.landscape_path)
    if config.synth is None or config.grid is None:
        raise ConfigError("config needs either a landscape path or synth + grid")
    synth = dict(config.synth)
    generator = synth.pop("generator")
    seed = int(synth.pop("seed"))
    kw = {}
    for key, val in synth.items():
        if key == "k":
            kw[key] = int(val)
        elif key in ("amplitude_range", "width_range"):
            kw[key] = tuple(float(x) for x in val.split())
        else:
            kw[key] = float(val)
    return landscape_mod.synth_landscape(config.grid, generator, seed, **kw)


def make_strategy(name: str, config: RunConfig, land: landscape_mod.Landscape, prior: Prior):
    if name == "uniform":
        return core.make_uniform_strategy(prior)
    if name == "gp":
        if config.gp is None:
            raise ConfigError("gp strategy requires a [gp] section")
        return core.make_gp_strategy(
            land.grid.points(), config.gp, prior, log_mask=land.grid.log_mask()
        )
    raise ConfigError(f"unknown strategy {name!r}")


def strategy_bounds(name: str, config: RunConfig) -> AdaptivityBounds:
    """Uniform never moves off the prior, so its ratio bounds are exactly 1."""
    if name == "uniform":
        return AdaptivityBounds(C=1.0, c=1.0)
    return AdaptivityBounds(C=config.C, c=config.c)


def _one_rep(args) -> float:
    (config, land, name, sweep_kind, sweep_value, rep) = args
    prior = Prior(uniform_density(np.ones(land.grid.size)))
    strategy = make_strategy(name, config, land, prior)
    bounds = strategy_bounds(name, config)
    sign = 1.0 if config.direction == "max" else -1.0
    oracle = lambda idx, rng: sign * land.sample_score(idx, rng)
    rng = core.derive_rng(config.master_seed, rep)
    if sweep_kind == "T":
        transcript = core.run_fixed_t(
            oracle, strategy, int(sweep_value), bounds, prior, rng,
            grid_points=land.grid.points(),
        )
    else:
        params = NegBinParams(config.theta, float(sweep_value))
        transcript = core.run_hypo(
            oracle, strategy, params, bounds, prior, rng,
            grid_points=land.grid.points(),
        )
    return land.true_score(transcript.best.lambda_index)


@dataclass(frozen=True)
class BenchRow:
    strategy: str
    sweep_kind: str  # "T" or "gamma"
    sweep_value: float
    mean: float
    stderr: float
    ci95: float
    repetitions: int
    privacy_mode: str = ""
    base_eps: str = ""
    total_eps: str = ""


def _privacy_fields(config: RunConfig, name: str, gamma: float) -> tuple[str, str, str]:
    """Pure-DP accounting columns for a gamma-sweep row.

    White-box: the total is fixed and the base budget is backed out of it.
    Black-box: the base budget is fixed and adaptivity costs extra.
    """
    if config.privacy_mode is None or config.theta is None:
        return "", "", ""
    params = NegBinParams(config.theta, gamma)
    bounds = strategy_bounds(name, config)
    if config.privacy_mode == "white":
        if config.total_eps is None:
            raise ConfigError("white-box accounting requires total_eps")
        base = config.total_eps / (2 + config.theta) - bounds.log_ratio
        if base < 0:
            raise ValueError("total_eps too small for the adaptivity cost")
        total = config.total_eps
    else:
        if config.base_pure_eps is None:
            raise ConfigError("black-box accounting requires pure_eps")
        base = config.base_pure_eps
        total = accountant.hypo_pure_dp(base, params, bounds)
    return config.privacy_mode, repr(float(base)), repr(float(total))


def run_bench(config: RunConfig, jobs: int = 1) -> list:
    land = build_landscape(config)
    sweeps = [("T", float(t)) for t in config.fixed_ts]
    sweeps += [("gamma", g) for g in config.gammas]
    rows = []
    for name in config.strategies:
        for sweep_kind, sweep_value in sweeps:
            tasks = [
                (config, land, name, sweep_kind, sweep_value, rep)
                for rep in range(config.repetitions)
            ]
            if jobs > 1:
                with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                    metrics = list(pool.map(_one_rep, tasks, chunksize=64))
            else:
                metrics = [_one_rep(t) for t in tasks]
            metrics = np.array(metrics)
            stderr = (
                float(metrics.std(ddof=1) / math.sqrt(len(metrics)))
                if len(metrics) > 1
                else 0.0
            )
            mode, base_eps, total_eps = ("", "", "")
            if sweep_kind == "gamma":
                mode, base_eps, total_eps = _privacy_fields(config, name, sweep_value)
            rows.append(
                BenchRow(
                    strategy=name,
                    sweep_kind=sweep_kind,
                    sweep_value=sweep_value,
                    mean=float(metrics.mean()),
                    stderr=stderr,
                    ci95=1.96 * stderr,
                    repetitions=len(metrics),
                    privacy_mode=mode,
                    base_eps=base_eps,
                    total_eps=total_eps,
                )
            )
    return rows


REPORT_COLUMNS = [
    "strategy", "sweep_kind", "sweep_value", "mean", "stderr", "ci95",
    "repetitions", "privacy_mode", "base_eps", "total_eps",
]
PLOT_COLUMNS = ["strategy", "sweep_kind", "sweep_value", "mean", "ci_low", "ci_high"]


def report_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow([
            r.strategy, r.sweep_kind, repr(r.sweep_value), repr(r.mean),
            repr(r.stderr), repr(r.ci95), r.repetitions,
            r.privacy_mode, r.base_eps, r.total_eps,
        ])
    return buf.getvalue()


def plot_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PLOT_COLUMNS)
    for r in rows:
        writer.writerow([
            r.strategy, r.sweep_kind, repr(r.sweep_value), repr(r.mean),
            repr(r.mean - r.ci95), repr(r.mean + r.ci95),
        ])
    return buf.getvalue()
