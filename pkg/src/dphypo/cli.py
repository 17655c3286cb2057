"""Command-line entry points.

Subcommands: account, project, run, bench, audit, landscape. Data goes to
stdout or the requested output files; diagnostics go to stderr. Exit
codes: 0 ok, 2 configuration error, 3 infeasible bounds, 4 numeric
failure, 5 audit failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import accountant, audit as audit_mod, bench, core, landscape as landscape_mod
from . import projection
from .accountant import AdaptivityBounds, RdpCurve
from .bench import ConfigError
from .negbin import NegBinParams
from .projection import DiscreteDensity, Prior, uniform_density

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4
EXIT_AUDIT_FAIL = 5


def _bounds(args) -> AdaptivityBounds:
    return AdaptivityBounds(C=args.C, c=args.c)


def _negbin(args) -> NegBinParams:
    return NegBinParams(theta=args.theta, gamma=args.gamma)


def cmd_account(args) -> int:
    bounds = _bounds(args)
    params = _negbin(args)
    report: dict = {"theta": args.theta, "gamma": args.gamma, "C": args.C, "c": args.c}
    if args.pure_eps is not None:
        report["base_pure_eps"] = args.pure_eps
        report["total_pure_eps"] = accountant.hypo_pure_dp(args.pure_eps, params, bounds)
        if args.total_eps is not None:
            base = args.total_eps / (2 + args.theta) - bounds.log_ratio
            if base < 0:
                raise ValueError("total budget below the adaptivity cost")
            report["solved_base_pure_eps"] = base
            report["target_total_eps"] = args.total_eps
    else:
        with open(args.rdp_curve) as fh:
            curve = RdpCurve.from_json(fh.read())
        out_curve = accountant.hypo_curve(curve, params, bounds)
        report["total_rdp"] = [
            {"alpha": p.alpha, "epsilon": p.epsilon} for p in out_curve.points
        ]
        if out_curve.pure_epsilon is not None:
            report["total_pure_eps"] = out_curve.pure_epsilon
        if args.delta is not None:
            report["delta"] = args.delta
            report["total_eps_at_delta"] = accountant.rdp_to_dp(out_curve, args.delta)
        if args.total_eps is not None:
            if args.delta is None:
                raise ConfigError("--total-eps with an RDP curve requires --delta")
            shape = lambda s: _scale_curve(curve, s)
            report["target_total_eps"] = args.total_eps
            report["solved_base_scale"] = accountant.solve_base_budget(
                args.total_eps, args.delta, params, bounds, shape
            )
    print(json.dumps(report, indent=2))
    return 0


def _scale_curve(curve: RdpCurve, s: float) -> RdpCurve:
    points = tuple(accountant.RdpPoint(p.alpha, s * p.epsilon) for p in curve.points)
    pure = None if curve.pure_epsilon is None else s * curve.pure_epsilon
    return RdpCurve(points=points, pure_epsilon=pure)


def cmd_project(args) -> int:
    with open(args.input) as fh:
        density = DiscreteDensity.from_csv(fh.read())
    if args.prior:
        with open(args.prior) as fh:
            prior = Prior(DiscreteDensity.from_csv(fh.read()))
    else:
        prior = Prior(uniform_density(density.weights))
    bounds = _bounds(args)
    if args.nu > 0:
        out = projection.project_kl_penalized(density, bounds, prior, args.nu)
    else:
        out = projection.project_l2(density, bounds, prior)
    text = out.to_csv()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _load_run_setup(args):
    config = bench.parse_run_config(open(args.config).read())
    land = bench.build_landscape(config)
    prior = Prior(uniform_density(np.ones(land.grid.size)))
    name = args.strategy or config.strategies[0]
    strategy = bench.make_strategy(name, config, land, prior)
    bounds = bench.strategy_bounds(name, config)
    return config, land, prior, name, strategy, bounds


def cmd_run(args) -> int:
    config, land, prior, name, strategy, bounds = _load_run_setup(args)
    sign = 1.0 if config.direction == "max" else -1.0
    oracle = lambda idx, rng: sign * land.sample_score(idx, rng)
    seed = config.master_seed if args.seed is None else args.seed
    rng = core.derive_rng(seed, 0)
    digest = core.digest_config({"config": open(args.config).read(), "strategy": name})
    if args.fixed_t is not None:
        transcript = core.run_fixed_t(
            oracle, strategy, args.fixed_t, bounds, prior, rng,
            grid_points=land.grid.points(), seed=seed, config_digest=digest,
        )
    else:
        if config.theta is None or not config.gammas:
            raise ConfigError("run needs either --fixed-t or theta + gamma in config")
        params = NegBinParams(config.theta, config.gammas[0])
        transcript = core.run_hypo(
            oracle, strategy, params, bounds, prior, rng,
            grid_points=land.grid.points(), seed=seed, config_digest=digest,
        )
    text = transcript.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def cmd_bench(args) -> int:
    config = bench.parse_run_config(open(args.config).read())
    jobs = args.jobs or int(os.environ.get("DPHYPO_JOBS", "1"))
    rows = bench.run_bench(config, jobs=jobs)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "bench_report.csv"), "w") as fh:
        fh.write(bench.report_csv(rows))
    with open(os.path.join(args.out, "plot_data.csv"), "w") as fh:
        fh.write(bench.plot_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def cmd_audit(args) -> int:
    with open(args.mechanism) as fh:
        mech = audit_mod.FiniteMechanism.from_json(fh.read())
    params = _negbin(args)
    bounds = _bounds(args)
    strategy = audit_mod.UniformAuditStrategy(mech.n_candidates)
    alphas = [float(a) for a in args.alphas.split(",")]
    report = audit_mod.audit_bound(
        mech, strategy, params, bounds, alphas, tail=args.tail
    )
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0 if report.passed else EXIT_AUDIT_FAIL


def _parse_dim(text: str) -> landscape_mod.DimSpec:
    parts = text.split(":")
    if len(parts) != 5:
        raise ConfigError(f"dim must be name:scale:min:max:count, got {text!r}")
    return landscape_mod.DimSpec(
        name=parts[0], scale=parts[1], min=float(parts[2]),
        max=float(parts[3]), count=int(parts[4]),
    )


def cmd_landscape(args) -> int:
    grid = landscape_mod.GridSpec(dims=tuple(_parse_dim(d) for d in args.dim))
    kw = {}
    if args.generator == "needle":
        kw = {
            "background": args.background,
            "needle_value": args.needle_value,
            "fraction": args.fraction,
            "noise_std": args.noise_std,
        }
    else:
        kw = {
            "k": args.bumps,
            "amplitude_range": tuple(args.amplitude_range),
            "width_range": tuple(args.width_range),
            "background": args.background,
            "noise_std": args.noise_std,
        }
    land = landscape_mod.synth_landscape(grid, args.generator, args.seed, **kw)
    landscape_mod.save_landscape(land, args.out)
    print(f"wrote {grid.size}-point landscape to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dphypo",
        description="Adaptive differentially private hyperparameter optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("account", help="privacy accounting for a whole search")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--pure-eps", type=float, dest="pure_eps")
    p.add_argument("--rdp-curve", dest="rdp_curve", help="JSON file with the base RDP curve")
    p.add_argument("--delta", type=float)
    p.add_argument("--total-eps", type=float, dest="total_eps",
                   help="solve for the base budget meeting this total")
    p.set_defaults(func=cmd_account)

    p = sub.add_parser("project", help="project a density CSV onto the bounded set")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--nu", type=float, default=0.0, help="KL penalty weight")
    p.add_argument("--prior", help="prior density CSV (default: uniform)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("run", help="one tuning run, transcript to JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--strategy", choices=["uniform", "gp"])
    p.add_argument("--fixed-t", type=int, dest="fixed_t")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="seeded benchmark sweep, CSV reports")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, help="worker count (default $DPHYPO_JOBS or 1)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("audit", help="verify the privacy bound by exact enumeration")
    p.add_argument("--mechanism", required=True, help="FiniteMechanism JSON file")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--alphas", default="2,4,8")
    p.add_argument("--tail", type=float, default=audit_mod.DEFAULT_TAIL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("landscape", help="synthesize a landscape CSV")
    p.add_argument("--generator", choices=["needle", "gaussian-bumps"], required=True)
    p.add_argument("--dim", action="append", required=True,
                   help="name:scale:min:max:count (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--background", type=float, default=0.0)
    p.add_argument("--noise-std", type=float, default=0.0, dest="noise_std")
    p.add_argument("--needle-value", type=float, dest="needle_value")
    p.add_argument("--fraction", type=float)
    p.add_argument("--bumps", type=int, default=1)
    p.add_argument("--amplitude-range", type=float, nargs=2, default=(0.5, 1.0))
    p.add_argument("--width-range", type=float, nargs=2, default=(0.05, 0.2))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_landscape)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except projection.InfeasibleBoundsError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
