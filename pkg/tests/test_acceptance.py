"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line with the measured quantity so the
suite output doubles as a release report.
"""

import math

import numpy as np
import pytest
from scipy import optimize

from dphypo import audit, bench, cli, core, negbin
from dphypo.accountant import AdaptivityBounds, hypo_pure_dp, hypo_rdp
from dphypo.audit import FiniteMechanism, LastOutcomeAuditStrategy, UniformAuditStrategy, audit_bound
from dphypo.negbin import NegBinParams
from dphypo.projection import DiscreteDensity, Prior, project_kl_penalized, project_l2, uniform_density

NO_ADAPT = AdaptivityBounds(C=1.0, c=1.0)


def report(name, detail):
    print(f"PASS {name}: {detail}")


class TestCriterion1PureDpRecovery:
    def test_three_epsilon(self):
        """hypo_pure_dp at theta=1, C=c=1 is exactly 3 * epsilon."""
        params = NegBinParams(theta=1.0, gamma=0.5)
        worst = 0.0
        for eps in (0.1, 1.0, 5.0):
            got = hypo_pure_dp(eps, params, NO_ADAPT)
            worst = max(worst, abs(got - 3 * eps))
            assert abs(got - 3 * eps) <= 1e-12
        report("criterion 1 (pure-DP 3eps recovery)", f"max abs error {worst:.3e} <= 1e-12")


class TestCriterion2RdpReduction:
    def test_no_adaptivity_reduction(self):
        """At C=c=1 the RDP bound equals the formula without the log(C/c) terms."""

        def reduced(alpha, eps, alpha_hat, eps_hat, theta, gamma):
            inv = 0.0 if math.isinf(alpha_hat) else 1.0 / alpha_hat
            mean = negbin.mean(NegBinParams(theta, gamma))
            return (
                eps
                + (1 + theta) * (1 - inv) * eps_hat
                + (1 + theta) * math.log(1 / gamma) * inv
                + math.log(mean) / (alpha - 1)
            )

        worst = 0.0
        count = 0
        for alpha in (1.5, 2.0, 4.0, 16.0):
            for alpha_hat in (1.0, 2.0, 8.0, math.inf):
                for theta in (-0.5, 0.0, 1.0, 3.0):
                    for gamma in (0.1, 0.5, 0.9):
                        params = NegBinParams(theta, gamma)
                        a = hypo_rdp(alpha, 0.7, alpha_hat, 0.4, params, NO_ADAPT)
                        b = reduced(alpha, 0.7, alpha_hat, 0.4, theta, gamma)
                        worst = max(worst, abs(a - b))
                        count += 1
                        assert abs(a - b) <= 1e-12
        report("criterion 2 (C=c=1 RDP reduction)",
               f"max abs error {worst:.3e} <= 1e-12 over {count} grid cells")


class TestCriterion3NegBin:
    CASES = ((1.0, 0.5), (0.0, 0.5), (2.0, 0.1))

    def test_mass_mean_and_pgf(self):
        worst_mass, worst_mean_rel, worst_pgf = 0.0, 0.0, 0.0
        for i, (theta, gamma) in enumerate(self.CASES):
            params = NegBinParams(theta, gamma)
            cap = negbin.support_cap(params, 1e-12)
            mass = sum(negbin.pmf(params, k) for k in range(1, cap + 1))
            worst_mass = max(worst_mass, abs(mass - 1))
            assert abs(mass - 1) <= 1e-9

            draws = negbin.sample_many(params, 1_000_000, np.random.default_rng(100 + i))
            rel = abs(draws.mean() - negbin.mean(params)) / negbin.mean(params)
            worst_mean_rel = max(worst_mean_rel, rel)
            assert rel < 0.01

            err = abs(negbin.pgf_derivative(params, 1.0) - negbin.mean(params))
            worst_pgf = max(worst_pgf, err)
            assert err <= 1e-9
        report("criterion 3 (NegBin mass/mean/pgf)",
               f"mass err {worst_mass:.2e} <= 1e-9, MC mean rel err {worst_mean_rel:.4f} < 1%, "
               f"pgf'(1) err {worst_pgf:.2e} <= 1e-9")


class TestCriterion4Projection:
    def test_against_slsqp_oracle(self):
        """Dual bisection vs an independent constrained optimizer, 100 instances."""
        rng = np.random.default_rng(42)
        worst_linf, worst_box, worst_norm, worst_kl = 0.0, 0.0, 0.0, 0.0
        for _ in range(100):
            n = 10
            w = rng.uniform(0.5, 2.0, n)
            p0 = rng.uniform(0.1, 1.0, n)
            p0 /= p0 @ w
            prior = Prior(DiscreteDensity(values=p0, weights=w))
            v = rng.uniform(0.01, 1.0, n)
            v /= v @ w
            pi = DiscreteDensity(values=v, weights=w)
            C = float(rng.uniform(1.05, 3.0))
            c = float(rng.uniform(0.2, 0.95))
            bounds = AdaptivityBounds(C=C, c=c)

            got = project_l2(pi, bounds, prior)

            res = optimize.minimize(
                lambda f: float(np.sum(w * (f - v) ** 2)),
                x0=np.clip(v, c * p0, C * p0),
                jac=lambda f: 2 * w * (f - v),
                bounds=list(zip(c * p0, C * p0)),
                constraints=[{"type": "eq", "fun": lambda f: f @ w - 1.0,
                              "jac": lambda f: w}],
                method="SLSQP",
                options={"ftol": 1e-14, "maxiter": 500},
            )
            assert res.success
            worst_linf = max(worst_linf, float(np.max(np.abs(got.values - res.x))))
            worst_box = max(
                worst_box,
                float(np.max(np.maximum(c * p0 - got.values, got.values - C * p0))),
            )
            worst_norm = max(worst_norm, abs(float(got.values @ w) - 1.0))

            kl0 = project_kl_penalized(pi, bounds, prior, nu=0.0)
            worst_kl = max(worst_kl, float(np.max(np.abs(kl0.values - got.values))))

        assert worst_linf <= 1e-6
        assert worst_box <= 1e-9
        assert worst_norm <= 1e-9
        assert worst_kl <= 1e-10
        report("criterion 4 (projection optimality)",
               f"oracle linf {worst_linf:.2e} <= 1e-6, box/norm violation "
               f"{max(worst_box, worst_norm):.2e} <= 1e-9, KL(nu=0) vs L2 {worst_kl:.2e} <= 1e-10")


def gap_mechanism(eps0=0.3):
    """2 candidates, 3 outcomes, per-candidate pure-DP gap exactly eps0."""
    up, down = math.exp(eps0), math.exp(-eps0)
    p = np.array([[0.2, 0.3, 0.5], [0.5, 0.3, 0.2]])
    p_prime = np.array(
        [
            [0.2 * up, 1 - 0.2 * up - 0.5 * down, 0.5 * down],
            [0.5 * down, 1 - 0.5 * down - 0.2 * up, 0.2 * up],
        ]
    )
    return FiniteMechanism(outcomes=(0.0, 1.0, 2.0), p=p, p_prime=p_prime)


class TestCriterion5PrivacyAudit:
    PARAMS = NegBinParams(theta=1.0, gamma=0.5)
    ALPHAS = (2.0, 4.0, 8.0)

    def check(self, strategy, bounds, label):
        report_obj = audit_bound(gap_mechanism(0.3), strategy, self.PARAMS, bounds,
                                 alphas=self.ALPHAS, tail=1e-10)
        min_slack = min(r.slack for r in report_obj.rows)
        assert report_obj.passed
        assert min_slack > 0
        report(f"criterion 5 (audit, {label})",
               "; ".join(f"alpha={r.alpha:g} realized={r.realized:.6f} "
                         f"bound={r.bound:.6f}" for r in report_obj.rows)
               + f"; min slack {min_slack:.4f} > 0")

    def test_uniform_strategy(self):
        self.check(UniformAuditStrategy(2), NO_ADAPT, "uniform")

    def test_saturating_adaptive_strategy(self):
        # raw densities outside the box project onto its faces: the
        # density ratio saturates C/c = 2 at every step after the first
        strategy = LastOutcomeAuditStrategy(
            initial_probs=(0.5, 0.5),
            probs_by_outcome=[(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)],
        )
        self.check(strategy, AdaptivityBounds(C=4 / 3, c=2 / 3), "C/c=2 adaptive")


class TestCriterion6UniformReduction:
    def test_byte_equality_with_direct_algorithm(self):
        """run_hypo with the uniform strategy vs a direct transcription of the
        non-adaptive random-search algorithm: draw T, then T independent
        uniform candidate draws, score each, release the best."""
        n = 7
        params = NegBinParams(theta=1.0, gamma=0.4)
        prior = Prior(uniform_density(np.ones(n)))
        grid_points = np.arange(n, dtype=float)[:, None]

        def oracle(idx, rng):
            return float(idx) + 0.01 * rng.standard_normal()

        def direct_run(seed):
            rng = core.derive_rng(9000, seed)
            t = negbin.sample(params, rng)
            probs = np.full(n, 1 / n)
            cdf = np.cumsum(probs)
            trials = []
            for j in range(t):
                u = rng.random() * cdf[-1]
                idx = int(np.searchsorted(cdf, u, side="right"))
                q = oracle(idx, rng)
                trials.append(core.Trial(lambda_index=idx, lam=(float(idx),),
                                         q=q, iteration=j))
            best = trials[0]
            for tr in trials[1:]:
                if tr.q > best.q:
                    best = tr
            return core.Transcript(seed=seed, t=t, trials=trials, best=best).to_json()

        for seed in range(1000):
            rng = core.derive_rng(9000, seed)
            strategy = core.make_uniform_strategy(prior)
            got = core.run_hypo(oracle, strategy, params, NO_ADAPT, prior, rng,
                                grid_points=grid_points, seed=seed).to_json()
            assert got == direct_run(seed)
        report("criterion 6 (uniform reduction)",
               "byte-identical transcripts over 1000 seeded runs")


NEEDLE_BENCH = """
[landscape]
generator = needle
seed = 7
background = 0.90
needle_value = 0.95
fraction = 0.003125
noise_std = 0.1

[grid]
dim1 = x linear 0 1 320

[run]
strategies = {strategies}
C = {C}
c = {c}
master_seed = 2024
repetitions = {reps}

[sweep]
fixed_t = 16 32 64

[gp]
lengthscales = 0.001
signal_variance = 0.0025
noise_variance = 0.01
prior_mean = 0.0
tau = 0.1
beta = {beta}
"""

GP_C = 16.0
GP_c = 0.5
GP_BETA = 300.0
UNIFORM_REPS = 4000
GP_REPS = 1600


class TestCriterion7AdaptivityBenefit:
    def test_gp_beats_uniform_on_needle(self):
        uni_cfg = bench.parse_run_config(
            NEEDLE_BENCH.format(strategies="uniform", C=1, c=1, beta=0, reps=UNIFORM_REPS)
        )
        gp_cfg = bench.parse_run_config(
            NEEDLE_BENCH.format(strategies="gp", C=GP_C, c=GP_c, beta=GP_BETA, reps=GP_REPS)
        )
        uni_rows = bench.run_bench(uni_cfg)
        gp_rows = bench.run_bench(gp_cfg)
        lines = []
        significant = False
        for u, g in zip(uni_rows, gp_rows):
            gap = g.mean - u.mean
            se = math.sqrt(u.stderr**2 + g.stderr**2)
            z = gap / se if se > 0 else math.inf
            lines.append(f"T={int(u.sweep_value)} uniform={u.mean:.5f} gp={g.mean:.5f} "
                         f"gap={gap:.5f} z={z:.2f}")
            assert gap >= 0, f"GP below uniform at T={u.sweep_value}: {lines[-1]}"
            if gap - 1.645 * se > 0:
                significant = True
        assert significant, "no T with a 95%-significant GP advantage: " + "; ".join(lines)
        report("criterion 7 (adaptivity benefit)", "; ".join(lines))


class TestCriterion8Determinism:
    CONFIG = """
[landscape]
generator = needle
seed = 3
background = 0.9
needle_value = 0.95
fraction = 0.05
noise_std = 0.1

[grid]
dim1 = x linear 0 1 40

[run]
strategies = uniform gp
C = 4
c = 0.5
theta = 1.0
master_seed = 17
repetitions = 12

[sweep]
gamma = 0.5
fixed_t = 4

[gp]
lengthscales = 0.02
signal_variance = 0.0025
noise_variance = 0.01
tau = 0.1
beta = 100
"""

    def test_run_and_bench_byte_identical(self, tmp_path):
        cfg_path = tmp_path / "bench.ini"
        cfg_path.write_text(self.CONFIG)

        transcripts = []
        for i in range(2):
            out = tmp_path / f"run{i}.json"
            rc = cli.main(["run", "--config", str(cfg_path), "--strategy", "gp",
                           "--fixed-t", "6", "--seed", "5", "--out", str(out)])
            assert rc == 0
            transcripts.append(out.read_bytes())
        assert transcripts[0] == transcripts[1]

        reports = []
        for jobs in ("1", "4", "1", "4"):
            outdir = tmp_path / f"bench_{jobs}_{len(reports)}"
            rc = cli.main(["bench", "--config", str(cfg_path), "--out", str(outdir),
                           "--jobs", jobs])
            assert rc == 0
            reports.append(
                (outdir / "bench_report.csv").read_bytes()
                + (outdir / "plot_data.csv").read_bytes()
            )
        assert len(set(reports)) == 1
        report("criterion 8 (determinism)",
               "cmd_run and cmd_bench byte-identical across repeats and --jobs in {1, 4}")
