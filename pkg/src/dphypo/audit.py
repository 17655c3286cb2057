"""Empirical verification of the search's privacy bound on small instances.

A FiniteMechanism gives, for each candidate, exact outcome distributions on
a dataset and on a neighbor. For a deterministic sampling strategy the
output distribution of the whole tuning loop (the released best outcome)
can be computed exactly: the loop is replayed over all outcome histories,
collapsed onto the strategy's sufficient state and the running maximum,
weighted by the stopping-time pmf. The realized Renyi divergence between
the two output distributions is then compared against the accountant's
bound computed from the per-candidate divergences.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import negbin, projection
from .accountant import AdaptivityBounds, RdpCurve, RdpPoint, hypo_rdp_best
from .negbin import NegBinParams
from .projection import DiscreteDensity, Prior

BOUND_TOL = 1e-9
ROW_SUM_TOL = 1e-12
DEFAULT_TAIL = 1e-10
MAX_STATES = 10_000_000


@dataclass(frozen=True)
class FiniteMechanism:
    """Exact per-candidate outcome distributions on two neighboring datasets.

    outcomes: ordered outcome values y_1 < ... < y_m.
    p, p_prime: (n_candidates, m) row-stochastic matrices with strictly
    positive entries (so all Renyi divergences are finite).
    """

    outcomes: tuple
    p: np.ndarray
    p_prime: np.ndarray

    def __post_init__(self):
        outcomes = tuple(float(y) for y in self.outcomes)
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        pp = np.atleast_2d(np.asarray(self.p_prime, dtype=float))
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_prime", pp)
        if any(b <= a for a, b in zip(outcomes, outcomes[1:])):
            raise ValueError("outcomes must be strictly increasing")
        m = len(outcomes)
        if p.shape != pp.shape or p.shape[1] != m:
            raise ValueError("probability tables must be (n_candidates, n_outcomes)")
        for mat in (p, pp):
            if np.any(mat <= 0):
                raise ValueError("outcome probabilities must be strictly positive")
            if np.any(np.abs(mat.sum(axis=1) - 1) > ROW_SUM_TOL):
                raise ValueError("each outcome distribution must sum to 1")

    @property
    def n_candidates(self) -> int:
        return self.p.shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def side(self, which: str) -> np.ndarray:
        if which == "D":
            return self.p
        if which == "D'":
            return self.p_prime
        raise ValueError("dataset side must be 'D' or \"D'\"")

    def to_json(self) -> str:
        return json.dumps(
            {
                "outcomes": list(self.outcomes),
                "p": self.p.tolist(),
                "p_prime": self.p_prime.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "FiniteMechanism":
        obj = json.loads(text)
        return cls(
            outcomes=tuple(obj["outcomes"]),
            p=np.array(obj["p"]),
            p_prime=np.array(obj["p_prime"]),
        )


def renyi_divergence(p, q, alpha: float) -> float:
    """D_alpha(p || q) for discrete distributions with positive entries."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if math.isinf(alpha):
        return float(np.max(np.log(p / q)))
    if alpha == 1:
        return float(np.sum(p * np.log(p / q)))
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return float(np.log(np.sum(p**alpha * q ** (1 - alpha))) / (alpha - 1))


def mechanism_rdp_curve(mech: FiniteMechanism, alphas) -> RdpCurve:
    """Worst-case per-candidate RDP curve sup_l D_alpha(P_l(D) || P_l(D'))."""
    points = []
    for alpha in sorted(set(float(a) for a in alphas)):
        eps = max(
            renyi_divergence(mech.p[i], mech.p_prime[i], alpha)
            for i in range(mech.n_candidates)
        )
        points.append(RdpPoint(alpha, max(eps, 0.0)))
    pure = max(
        renyi_divergence(mech.p[i], mech.p_prime[i], math.inf)
        for i in range(mech.n_candidates)
    )
    return RdpCurve(points=tuple(points), pure_epsilon=max(pure, 0.0))


class AuditStrategy:
    """Deterministic density rule driven by the outcome history.

    The state must be a sufficient statistic of the outcome history: the
    raw candidate density is a pure function of it. raw_probs returns the
    pre-projection sampling probabilities over candidates.
    """

    def initial_state(self):
        raise NotImplementedError

    def next_state(self, state, outcome_index: int):
        raise NotImplementedError

    def raw_probs(self, state) -> np.ndarray:
        raise NotImplementedError


class UniformAuditStrategy(AuditStrategy):
    def __init__(self, n_candidates: int):
        self.n = n_candidates

    def initial_state(self):
        return None

    def next_state(self, state, outcome_index):
        return None

    def raw_probs(self, state):
        return np.full(self.n, 1 / self.n)


class LastOutcomeAuditStrategy(AuditStrategy):
    """Density depends only on the most recent outcome (m + 1 states)."""

    def __init__(self, initial_probs, probs_by_outcome):
        self.initial_probs = np.asarray(initial_probs, dtype=float)
        self.table = [np.asarray(p, dtype=float) for p in probs_by_outcome]

    def initial_state(self):
        return -1

    def next_state(self, state, outcome_index):
        return outcome_index

    def raw_probs(self, state):
        return self.initial_probs if state == -1 else self.table[state]


class FullHistoryAuditStrategy(AuditStrategy):
    """Generic wrapper: state is the whole outcome history (exponential)."""

    def __init__(self, density_fn):
        self.density_fn = density_fn

    def initial_state(self):
        return ()

    def next_state(self, state, outcome_index):
        return state + (outcome_index,)

    def raw_probs(self, state):
        return np.asarray(self.density_fn(state), dtype=float)


def _projected_sampling_probs(
    raw_probs: np.ndarray, bounds: AdaptivityBounds, prior: Prior
) -> np.ndarray:
    density = DiscreteDensity.from_probabilities(raw_probs, prior.density.weights)
    return projection.project_l2(density, bounds, prior).probabilities


def exact_output_distribution(
    mech: FiniteMechanism,
    strategy: AuditStrategy,
    params: NegBinParams,
    bounds: AdaptivityBounds,
    dataset_side: str = "D",
    t_cap: int | None = None,
    tail: float = DEFAULT_TAIL,
    max_states: int = MAX_STATES,
) -> np.ndarray:
    """Exact distribution of the released best outcome.

    Enumerates outcome histories up to the stopping-time cap, collapsing
    histories that share (strategy state, running max); the collapse is
    exact because the strategy's density is a pure function of its state.
    The returned vector sums to 1 minus the stopping-time tail mass.
    """
    probs_table = mech.side(dataset_side)
    prior = Prior(projection.uniform_density(np.ones(mech.n_candidates)))
    if t_cap is None:
        t_cap = negbin.support_cap(params, tail)
    # outcome distribution for a given strategy state, memoized on the state
    outcome_dist_cache: dict = {}

    def outcome_dist(state_key, state):
        if state_key not in outcome_dist_cache:
            sampling = _projected_sampling_probs(strategy.raw_probs(state), bounds, prior)
            outcome_dist_cache[state_key] = sampling @ probs_table
        return outcome_dist_cache[state_key]

    m = mech.n_outcomes
    out = np.zeros(m)
    s0 = strategy.initial_state()
    # mass indexed by (state, running max outcome index); -1 = no trial yet
    front = {(s0, -1): 1.0}
    states = {s0: s0}
    for k in range(1, t_cap + 1):
        new_front: dict = {}
        for (skey, mx), mass in front.items():
            o = outcome_dist(skey, states[skey])
            for y in range(m):
                ns = strategy.next_state(states[skey], y)
                states.setdefault(ns, ns)
                key = (ns, max(mx, y))
                new_front[key] = new_front.get(key, 0.0) + mass * o[y]
        if len(new_front) > max_states:
            raise RuntimeError(
                f"enumeration guard exceeded: {len(new_front)} states at depth {k}"
            )
        front = new_front
        pk = negbin.pmf(params, k)
        for (_, mx), mass in front.items():
            out[mx] += pk * mass
    return out


@dataclass(frozen=True)
class AuditRow:
    alpha: float
    realized: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.realized

    @property
    def passed(self) -> bool:
        return self.realized <= self.bound + BOUND_TOL


@dataclass(frozen=True)
class AuditReport:
    rows: tuple
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> str:
        return json.dumps(
            {
                "passed": self.passed,
                "note": self.note,
                "rows": [
                    {
                        "alpha": r.alpha,
                        "realized": r.realized,
                        "bound": r.bound,
                        "slack": r.slack,
                        "pass": r.passed,
                    }
                    for r in self.rows
                ],
            },
            indent=2,
        )


# alpha_hat orders tried, besides the audited alphas and the pure point
_ALPHA_HAT_GRID = (1.25, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0, 32.0, 64.0)


def audit_bound(
    mech: FiniteMechanism,
    strategy: AuditStrategy,
    params: NegBinParams,
    bounds: AdaptivityBounds,
    alphas,
    tail: float = DEFAULT_TAIL,
    max_states: int = MAX_STATES,
) -> AuditReport:
    """Compare realized output divergences against the accountant's bound.

    Only deterministic (state-driven) strategies are audited exactly;
    stochastic rules must be represented by their deterministic envelope.
    """
    alphas = [float(a) for a in alphas]
    out_d = exact_output_distribution(
        mech, strategy, params, bounds, "D", tail=tail, max_states=max_states
    )
    out_dp = exact_output_distribution(
        mech, strategy, params, bounds, "D'", tail=tail, max_states=max_states
    )
    # renormalize away the (identical) stopping-time tail before comparing
    out_d = out_d / out_d.sum()
    out_dp = out_dp / out_dp.sum()
    curve = mechanism_rdp_curve(mech, set(alphas) | set(_ALPHA_HAT_GRID))
    rows = []
    for alpha in alphas:
        realized = renyi_divergence(out_d, out_dp, alpha)
        bound, _ = hypo_rdp_best(alpha, curve, params, bounds)
        rows.append(AuditRow(alpha=alpha, realized=realized, bound=bound))
    return AuditReport(
        rows=tuple(rows),
        note="deterministic state-driven strategy; exact enumeration "
        f"to stopping-time tail {tail:g}",
    )


def core_oracle(mech: FiniteMechanism, dataset_side: str = "D"):
    """Adapter: the mechanism as a score oracle for the main loop.

    Returns oracle(index, rng) drawing an outcome value from the chosen
    side's distribution; consumes exactly one uniform per call.
    """
    table = mech.side(dataset_side)
    cdf = np.cumsum(table, axis=1)
    values = np.array(mech.outcomes)

    def oracle(index, rng):
        y = int(np.searchsorted(cdf[index], rng.random(), side="right"))
        return float(values[min(y, len(values) - 1)])

    return oracle


class CoreStrategyAdapter:
    """Adapter: an audit strategy as a sampling strategy for the main loop."""

    def __init__(self, audit_strategy: AuditStrategy, mech: FiniteMechanism, prior: Prior):
        self.audit_strategy = audit_strategy
        self.values = np.array(mech.outcomes)
        self.prior = prior

    def update(self, history) -> DiscreteDensity:
        state = self.audit_strategy.initial_state()
        for trial in history:
            y = int(np.argmin(np.abs(self.values - trial.q)))
            state = self.audit_strategy.next_state(state, y)
        probs = self.audit_strategy.raw_probs(state)
        return DiscreteDensity.from_probabilities(probs, self.prior.density.weights)
