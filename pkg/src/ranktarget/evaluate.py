"""Scoring, beneficiary selection, error rates, and replication experiments.

Scores follow one orientation everywhere: lower = needier, and each
community's quota of lowest-scoring households is selected. The error rate
against a truth set of the same size makes exclusion and inclusion errors
identical, so a single number is reported.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import kendalltau, spearmanr

from .baselines import (
    dichotomize,
    fit_pmt_ols,
    fit_probit_mle,
    pmt_targeting_scores,
    probit_targeting_scores,
)
from .data import Dataset, rank_of
from .errors import (
    AllZero,
    DimensionMismatch,
    InvalidQuota,
    NotEnoughCommunities,
    QuotaMismatchWarning,
    SetMismatch,
    UnknownCommunity,
)
from .gibbs import McmcConfig, ModelSpec, PosteriorSamples, run_gibbs
from .rng import derive_rng

KNOWN_METHODS = ("random", "pmt", "probit", "hybrid", "hybrid-mr", "hybrid-ai", "hybrid-du")


def compute_scores(
    x: np.ndarray, weights: np.ndarray, elite_cols: Iterable[int] = ()
) -> np.ndarray:
    """Need scores x.weights with elite-connection weights forced to zero,
    which purges elite influence from beneficiary selection."""
    x = np.asarray(x, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if x.ndim != 2 or x.shape[1] != weights.size:
        raise DimensionMismatch(
            f"covariate width {x.shape[-1] if x.ndim else '?'} != weights {weights.size}"
        )
    elite_cols = tuple(elite_cols)
    if elite_cols:
        if max(elite_cols) >= weights.size or min(elite_cols) < 0:
            raise DimensionMismatch("elite column index out of range")
        weights = weights.copy()
        weights[list(elite_cols)] = 0.0
    return x @ weights


def select_beneficiaries(scores: Mapping[str, float], quota: int) -> frozenset[str]:
    """The quota lowest-scoring households; ties broken by id, ascending."""
    if not 1 <= quota <= len(scores):
        raise InvalidQuota(f"quota {quota} out of range for {len(scores)} households")
    ranked = sorted(scores, key=lambda hid: (scores[hid], hid))
    return frozenset(ranked[:quota])


def error_rate(selected: Iterable[str], truly_poor: Iterable[str]) -> float:
    """Share of the truly poor that the selection missed."""
    selected = frozenset(selected)
    truly_poor = frozenset(truly_poor)
    if not truly_poor:
        raise InvalidQuota("truth set is empty")
    if len(selected) != len(truly_poor):
        warnings.warn(
            f"selected {len(selected)} households for {len(truly_poor)} truly poor",
            QuotaMismatchWarning,
            stacklevel=2,
        )
    return 1.0 - len(selected & truly_poor) / len(truly_poor)


def pooled_error_rate(
    selected: Mapping[str, frozenset[str]], truth: Mapping[str, frozenset[str]]
) -> float:
    hits = sum(len(selected[c] & truth[c]) for c in truth)
    total = sum(len(truth[c]) for c in truth)
    return 1.0 - hits / total


@dataclass(frozen=True)
class TargetingResult:
    method: str
    scores: dict[str, float]
    selected: dict[str, frozenset[str]]
    error_by_community: dict[str, float]
    pooled_error: float


def score_and_select(
    dataset: Dataset,
    weights: np.ndarray,
    truth: Mapping[str, frozenset[str]],
    method: str = "hybrid",
    drop_elite: bool = False,
) -> TargetingResult:
    """Score every household, select per-community quotas equal to the truth
    counts, and compute error rates."""
    elite = dataset.elite_cols if drop_elite else ()
    scores = compute_scores(dataset.X, weights, elite)
    by_id = dict(zip((h.id for h in dataset.households), scores))
    selected = {}
    errors = {}
    for cid, members in sorted(truth.items()):
        community_scores = {
            h.id: by_id[h.id] for h in dataset.community_members[cid]
        }
        selected[cid] = select_beneficiaries(community_scores, len(members))
        errors[cid] = error_rate(selected[cid], members)
    return TargetingResult(
        method=method,
        scores=by_id,
        selected=selected,
        error_by_community=errors,
        pooled_error=pooled_error_rate(selected, truth),
    )


def standardized_coefficients(coefs: Sequence[float]) -> np.ndarray:
    """Each coefficient over the mean absolute coefficient.

    The magnitude is the average marginal rate of substitution of the
    covariate (harmonic mean over pairwise ratios); the sign is kept.
    The mean absolute standardized value is exactly 1.
    """
    coefs = np.asarray(coefs, dtype=float)
    mean_abs = np.abs(coefs).mean()
    if mean_abs == 0.0:
        raise AllZero("cannot standardize an all-zero coefficient vector")
    return coefs / mean_abs


def rank_correlation(
    a: Mapping[str, int], b: Mapping[str, int], method: str = "spearman"
) -> float:
    """Correlation of two rankings over the same household set.

    Spearman by default; Kendall is available but makes no fidelity claim.
    """
    if set(a) != set(b):
        raise SetMismatch("rankings cover different household sets")
    ids = sorted(a)
    va = [a[h] for h in ids]
    vb = [b[h] for h in ids]
    if method == "spearman":
        return float(spearmanr(va, vb).statistic)
    if method == "kendall":
        return float(kendalltau(va, vb).statistic)
    raise ValueError(f"unknown correlation method {method!r}")


def aggregate_model_ranking(
    samples: PosteriorSamples, dataset: Dataset, community_id: str
) -> dict[str, int]:
    """In-sample aggregated ranking: posterior-mean household effect plus
    covariate score, ranked within the community.

    Diagnostics only; out-of-sample scoring sets the household effects to
    their zero expectation.
    """
    members = dataset.community_members.get(community_id)
    if not members:
        raise UnknownCommunity(f"community {community_id!r} not in dataset")
    effect_of = dict.fromkeys((h.id for h in members), 0.0)
    if samples.household_effects is not None:
        means = samples.household_effects.mean(axis=0)
        lookup = dict(zip(samples.ranked_household_ids, means))
        for hid in effect_of:
            if hid not in lookup:
                raise UnknownCommunity(f"community {community_id!r} was not fitted")
            effect_of[hid] = lookup[hid]
    weights = samples.weight_mean()
    rows = [dataset.index_of[h.id] for h in members]
    scores = dataset.X[rows] @ weights + np.array([effect_of[h.id] for h in members])
    ranks = rank_of(scores)
    return {h.id: int(r) for h, r in zip(members, ranks)}


# ---------------------------------------------------------------------------
# replication experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentPlan:
    """Protocol for the repeated-subsampling comparison of methods.

    Each replication samples ``n`` training communities without replacement,
    fits every method on them, scores the untouched test split, and records
    the pooled error. Replication streams derive from (seed, size index,
    replication), so results are identical however the work is scheduled,
    and all methods see the same community samples.
    """

    sizes: tuple[int, ...]
    replications: int
    seed: int
    methods: tuple[str, ...]
    train: tuple[str, ...]
    test: tuple[str, ...]
    aux: tuple[str, ...] = ()
    mcmc: McmcConfig = field(default_factory=lambda: McmcConfig(800, 400))
    quota_from_truth: bool = True   # default: per-community quota = truth count
    du_prior: "ModelSpec | None" = None

    def __post_init__(self):
        unknown = set(self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise ValueError(f"train/test splits overlap: {sorted(overlap)[:3]}")
        if "hybrid-du" in self.methods and self.du_prior is None:
            raise ValueError("hybrid-du requires du_prior (see compose_updated_priors)")


@dataclass(frozen=True)
class ReplicationRow:
    method: str
    n_communities: int
    replication: int
    error: float


def _method_scores(
    method: str,
    plan: ExperimentPlan,
    dataset: Dataset,
    sampled: tuple[str, ...],
    test_rows: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Fit one method on the sampled communities and score the test rows."""
    test_x = dataset.X[test_rows]
    if method == "random":
        return rng.random(len(test_rows))

    if method == "pmt":
        train = dataset.restricted_view(sampled, survey_communities=sampled)
        rows = [train.index_of[h.id] for h in train.survey_households()]
        fit = fit_pmt_ols(train.X[rows], np.array([h.y for h in train.survey_households()]))
        return pmt_targeting_scores(fit, test_x)

    if method == "probit":
        train = dataset.restricted_view(sampled)
        xs, ds = [], []
        for scheme in train.rankings:
            indicator = dichotomize(scheme, train.quotas[scheme.community_id])
            for hid, flag in indicator.items():
                xs.append(train.X[train.index_of[hid]])
                ds.append(flag)
        fit = fit_probit_mle(np.vstack(xs), np.array(ds))
        return probit_targeting_scores(fit, test_x)

    if method in ("hybrid", "hybrid-mr", "hybrid-du", "hybrid-ai"):
        aux = plan.aux if method == "hybrid-ai" else ()
        train = dataset.restricted_view(sampled, survey_communities=aux)
        spec = ModelSpec(
            multi_ranker=method == "hybrid-mr",
            auxiliary=method == "hybrid-ai",
        )
        if method == "hybrid-du":
            spec = plan.du_prior
        samples = run_gibbs(spec, train, plan.mcmc, rng)
        return compute_scores(test_x, samples.weight_mean())

    raise ValueError(f"unknown method {method!r}")


def _run_task(args) -> ReplicationRow:
    (method, size_idx, size, rep, plan, dataset, truth) = args
    sample_rng = derive_rng(plan.seed, size_idx, rep)
    sampled = tuple(
        sorted(str(c) for c in sample_rng.choice(list(plan.train), size=size, replace=False))
    )
    method_idx = plan.methods.index(method)
    fit_rng = derive_rng(plan.seed, size_idx, rep, method_idx)

    test_set = set(plan.test)
    truth_test = {c: m for c, m in truth.items() if c in test_set}
    test_rows = np.array(
        [
            dataset.index_of[h.id]
            for c in sorted(truth_test)
            for h in dataset.community_members[c]
        ]
    )
    scores = _method_scores(method, plan, dataset, sampled, test_rows, fit_rng)

    ids = [
        h.id
        for c in sorted(truth_test)
        for h in dataset.community_members[c]
    ]
    by_id = dict(zip(ids, scores))
    selected = {}
    for cid in sorted(truth_test):
        community_scores = {h.id: by_id[h.id] for h in dataset.community_members[cid]}
        quota = len(truth_test[cid]) if plan.quota_from_truth else dataset.quotas[cid]
        selected[cid] = select_beneficiaries(community_scores, quota)
    return ReplicationRow(
        method=method,
        n_communities=size,
        replication=rep,
        error=pooled_error_rate(selected, truth_test),
    )


@dataclass(frozen=True)
class SummaryRow:
    method: str
    n_communities: int
    mean_error: float
    sd_error: float


def replication_experiment(
    plan: ExperimentPlan,
    dataset: Dataset,
    truth: Mapping[str, frozenset[str]],
    workers: int = 1,
) -> tuple[list[ReplicationRow], list[SummaryRow]]:
    """Run the full method-by-size grid.

    Returns per-replication rows and (mean, sd) summaries, both in a fixed
    sort order so serial and parallel runs produce identical tables.
    """
    if max(plan.sizes) > len(plan.train):
        raise NotEnoughCommunities(
            f"cannot sample {max(plan.sizes)} from {len(plan.train)} training communities"
        )
    missing = [c for c in plan.test if c not in truth]
    if missing:
        raise NotEnoughCommunities(f"no truth sets for test communities {missing[:3]}")

    tasks = [
        (method, size_idx, size, rep, plan, dataset, truth)
        for method in plan.methods
        for size_idx, size in enumerate(plan.sizes)
        for rep in range(plan.replications)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        rows = [_run_task(t) for t in tasks]

    rows.sort(key=lambda r: (r.method, r.n_communities, r.replication))
    summaries = []
    for method in sorted(set(plan.methods)):
        for size in plan.sizes:
            errs = np.array(
                [r.error for r in rows if r.method == method and r.n_communities == size]
            )
            summaries.append(
                SummaryRow(
                    method=method,
                    n_communities=size,
                    mean_error=float(errs.mean()),
                    sd_error=float(errs.std(ddof=1)) if errs.size > 1 else 0.0,
                )
            )
    summaries.sort(key=lambda r: (r.method, r.n_communities))
    return rows, summaries


def truly_poor_from_rankings(dataset: Dataset) -> dict[str, frozenset[str]]:
    """Truth sets taken from the observed rankings: households ranked within
    the community quota (mean rank across rankers when there are several)."""
    out = {}
    for cid in dataset.ranked_community_ids:
        schemes = [s for s in dataset.rankings if s.community_id == cid]
        ids = sorted(schemes[0].ranks)
        mean_rank = {hid: float(np.mean([s.ranks[hid] for s in schemes])) for hid in ids}
        quota = dataset.quotas[cid]
        chosen = sorted(ids, key=lambda hid: (mean_rank[hid], hid))[:quota]
        out[cid] = frozenset(chosen)
    return out
