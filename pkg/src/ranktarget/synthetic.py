"""Synthetic populations with known ground truth for verifying every fitting claim.

The generating process mirrors the model itself: each household gets a latent
need score (household effect + covariates times true weights, plus an elite
distortion when configured), each ranker observes that score through noise
whose precision is the ranker's true quality, and expenditures follow a
linear link whose coefficients imperfectly track the ranking weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import (
    Dataset,
    Household,
    RankingScheme,
    assemble_dataset,
    rank_of,
)
from .errors import InvalidConfig
from .rng import derive_rng

# the two smallest land on the binary columns of the default mix, whose lower
# information content makes near-threshold signs unstable
_DEFAULT_WEIGHT_PATTERN = (1.5, -1.0, 0.75, -0.45, 0.25)


def default_weights(n_covariates: int) -> np.ndarray:
    """Well-separated signed magnitudes, recycled past five covariates."""
    reps = -(-n_covariates // len(_DEFAULT_WEIGHT_PATTERN))
    return np.array((_DEFAULT_WEIGHT_PATTERN * reps)[:n_covariates])


@dataclass(frozen=True)
class GenConfig:
    """Everything the generator needs; all randomness flows from ``seed``."""

    n_communities: int = 20
    households_per_community: int = 10
    n_covariates: int = 5
    n_binary: int = 2
    n_rankers: int = 3
    weights: Sequence[float] | None = None          # true ranking weights
    precisions: Sequence[float] | None = None       # true per-ranker quality
    household_effect_sd: float = 1.0
    elite_effect: float = 0.0                       # 0 disables the elite column
    elite_prevalence: float = 0.1
    survey_weights: Sequence[float] | None = None   # default: weights + noise
    survey_weight_jitter_sd: float = 0.1
    survey_intercept: float = 0.0
    survey_noise_sd: float = 0.5
    quota_share: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.quota_share < 1.0:
            raise InvalidConfig("quota share must be in (0, 1)")
        if self.n_binary > self.n_covariates:
            raise InvalidConfig("more binary columns than covariates")
        if min(self.n_communities, self.households_per_community,
               self.n_covariates, self.n_rankers) < 1:
            raise InvalidConfig("counts must be positive")
        if self.weights is not None and len(self.weights) != self.n_covariates:
            raise InvalidConfig("weights length must equal n_covariates")
        if self.precisions is not None:
            if len(self.precisions) != self.n_rankers:
                raise InvalidConfig("precisions length must equal n_rankers")
            if any(w <= 0 for w in self.precisions):
                raise InvalidConfig("precisions must be positive")
        if not 0.0 <= self.elite_prevalence <= 1.0:
            raise InvalidConfig("elite prevalence must be in [0, 1]")
        if self.household_effect_sd < 0 or self.survey_noise_sd < 0:
            raise InvalidConfig("noise scales must be nonnegative")

    def true_weights(self) -> np.ndarray:
        if self.weights is not None:
            return np.asarray(self.weights, dtype=float)
        return default_weights(self.n_covariates)

    def true_precisions(self) -> np.ndarray:
        if self.precisions is not None:
            return np.asarray(self.precisions, dtype=float)
        return np.ones(self.n_rankers)


@dataclass(frozen=True)
class TruthRecord:
    """The starred values behind one generated dataset (raw covariate scale)."""

    weights: np.ndarray
    precisions: np.ndarray
    survey_weights: np.ndarray
    survey_intercept: float
    survey_noise_sd: float
    elite_effect: float
    household_effects: dict[str, float]
    need: dict[str, float]                  # household effect + x.weights, elite-free
    poor: dict[str, frozenset[str]] = field(default_factory=dict)

    def poor_union(self) -> frozenset[str]:
        out: set[str] = set()
        for members in self.poor.values():
            out |= members
        return frozenset(out)


def generate_dataset(
    cfg: GenConfig, rng: np.random.Generator | None = None
) -> tuple[Dataset, tuple[Household, ...], TruthRecord]:
    """Draw a full synthetic population.

    Returns the assembled (standardized) dataset, the survey households (every
    household carries an expenditure here; callers restrict to a survey split
    as needed), and the truth record. The truly-poor set of each community is
    the lowest quota-share of the elite-free need score, so quotas equal the
    truth counts by construction.
    """
    if rng is None:
        rng = derive_rng(cfg.seed)

    true_w = cfg.true_weights()
    true_prec = cfg.true_precisions()
    n = cfg.n_communities * cfg.households_per_community
    n_cont = cfg.n_covariates - cfg.n_binary

    x = np.empty((n, cfg.n_covariates))
    x[:, :n_cont] = rng.standard_normal((n, n_cont))
    x[:, n_cont:] = rng.binomial(1, 0.5, size=(n, cfg.n_binary)).astype(float)
    names = [f"x{j + 1}" for j in range(cfg.n_covariates)]

    use_elite = cfg.elite_effect != 0.0
    if use_elite:
        elite_col = rng.binomial(1, cfg.elite_prevalence, size=n).astype(float)
        x = np.hstack([x, elite_col[:, None]])
        names.append("elite_conn")
        elite_idx = (cfg.n_covariates,)
    else:
        elite_idx = ()

    effects = cfg.household_effect_sd * rng.standard_normal(n)
    need = effects + x[:, : cfg.n_covariates] @ true_w
    latent_base = need + (cfg.elite_effect * x[:, -1] if use_elite else 0.0)

    if cfg.survey_weights is not None:
        survey_w = np.asarray(cfg.survey_weights, dtype=float)
        if survey_w.size != cfg.n_covariates:
            raise InvalidConfig("survey weights length must equal n_covariates")
    else:
        survey_w = true_w + cfg.survey_weight_jitter_sd * rng.standard_normal(
            cfg.n_covariates
        )
    y = (
        cfg.survey_intercept
        + x[:, : cfg.n_covariates] @ survey_w
        + cfg.survey_noise_sd * rng.standard_normal(n)
    )

    households = []
    width = len(str(n - 1))
    for i in range(n):
        cid = f"c{i // cfg.households_per_community + 1:03d}"
        households.append(
            Household(
                id=f"h{i:0{width}d}",
                community_id=cid,
                x=x[i],
                elite_cols=elite_idx,
                y=float(y[i]),
            )
        )

    rankings = []
    community_ids = sorted({h.community_id for h in households})
    ranker_ids = [f"r{r + 1}" for r in range(cfg.n_rankers)]
    rows_of = {
        cid: [i for i, h in enumerate(households) if h.community_id == cid]
        for cid in community_ids
    }
    for cid in community_ids:
        rows = rows_of[cid]
        for r, rid in enumerate(ranker_ids):
            noise = rng.standard_normal(len(rows)) / np.sqrt(true_prec[r])
            ranks = rank_of(latent_base[rows] + noise)
            rankings.append(
                RankingScheme(
                    community_id=cid,
                    ranker_id=rid,
                    ranks={households[row].id: int(k) for row, k in zip(rows, ranks)},
                )
            )

    quotas = {}
    poor = {}
    for cid in community_ids:
        rows = rows_of[cid]
        q = max(1, round(cfg.quota_share * len(rows)))
        quotas[cid] = q
        order = sorted(rows, key=lambda row: (need[row], households[row].id))
        poor[cid] = frozenset(households[row].id for row in order[:q])

    dataset = assemble_dataset(households, rankings, quotas, names)
    truth = TruthRecord(
        weights=true_w,
        precisions=true_prec,
        survey_weights=survey_w,
        survey_intercept=cfg.survey_intercept,
        survey_noise_sd=cfg.survey_noise_sd,
        elite_effect=cfg.elite_effect if use_elite else 0.0,
        household_effects={h.id: float(effects[i]) for i, h in enumerate(households)},
        need={h.id: float(need[i]) for i, h in enumerate(households)},
        poor=poor,
    )
    return dataset, dataset.survey_households(), truth


def shuffle_ranker(
    dataset: Dataset, ranker_id: str, rng: np.random.Generator
) -> Dataset:
    """Replace one ranker's rankings with uniform permutations (an
    uninformative ranker), leaving everything else untouched."""
    rankings = []
    found = False
    for scheme in dataset.rankings:
        if scheme.ranker_id != ranker_id:
            rankings.append(scheme)
            continue
        found = True
        ids = sorted(scheme.ranks)
        ranks = rng.permutation(len(ids)) + 1
        rankings.append(
            RankingScheme(
                community_id=scheme.community_id,
                ranker_id=scheme.ranker_id,
                ranks={hid: int(r) for hid, r in zip(ids, ranks)},
            )
        )
    if not found:
        raise ValueError(f"ranker {ranker_id!r} not present in dataset")
    return Dataset(
        households=dataset.households,
        rankings=tuple(rankings),
        quotas=dict(dataset.quotas),
        covariate_names=dataset.covariate_names,
        scaling=dataset.scaling,
    )


def write_truth(path, truth: TruthRecord, dataset: Dataset) -> None:
    """Per-household truth table (need score, poverty flag, household effect)."""
    import csv

    poor_union = truth.poor_union()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["household_id", "community_id", "need", "household_effect", "is_poor"])
        for h in dataset.households:
            w.writerow(
                [
                    h.id,
                    h.community_id,
                    repr(truth.need[h.id]),
                    repr(truth.household_effects[h.id]),
                    int(h.id in poor_union),
                ]
            )


def load_truth_poor(path) -> dict[str, frozenset[str]]:
    """Read the truly-poor sets back from a truth.csv file."""
    import csv

    by_comm: dict[str, set[str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if int(row["is_poor"]):
                by_comm.setdefault(row["community_id"], set()).add(row["household_id"])
    return {cid: frozenset(ids) for cid, ids in by_comm.items()}
