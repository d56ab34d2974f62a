"""Thurstonian ranking-model engine.

Observed community rankings are modeled as the ordering of latent household
need values

    latent = household_effect + x . weights + noise,   noise ~ N(0, 1/precision_r)

where the per-ranker precision encodes ranking quality. Every variant runs
through one Gibbs sampler whose blocks are switched on or off:

* basic model: household effects frozen at 0, precisions frozen at 1, normal
  prior on the weights;
* multi-ranker: household effects active, discrete per-ranker precisions;
* auxiliary: an expenditure regression on survey households shares a
  hierarchical normal prior with the ranking weights, which lets survey data
  sharpen the weights when few communities are ranked.

All conditional-posterior parameter computations are exposed as pure
functions so they can be checked against dense-matrix oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp, ndtri

from .data import Dataset, RankingScheme
from .errors import DivergentChain, NotPositiveDefinite
from .rng import (
    RngStream,
    derive_rng,
    sample_multinomial_index,
    sample_mvn,
    sample_scaled_inv_chisq,
    sample_truncated_normal,
)

DEFAULT_WEIGHT_PRIOR_SD = 2.5
DEFAULT_PRECISION_LEVELS = (0.5, 1.0, 2.0)
UNIFORM_LEVEL_PROBS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


@dataclass(frozen=True)
class ModelSpec:
    """Variant flags and prior hyperparameters for one model fit.

    ``weight_prior_mean``/``weight_prior_var`` define the normal prior on the
    ranking weights for the non-auxiliary variants (scalar values broadcast;
    a vector variance means a diagonal covariance). When ``auxiliary`` is on,
    the weights instead draw their prior from the shared hierarchy (mean
    elementwise N(0,1), common variance Scale-inv-chi2(1,1)) and these two
    fields are ignored. ``precision_prior`` maps ranker ids to prior
    probabilities over ``precision_levels``; missing rankers get the default.
    """

    multi_ranker: bool = False
    auxiliary: bool = False
    elite: bool = False
    weight_prior_mean: float | Sequence[float] = 0.0
    weight_prior_var: float | Sequence[float] = DEFAULT_WEIGHT_PRIOR_SD**2
    precision_levels: tuple[float, ...] = DEFAULT_PRECISION_LEVELS
    precision_prior: Mapping[str, Sequence[float]] = field(default_factory=dict)
    default_precision_probs: tuple[float, ...] = UNIFORM_LEVEL_PROBS

    def __post_init__(self):
        if len(self.precision_levels) != len(self.default_precision_probs):
            raise ValueError("precision levels and probabilities differ in length")
        if any(w <= 0 for w in self.precision_levels):
            raise ValueError("precision levels must be positive")
        for rid, probs in list(self.precision_prior.items()) + [
            ("default", self.default_precision_probs)
        ]:
            if len(probs) != len(self.precision_levels):
                raise ValueError(f"precision prior for ranker {rid!r} has wrong length")
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-6:
                raise ValueError(
                    f"precision prior for ranker {rid!r} must be nonnegative and sum to 1"
                )

    def precision_probs_for(self, ranker_id: str) -> np.ndarray:
        return np.asarray(
            self.precision_prior.get(ranker_id, self.default_precision_probs), dtype=float
        )


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 4000
    burn_in: int = 2000
    seed: int = 0
    retain_latents: bool = False

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")

    @property
    def retained(self) -> int:
        return self.iterations - self.burn_in


@dataclass
class LatentState:
    """Mutable sampler state; one instance per chain."""

    latents: np.ndarray            # one value per (ranking, household) observation
    household_effects: np.ndarray  # one value per ranked household
    weights: np.ndarray
    precisions: np.ndarray         # one value per ranker
    survey_weights: np.ndarray | None = None  # survey covariates + intercept
    survey_noise_var: float = 1.0
    shared_mean: np.ndarray | None = None
    shared_var: float = 1.0


# ---------------------------------------------------------------------------
# conditional-posterior parameter computations (pure, oracle-checkable)
# ---------------------------------------------------------------------------


def latent_bounds(
    scheme: RankingScheme, latent_by_household: Mapping[str, float], position: int
) -> tuple[float, float]:
    """Truncation interval for the household at rank ``position`` (1-based).

    The lower bound is the latent of the household ranked one better, the
    upper bound that of the household ranked one worse; callers supply the
    most recently updated values (already-updated for better ranks, the
    previous iteration's for worse ranks).
    """
    ordered = scheme.ordered_ids()
    lower = latent_by_household[ordered[position - 2]] if position > 1 else -math.inf
    upper = latent_by_household[ordered[position]] if position < len(ordered) else math.inf
    return lower, upper


def household_effect_params(
    resid: np.ndarray,
    obs_precision: np.ndarray,
    household_index: np.ndarray,
    n_households: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of each household effect.

    ``resid`` holds latent - x.weights per observation. Each effect has a
    standard-normal prior and appears only in its own observations, so the
    posterior is independent across households:
    variance 1/(sum of precisions + 1), mean = variance * weighted residual sum.
    """
    prec = np.ones(n_households)
    np.add.at(prec, household_index, obs_precision)
    wsum = np.zeros(n_households)
    np.add.at(wsum, household_index, obs_precision * resid)
    var = 1.0 / prec
    return wsum * var, var


def _solve_normal_equations(
    xtwx: np.ndarray, xtwy: np.ndarray, prior_mean: np.ndarray, prior_var: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    prior_precision = np.diag(1.0 / prior_var) if prior_var.ndim == 1 else np.linalg.inv(prior_var)
    a = xtwx + prior_precision
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "normal-equations matrix is singular; check for collinear covariates"
        ) from None
    identity = np.eye(a.shape[0])
    chol_inv = np.linalg.solve(chol, identity)
    cov = chol_inv.T @ chol_inv
    mean = cov @ (xtwy + prior_precision @ prior_mean)
    return mean, cov


def _as_prior(mean, var, p: int) -> tuple[np.ndarray, np.ndarray]:
    mean = np.asarray(mean, dtype=float)
    if mean.ndim == 0:
        mean = np.full(p, float(mean))
    var = np.asarray(var, dtype=float)
    if var.ndim == 0:
        var = np.full(p, float(var))
    return mean, var


def weight_params(
    x_obs: np.ndarray,
    resid: np.ndarray,
    obs_precision: np.ndarray,
    prior_mean,
    prior_var,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of the ranking weights.

    ``x_obs`` has one covariate row per observation and ``resid`` is
    latent - household_effect. ``prior_var`` may be a vector (diagonal) or a
    full covariance matrix.
    """
    p = x_obs.shape[1]
    if np.ndim(prior_var) < 2:
        prior_mean, prior_var = _as_prior(prior_mean, prior_var, p)
    else:
        prior_var = np.asarray(prior_var, dtype=float)
        prior_mean = np.asarray(prior_mean, dtype=float)
        if prior_mean.ndim == 0:
            prior_mean = np.full(p, float(prior_mean))
    xw = x_obs * obs_precision[:, None]
    return _solve_normal_equations(x_obs.T @ xw, xw.T @ resid, prior_mean, prior_var)


def survey_weight_params(
    x_survey: np.ndarray,
    y: np.ndarray,
    noise_var: float,
    prior_mean,
    prior_var,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of the expenditure-regression weights."""
    p = x_survey.shape[1]
    prior_mean, prior_var = _as_prior(prior_mean, prior_var, p)
    xtwx = (x_survey.T @ x_survey) / noise_var
    xtwy = (x_survey.T @ y) / noise_var
    return _solve_normal_equations(xtwx, xtwy, prior_mean, prior_var)


def ranker_precision_probs(
    resid: np.ndarray, prior_probs: np.ndarray, levels: Sequence[float]
) -> np.ndarray:
    """Posterior probabilities of one ranker's precision level.

    ``resid`` holds latent - (household_effect + x.weights) for every
    observation of this ranker; computed in log space so large residual sets
    cannot underflow.
    """
    resid = np.asarray(resid, dtype=float)
    prior_probs = np.asarray(prior_probs, dtype=float)
    n = resid.size
    rss = float(resid @ resid)
    with np.errstate(divide="ignore"):
        logp = np.log(prior_probs)
    for l, w in enumerate(levels):
        logp[l] += 0.5 * n * math.log(w) - 0.5 * w * rss
    out = np.exp(logp - logsumexp(logp))
    return out / out.sum()


def survey_noise_params(resid: np.ndarray) -> tuple[float, float]:
    """Degrees of freedom and scale sum for the expenditure noise variance."""
    resid = np.asarray(resid, dtype=float)
    return 1.0 + resid.size, float(resid @ resid) + 1.0


def shared_mean_params(
    weights: np.ndarray, survey_weights: np.ndarray, shared_var: float
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of the shared prior-mean vector.

    Elements covered by both coefficient vectors see two observations;
    elements only the survey regression has (its intercept) see one. The
    hyperprior is elementwise N(0, 1).
    """
    weights = np.asarray(weights, dtype=float)
    survey_weights = np.asarray(survey_weights, dtype=float)
    size = max(weights.size, survey_weights.size)
    counts = np.zeros(size)
    totals = np.zeros(size)
    for vec in (weights, survey_weights):
        counts[: vec.size] += 1.0
        totals[: vec.size] += vec
    var = 1.0 / (counts / shared_var + 1.0)
    mean = totals / shared_var * var
    return mean, var


def shared_var_params(
    weights: np.ndarray, survey_weights: np.ndarray, shared_mean: np.ndarray
) -> tuple[float, float]:
    """Degrees of freedom and scale sum for the shared prior variance."""
    weights = np.asarray(weights, dtype=float)
    survey_weights = np.asarray(survey_weights, dtype=float)
    shared_mean = np.asarray(shared_mean, dtype=float)
    df = 1.0 + weights.size + survey_weights.size
    scale = (
        float(np.sum((weights - shared_mean[: weights.size]) ** 2))
        + float(np.sum((survey_weights - shared_mean[: survey_weights.size]) ** 2))
        + 1.0
    )
    return df, scale


# ---------------------------------------------------------------------------
# posterior container
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PosteriorSamples:
    """Retained draws of every sampled block (latents optional)."""

    weights: np.ndarray                     # (B, p)
    coef_names: tuple[str, ...]
    scaling_divisors: np.ndarray            # covariate divisors used at fit time
    household_effects: np.ndarray | None = None   # (B, n ranked households)
    ranked_household_ids: tuple[str, ...] = ()
    precisions: np.ndarray | None = None    # (B, n rankers)
    ranker_ids: tuple[str, ...] = ()
    survey_weights: np.ndarray | None = None      # (B, p + 1), intercept last
    survey_noise_var: np.ndarray | None = None
    shared_mean: np.ndarray | None = None
    shared_var: np.ndarray | None = None
    latents: np.ndarray | None = None
    seed: int = 0
    iterations: int = 0
    burn_in: int = 0

    @property
    def n_retained(self) -> int:
        return self.weights.shape[0]

    def weight_draws(self, raw_scale: bool = False) -> np.ndarray:
        if raw_scale:
            return self.weights / self.scaling_divisors
        return self.weights

    def weight_mean(self, raw_scale: bool = False) -> np.ndarray:
        return self.weight_draws(raw_scale).mean(axis=0)

    def weight_sd(self, raw_scale: bool = False) -> np.ndarray:
        return self.weight_draws(raw_scale).std(axis=0, ddof=1)

    def weight_interval(self, level: float = 0.95, raw_scale: bool = False) -> np.ndarray:
        """Central credible interval per coefficient, shape (p, 2)."""
        tail = (1.0 - level) / 2.0
        draws = self.weight_draws(raw_scale)
        return np.quantile(draws, [tail, 1.0 - tail], axis=0).T

    def precision_mean(self) -> np.ndarray:
        if self.precisions is None:
            raise ValueError("no precision draws retained (single-ranker fit)")
        return self.precisions.mean(axis=0)

    def summary_rows(self, method: str = "hybrid") -> list[dict]:
        mean = self.weight_mean()
        sd = self.weight_sd()
        lo, hi = self.weight_interval().T
        return [
            {
                "method": method,
                "name": name,
                "posterior_mean": mean[j],
                "posterior_sd": sd[j],
                "q2.5": lo[j],
                "q97.5": hi[j],
            }
            for j, name in enumerate(self.coef_names)
        ]

    def save(self, path) -> None:
        arrays = {
            "weights": self.weights,
            "scaling_divisors": self.scaling_divisors,
            "coef_names": np.array(self.coef_names),
            "ranked_household_ids": np.array(self.ranked_household_ids),
            "ranker_ids": np.array(self.ranker_ids),
            "meta": np.array([self.seed, self.iterations, self.burn_in]),
        }
        for key in ("household_effects", "precisions", "survey_weights",
                    "survey_noise_var", "shared_mean", "shared_var", "latents"):
            value = getattr(self, key)
            if value is not None:
                arrays[key] = value
        np.savez_compressed(path, **arrays)

    @classmethod
    def load(cls, path) -> "PosteriorSamples":
        with np.load(path, allow_pickle=False) as data:
            meta = data["meta"]
            optional = {
                key: data[key] if key in data else None
                for key in ("household_effects", "precisions", "survey_weights",
                            "survey_noise_var", "shared_mean", "shared_var", "latents")
            }
            return cls(
                weights=data["weights"],
                coef_names=tuple(str(s) for s in data["coef_names"]),
                scaling_divisors=data["scaling_divisors"],
                ranked_household_ids=tuple(str(s) for s in data["ranked_household_ids"]),
                ranker_ids=tuple(str(s) for s in data["ranker_ids"]),
                seed=int(meta[0]),
                iterations=int(meta[1]),
                burn_in=int(meta[2]),
                **optional,
            )


# ---------------------------------------------------------------------------
# the sampler
# ---------------------------------------------------------------------------


class GibbsSampler:
    """Precomputed index structures plus the per-block update steps.

    A single chain is strictly sequential; run several chains on disjoint
    RngStream ids for parallel replications.
    """

    def __init__(self, spec: ModelSpec, data: Dataset):
        if not data.rankings:
            raise ValueError("model fitting requires at least one ranking")
        survey = data.survey_households()
        if spec.auxiliary and not survey:
            raise ValueError("auxiliary variant requires survey households with y")
        self.spec = spec
        self.data = data
        self.X = data.X
        self.p = self.X.shape[1]

        # (community, ranker) pairs in stable sorted order; households of a
        # pair stored in ascending rank order (most needy first).
        self.pairs = sorted(data.rankings, key=lambda s: (s.community_id, s.ranker_id))
        self.ranker_ids = data.ranker_ids
        ranker_pos = {rid: i for i, rid in enumerate(self.ranker_ids)}

        ranked_rows = sorted(
            {data.index_of[hid] for s in self.pairs for hid in s.ranks}
        )
        self.ranked_rows = np.array(ranked_rows, dtype=int)
        self.ranked_household_ids = tuple(data.households[i].id for i in self.ranked_rows)
        compact = {row: i for i, row in enumerate(ranked_rows)}
        self.n_ranked = len(ranked_rows)

        obs_house = []
        obs_ranker = []
        pair_rows = []
        for s in self.pairs:
            rows = [data.index_of[hid] for hid in s.ordered_ids()]
            pair_rows.append(np.array(rows, dtype=int))
            obs_house.extend(rows)
            obs_ranker.extend([ranker_pos[s.ranker_id]] * len(rows))
        self.obs_house = np.array(obs_house, dtype=int)
        self.obs_ranker = np.array(obs_ranker, dtype=int)
        self.obs_house_compact = np.array([compact[r] for r in obs_house], dtype=int)
        self.n_obs = len(obs_house)

        # Group pairs by community size so each rank position updates as one
        # vectorized truncated-normal draw across pairs.
        offsets = np.cumsum([0] + [len(r) for r in pair_rows])
        self.groups = []
        by_size: dict[int, list[int]] = {}
        for i, rows in enumerate(pair_rows):
            by_size.setdefault(len(rows), []).append(i)
        for size in sorted(by_size):
            idx = by_size[size]
            flat = np.vstack([np.arange(offsets[i], offsets[i] + size) for i in idx])
            houses = np.vstack([pair_rows[i] for i in idx])
            rankers = np.array([ranker_pos[self.pairs[i].ranker_id] for i in idx])
            self.groups.append((size, flat, houses, rankers))

        if spec.auxiliary:
            rows = [data.index_of[h.id] for h in survey]
            self.survey_x = np.hstack(
                [self.X[rows], np.ones((len(rows), 1))]
            )
            self.survey_y = np.array([h.y for h in survey], dtype=float)
        else:
            self.survey_x = None
            self.survey_y = None

        self.precision_prior = np.vstack(
            [spec.precision_probs_for(rid) for rid in self.ranker_ids]
        )
        self.levels = np.asarray(spec.precision_levels, dtype=float)

    # -- state ----------------------------------------------------------

    def initial_state(self) -> LatentState:
        """Weights and effects at 0, precisions and variances at 1; latents
        placed at within-community normal quantiles so rank consistency holds
        from iteration 0."""
        latents = np.empty(self.n_obs)
        for size, flat, _, _ in self.groups:
            q = ndtri((np.arange(1, size + 1)) / (size + 1.0))
            latents[flat] = q
        state = LatentState(
            latents=latents,
            household_effects=np.zeros(self.n_ranked),
            weights=np.zeros(self.p),
            precisions=np.ones(len(self.ranker_ids)),
        )
        if self.spec.auxiliary:
            state.survey_weights = np.zeros(self.p + 1)
            state.shared_mean = np.zeros(self.p + 1)
            state.shared_var = 1.0
            state.survey_noise_var = 1.0
        return state

    def _linear_predictor(self, state: LatentState) -> np.ndarray:
        """household_effect + x.weights per household row (effects only on
        ranked households)."""
        linear = self.X @ state.weights
        linear[self.ranked_rows] += state.household_effects
        return linear

    # -- block updates ----------------------------------------------------

    def sample_latent_sweep(self, state: LatentState, rng) -> None:
        """Redraw every latent from its truncated normal, in ascending rank
        order, preserving the observed rankings exactly."""
        linear = self._linear_predictor(state)
        for size, flat, houses, rankers in self.groups:
            zmat = state.latents[flat]
            zold = zmat.copy()
            mean = linear[houses]
            var = 1.0 / state.precisions[rankers]
            for h in range(size):
                lower = zmat[:, h - 1] if h > 0 else np.full(len(zmat), -np.inf)
                upper = zold[:, h + 1] if h < size - 1 else np.full(len(zmat), np.inf)
                zmat[:, h] = sample_truncated_normal(mean[:, h], var, lower, upper, rng)
            if __debug__ and size > 1 and not np.all(np.diff(zmat, axis=1) > 0):
                raise AssertionError("latent sweep violated rank consistency")
            state.latents[flat] = zmat

    def update_household_effects(self, state: LatentState, rng) -> None:
        resid = state.latents - (self.X @ state.weights)[self.obs_house]
        mean, var = household_effect_params(
            resid,
            state.precisions[self.obs_ranker],
            self.obs_house_compact,
            self.n_ranked,
        )
        state.household_effects = mean + np.sqrt(var) * rng.standard_normal(self.n_ranked)

    def weight_prior(self, state: LatentState) -> tuple[np.ndarray, np.ndarray]:
        if self.spec.auxiliary:
            return state.shared_mean[: self.p], np.full(self.p, state.shared_var)
        return _as_prior(self.spec.weight_prior_mean, self.spec.weight_prior_var, self.p)

    def update_weights(self, state: LatentState, rng) -> None:
        effects = np.zeros(len(self.data.households))
        effects[self.ranked_rows] = state.household_effects
        resid = state.latents - effects[self.obs_house]
        prior_mean, prior_var = self.weight_prior(state)
        mean, cov = weight_params(
            self.X[self.obs_house],
            resid,
            state.precisions[self.obs_ranker],
            prior_mean,
            prior_var,
        )
        state.weights = sample_mvn(mean, cov, rng)

    def update_precisions(self, state: LatentState, rng) -> None:
        resid = state.latents - self._linear_predictor(state)[self.obs_house]
        for r in range(len(self.ranker_ids)):
            mask = self.obs_ranker == r
            probs = ranker_precision_probs(resid[mask], self.precision_prior[r], self.levels)
            state.precisions[r] = self.levels[sample_multinomial_index(probs, rng)]

    def update_survey_blocks(self, state: LatentState, rng) -> None:
        mean, cov = survey_weight_params(
            self.survey_x,
            self.survey_y,
            state.survey_noise_var,
            state.shared_mean,
            np.full(self.p + 1, state.shared_var),
        )
        state.survey_weights = sample_mvn(mean, cov, rng)

    def update_survey_noise(self, state: LatentState, rng) -> None:
        resid = self.survey_y - self.survey_x @ state.survey_weights
        df, scale = survey_noise_params(resid)
        state.survey_noise_var = sample_scaled_inv_chisq(df, scale, rng)

    def update_shared_prior(self, state: LatentState, rng) -> None:
        mean, var = shared_mean_params(state.weights, state.survey_weights, state.shared_var)
        state.shared_mean = mean + np.sqrt(var) * rng.standard_normal(mean.size)
        df, scale = shared_var_params(state.weights, state.survey_weights, state.shared_mean)
        state.shared_var = sample_scaled_inv_chisq(df, scale, rng)

    def iterate(self, state: LatentState, rng) -> None:
        """One full scan over the active blocks, in a fixed order."""
        self.sample_latent_sweep(state, rng)
        if self.spec.multi_ranker:
            self.update_household_effects(state, rng)
        self.update_weights(state, rng)
        if self.spec.auxiliary:
            self.update_survey_blocks(state, rng)
        if self.spec.multi_ranker:
            self.update_precisions(state, rng)
        if self.spec.auxiliary:
            self.update_survey_noise(state, rng)
            self.update_shared_prior(state, rng)

    # -- driver -----------------------------------------------------------

    def run(self, cfg: McmcConfig, rng=None) -> PosteriorSamples:
        if rng is None:
            rng = derive_rng(cfg.seed)
        elif isinstance(rng, RngStream):
            rng = rng.generator
        state = self.initial_state()
        b = cfg.retained
        weights = np.empty((b, self.p))
        effects = np.empty((b, self.n_ranked)) if self.spec.multi_ranker else None
        precisions = np.empty((b, len(self.ranker_ids))) if self.spec.multi_ranker else None
        survey_w = np.empty((b, self.p + 1)) if self.spec.auxiliary else None
        noise = np.empty(b) if self.spec.auxiliary else None
        shared_m = np.empty((b, self.p + 1)) if self.spec.auxiliary else None
        shared_v = np.empty(b) if self.spec.auxiliary else None
        latents = np.empty((b, self.n_obs)) if cfg.retain_latents else None

        for it in range(cfg.iterations):
            self.iterate(state, rng)
            keep = it - cfg.burn_in
            if keep < 0:
                continue
            weights[keep] = state.weights
            if effects is not None:
                effects[keep] = state.household_effects
            if precisions is not None:
                precisions[keep] = state.precisions
            if survey_w is not None:
                survey_w[keep] = state.survey_weights
                noise[keep] = state.survey_noise_var
                shared_m[keep] = state.shared_mean
                shared_v[keep] = state.shared_var
            if latents is not None:
                latents[keep] = state.latents

        for name, block in (("weights", weights), ("household_effects", effects),
                            ("precisions", precisions), ("survey_weights", survey_w)):
            if block is not None and not np.all(np.isfinite(block)):
                raise DivergentChain(f"non-finite draws in block {name!r}")

        divisors = (
            self.data.scaling.divisors
            if self.data.scaling is not None
            else np.ones(self.p)
        )
        return PosteriorSamples(
            weights=weights,
            coef_names=self.data.covariate_names,
            scaling_divisors=divisors,
            household_effects=effects,
            ranked_household_ids=self.ranked_household_ids,
            precisions=precisions,
            ranker_ids=self.ranker_ids,
            survey_weights=survey_w,
            survey_noise_var=noise,
            shared_mean=shared_m,
            shared_var=shared_v,
            latents=latents,
            seed=cfg.seed,
            iterations=cfg.iterations,
            burn_in=cfg.burn_in,
        )


def run_gibbs(spec: ModelSpec, data: Dataset, cfg: McmcConfig, rng=None) -> PosteriorSamples:
    """Fit one model variant; see :class:`GibbsSampler` for the mechanics."""
    return GibbsSampler(spec, data).run(cfg, rng)
