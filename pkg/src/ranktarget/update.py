"""Turn one period's posterior into the next period's priors.

Using a previous posterior as the new prior is equivalent to pooling the data
of both periods; approximating it with independent per-coefficient normals
(and per-ranker multinomials over the precision levels) keeps the next fit
conjugate. Inflating the normal variances and pulling the level
probabilities toward uniform overweights recent data and keeps every
precision level reachable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import InsufficientSamples
from .gibbs import ModelSpec, PosteriorSamples

VARIANCE_FLOOR = 1e-6
DEFAULT_INFLATION = 1.5
DEFAULT_SHRINK = 0.1


@dataclass(frozen=True)
class UpdatedPrior:
    """Per-coefficient normal priors and per-ranker level probabilities."""

    coef_names: tuple[str, ...]
    means: np.ndarray
    variances: np.ndarray
    precision_probs: Mapping[str, tuple[float, ...]]
    inflation: float
    shrink: float
    period: int = 1

    def __post_init__(self):
        if np.any(self.variances <= 0):
            raise ValueError("prior variances must be positive")
        for rid, probs in self.precision_probs.items():
            if abs(sum(probs) - 1.0) > 1e-9 or any(p <= 0 for p in probs):
                raise ValueError(
                    f"precision probabilities for ranker {rid!r} must be positive "
                    "and sum to 1 (raise shrink above 0)"
                )


def approximate_weight_prior(
    draws: np.ndarray, inflation: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Normal approximation per coefficient: sample mean and sample variance
    times the inflation factor, floored at 1e-6 so short chains cannot emit a
    degenerate prior."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.shape[0] < 2:
        raise InsufficientSamples("need at least 2 retained draws")
    if inflation < 1.0:
        raise ValueError("inflation must be >= 1")
    means = draws.mean(axis=0)
    variances = np.maximum(draws.var(axis=0) * inflation, VARIANCE_FLOOR)
    return means, variances


def approximate_precision_prior(
    draws: np.ndarray,
    shrink: float = 0.0,
    levels: tuple[float, ...] = (0.5, 1.0, 2.0),
) -> np.ndarray:
    """Level frequencies of the retained precision draws, blended with the
    uniform distribution: (1 - shrink) * freq + shrink / n_levels."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.shape[0] < 2:
        raise InsufficientSamples("need at least 2 retained draws")
    if not 0.0 <= shrink <= 1.0:
        raise ValueError("shrink must lie in [0, 1]")
    freqs = np.stack(
        [np.isclose(draws, w).mean(axis=0) for w in levels], axis=1
    )  # (n_rankers, n_levels)
    return (1.0 - shrink) * freqs + shrink / len(levels)


def compose_updated_priors(
    samples: PosteriorSamples,
    inflation: float = DEFAULT_INFLATION,
    shrink: float = DEFAULT_SHRINK,
    period: int = 1,
) -> UpdatedPrior:
    means, variances = approximate_weight_prior(samples.weights, inflation)
    precision_probs: dict[str, tuple[float, ...]] = {}
    if samples.precisions is not None:
        probs = approximate_precision_prior(samples.precisions, shrink)
        precision_probs = {
            rid: tuple(float(p) for p in probs[i])
            for i, rid in enumerate(samples.ranker_ids)
        }
    return UpdatedPrior(
        coef_names=samples.coef_names,
        means=means,
        variances=variances,
        precision_probs=precision_probs,
        inflation=inflation,
        shrink=shrink,
        period=period,
    )


def apply_updated_prior(spec: ModelSpec, prior: UpdatedPrior) -> ModelSpec:
    """Inject the approximate posterior into a model spec as independent
    per-coefficient normals (diagonal covariance)."""
    return replace(
        spec,
        weight_prior_mean=prior.means.copy(),
        weight_prior_var=prior.variances.copy(),
        precision_prior=dict(prior.precision_probs),
    )
