"""YAML configuration files: model/prior settings, generator settings, and
experiment plans.

A minimal model config:

    variant:
      multi_ranker: true
      auxiliary: false
    priors:
      weight_mean: 0.0
      weight_variance: 6.25
      precision_levels: [0.5, 1.0, 2.0]
      precision_probs:
        default: [0.333333, 0.333333, 0.333334]
        r3: [0.5, 0.3, 0.2]
    mcmc:
      iterations: 4000
      burn_in: 2000
    seed: 0

The ``update`` command writes prior files in the same shape as the
``priors:`` section, so a fit can consume them directly via ``--prior``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import InvalidConfig
from .gibbs import McmcConfig, ModelSpec
from .synthetic import GenConfig
from .update import UpdatedPrior


def _load_yaml(path: str | Path) -> dict:
    with Path(path).open(encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: expected a mapping at top level")
    return data


def _dump_yaml(path: str | Path, data: dict) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


def load_model_config(path: str | Path, seed_override: int | None = None
                      ) -> tuple[ModelSpec, McmcConfig]:
    data = _load_yaml(path)
    variant = data.get("variant", {})
    priors = data.get("priors", {})
    mcmc = data.get("mcmc", {})
    precision_probs = dict(priors.get("precision_probs", {}))
    default_probs = precision_probs.pop("default", (1 / 3, 1 / 3, 1 / 3))
    try:
        spec = ModelSpec(
            multi_ranker=bool(variant.get("multi_ranker", False)),
            auxiliary=bool(variant.get("auxiliary", False)),
            elite=bool(variant.get("elite", False)),
            weight_prior_mean=priors.get("weight_mean", 0.0),
            weight_prior_var=priors.get("weight_variance", 6.25),
            precision_levels=tuple(priors.get("precision_levels", (0.5, 1.0, 2.0))),
            precision_prior={k: tuple(v) for k, v in precision_probs.items()},
            default_precision_probs=tuple(default_probs),
        )
        seed = seed_override if seed_override is not None else int(data.get("seed", 0))
        cfg = McmcConfig(
            iterations=int(mcmc.get("iterations", 4000)),
            burn_in=int(mcmc.get("burn_in", 2000)),
            seed=seed,
            retain_latents=bool(mcmc.get("retain_latents", False)),
        )
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    return spec, cfg


def load_scaling_overrides(path: str | Path) -> dict[str, str]:
    """Optional per-column scaling kinds from a config's ``scaling:`` section
    (overrides value-set binary detection)."""
    data = _load_yaml(path)
    overrides = data.get("scaling", {})
    if not isinstance(overrides, dict):
        raise InvalidConfig(f"{path}: scaling section must map column -> kind")
    return {str(k): str(v) for k, v in overrides.items()}


def apply_prior_file(spec: ModelSpec, path: str | Path) -> ModelSpec:
    """Overlay a prior file (written by the update command) onto a spec."""
    from dataclasses import replace

    data = _load_yaml(path)
    weights = data.get("weights", {})
    try:
        means = np.asarray(weights["mean"], dtype=float)
        variances = np.asarray(weights["variance"], dtype=float)
    except KeyError as exc:
        raise InvalidConfig(f"{path}: prior file missing {exc}") from None
    if means.shape != variances.shape:
        raise InvalidConfig(f"{path}: mean/variance lengths differ")
    precision = {
        str(k): tuple(float(p) for p in v)
        for k, v in (data.get("precision_probs") or {}).items()
    }
    return replace(
        spec,
        weight_prior_mean=means,
        weight_prior_var=variances,
        precision_prior=precision or dict(spec.precision_prior),
    )


def write_prior_file(path: str | Path, prior: UpdatedPrior) -> None:
    _dump_yaml(
        path,
        {
            "weights": {
                "names": list(prior.coef_names),
                "mean": [float(v) for v in prior.means],
                "variance": [float(v) for v in prior.variances],
            },
            "precision_probs": {k: list(v) for k, v in prior.precision_probs.items()},
            "inflation": float(prior.inflation),
            "shrink": float(prior.shrink),
            "period": int(prior.period),
        },
    )


def load_gen_config(path: str | Path, seed_override: int | None = None) -> GenConfig:
    data = _load_yaml(path)
    if seed_override is not None:
        data["seed"] = seed_override
    allowed = set(GenConfig.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise InvalidConfig(f"{path}: unknown generator fields {sorted(unknown)}")
    return GenConfig(**data)


def load_plan_config(path: str | Path, seed_override: int | None = None) -> dict[str, Any]:
    """Plan configs are returned as a plain dict; the CLI resolves splits
    against the loaded dataset before building an ExperimentPlan."""
    data = _load_yaml(path)
    for key in ("methods", "sizes", "replications"):
        if key not in data:
            raise InvalidConfig(f"{path}: plan is missing {key!r}")
    if int(data["replications"]) < 1:
        raise InvalidConfig(f"{path}: replications must be >= 1")
    if seed_override is not None:
        data["seed"] = seed_override
    data.setdefault("seed", 0)
    return data
