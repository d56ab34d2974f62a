"""Batch command-line surface: generate / fit / score / evaluate / update.

All randomness flows from --seed; replication streams are derived
deterministically, so reruns with the same inputs are byte-identical
regardless of worker count. Outputs are plain delimited text so targeting
decisions stay auditable, plus a manifest recording inputs, seed, and output
hashes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .data import (
    assemble_dataset,
    load_census,
    load_quotas,
    load_rankings,
    load_scaling,
    load_survey,
    merge_survey,
    write_census,
    write_quotas,
    write_rankings,
    write_scaling,
    write_survey,
)
from .errors import InvalidConfig, RankTargetError
from .evaluate import (
    ExperimentPlan,
    aggregate_model_ranking,
    compute_scores,
    rank_correlation,
    replication_experiment,
    select_beneficiaries,
    standardized_coefficients,
    truly_poor_from_rankings,
)
from .gibbs import PosteriorSamples, run_gibbs
from .synthetic import generate_dataset, load_truth_poor, write_truth
from .update import compose_updated_priors

logger = logging.getLogger("ranktarget")


class UsageError(Exception):
    """Bad flags, missing files, or invalid configuration (exit code 2)."""


@dataclass
class RunManifest:
    command: str
    seed: int
    config: str | None = None
    inputs: dict = field(default_factory=dict)
    out_dir: str = ""
    started: str = ""
    finished: str = ""
    outputs: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> None:
        for name in sorted(os.listdir(out_dir)):
            path = out_dir / name
            if path.is_file() and name != "manifest.json":
                self.outputs[name] = hashlib.sha256(path.read_bytes()).hexdigest()
        self.finished = _timestamp()
        tmp = out_dir / "manifest.json.tmp"
        tmp.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True))
        os.replace(tmp, out_dir / "manifest.json")


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def _require_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"missing required flag {flag}")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag}: file not found: {path}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(v: float) -> str:
    return f"{v:.10g}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.config:
        gen_cfg = cfgmod.load_gen_config(_require_file(args.config, "--config"), args.seed)
    else:
        from .synthetic import GenConfig

        gen_cfg = GenConfig(seed=args.seed if args.seed is not None else 0)
    out = _out_dir(args)
    manifest = RunManifest(
        command="generate", seed=gen_cfg.seed, config=args.config,
        out_dir=str(out), started=_timestamp(),
    )
    dataset, _, truth = generate_dataset(gen_cfg)
    write_census(out / "census.csv", dataset.households, dataset.covariate_names)
    write_rankings(out / "rankings.csv", dataset.rankings)
    write_survey(out / "survey.csv", dataset.households, dataset.covariate_names)
    write_quotas(out / "quotas.csv", dataset.quotas)
    write_truth(out / "truth.csv", truth, dataset)
    manifest.notes = {
        "true_weights": [float(v) for v in truth.weights],
        "true_precisions": [float(v) for v in truth.precisions],
        "elite_effect": truth.elite_effect,
    }
    manifest.write(out)
    logger.info("generated %d households in %d communities",
                len(dataset.households), len(dataset.community_members))
    return 0


def _load_fit_dataset(args, kind_overrides=None):
    census = load_census(_require_file(args.census, "--census"))
    households = census
    if args.survey:
        households = merge_survey(census, load_survey(_require_file(args.survey, "--survey")))
    rankings = load_rankings(_require_file(args.rankings, "--rankings"), households)
    quotas = load_quotas(_require_file(args.quotas, "--quotas")) if args.quotas else {}
    return assemble_dataset(households, rankings, quotas, kind_overrides=kind_overrides)


def cmd_fit(args) -> int:
    if args.config:
        config_path = _require_file(args.config, "--config")
        spec, mcmc = cfgmod.load_model_config(config_path, args.seed)
        overrides = cfgmod.load_scaling_overrides(config_path)
    else:
        from .gibbs import McmcConfig, ModelSpec

        spec = ModelSpec()
        mcmc = McmcConfig(seed=args.seed if args.seed is not None else 0)
        overrides = None
    if spec.auxiliary and not args.survey:
        raise UsageError("auxiliary variant requires --survey")
    prior_source = "default"
    if args.prior:
        spec = cfgmod.apply_prior_file(spec, _require_file(args.prior, "--prior"))
        prior_source = str(args.prior)
    logger.info("priors: %s", prior_source)

    dataset = _load_fit_dataset(args, overrides)
    out = _out_dir(args)
    manifest = RunManifest(
        command="fit", seed=mcmc.seed, config=args.config, out_dir=str(out),
        started=_timestamp(),
        inputs={k: v for k, v in (("census", args.census), ("rankings", args.rankings),
                                  ("survey", args.survey), ("prior", args.prior)) if v},
        notes={"prior_source": prior_source},
    )
    samples = run_gibbs(spec, dataset, mcmc)

    method = "hybrid" + ("-mr" if spec.multi_ranker else "") + ("-ai" if spec.auxiliary else "")
    rows = [
        [r["method"], r["name"], _fmt(r["posterior_mean"]), _fmt(r["posterior_sd"]),
         _fmt(r["q2.5"]), _fmt(r["q97.5"])]
        for r in samples.summary_rows(method)
    ]
    _write_csv(out / "coefficients.csv",
               ["method", "name", "posterior_mean", "posterior_sd", "q2.5", "q97.5"], rows)
    std = standardized_coefficients(samples.weight_mean())
    _write_csv(out / "standardized_coefs.csv", ["method", "name", "standardized"],
               [[method, n, _fmt(v)] for n, v in zip(samples.coef_names, std)])
    write_scaling(out / "scaling.csv", dataset.scaling)
    if spec.multi_ranker:
        corr_rows = []
        for cid in dataset.ranked_community_ids:
            aggregated = aggregate_model_ranking(samples, dataset, cid)
            for scheme in dataset.rankings:
                if scheme.community_id != cid:
                    continue
                corr_rows.append(
                    [cid, scheme.ranker_id,
                     _fmt(rank_correlation(aggregated, dict(scheme.ranks)))]
                )
        _write_csv(out / "correlations.csv",
                   ["community_id", "ranker_id", "correlation"], corr_rows)
        prec_rows = [
            [rid, _fmt(m)] for rid, m in zip(samples.ranker_ids, samples.precision_mean())
        ]
        _write_csv(out / "precisions.csv", ["ranker_id", "posterior_mean"], prec_rows)
    if args.save_samples:
        samples.save(out / "samples.npz")
    manifest.write(out)
    return 0


def cmd_score(args) -> int:
    coef_path = _require_file(args.coefficients, "--coefficients")
    scaling = load_scaling(_require_file(args.scaling, "--scaling"))
    census = load_census(_require_file(args.census, "--census"))
    with coef_path.open(newline="", encoding="utf-8") as fh:
        coef_rows = list(csv.DictReader(fh))
    by_name = {r["name"]: float(r["posterior_mean"]) for r in coef_rows}
    missing = [n for n in scaling.columns if n not in by_name]
    if missing:
        raise UsageError(f"--coefficients: missing coefficients for {missing}")
    weights = np.array([by_name[n] for n in scaling.columns])

    dataset = assemble_dataset(census, standardize=False)
    x = scaling.apply(dataset.X_raw)
    elite = dataset.elite_cols if args.drop_elite else ()
    scores = compute_scores(x, weights, elite)

    out = _out_dir(args)
    manifest = RunManifest(
        command="score", seed=args.seed or 0, out_dir=str(out), started=_timestamp(),
        inputs={"coefficients": args.coefficients, "census": args.census},
        notes={"drop_elite": bool(args.drop_elite)},
    )
    _write_csv(
        out / "scores.csv", ["household_id", "community_id", "score"],
        [[h.id, h.community_id, _fmt(s)] for h, s in zip(dataset.households, scores)],
    )
    if args.quotas:
        quotas = load_quotas(_require_file(args.quotas, "--quotas"))
        by_id = dict(zip((h.id for h in dataset.households), scores))
        rows = []
        for cid, members in sorted(dataset.community_members.items()):
            if cid not in quotas:
                continue
            chosen = select_beneficiaries({h.id: by_id[h.id] for h in members}, quotas[cid])
            rows.extend([cid, hid] for hid in sorted(chosen))
        _write_csv(out / "selected.csv", ["community_id", "household_id"], rows)
    manifest.write(out)
    return 0


def cmd_evaluate(args) -> int:
    plan_data = cfgmod.load_plan_config(_require_file(args.plan, "--plan"), args.seed)
    census = load_census(_require_file(args.census, "--census"))
    households = census
    if args.survey:
        households = merge_survey(census, load_survey(_require_file(args.survey, "--survey")))
    rankings = load_rankings(_require_file(args.rankings, "--rankings"), households)
    quotas = load_quotas(_require_file(args.quotas, "--quotas"))
    overrides = plan_data.get("scaling") or None
    dataset = assemble_dataset(households, rankings, quotas, kind_overrides=overrides)

    truth = (
        load_truth_poor(_require_file(args.truth, "--truth"))
        if args.truth
        else truly_poor_from_rankings(dataset)
    )
    plan = _build_plan(plan_data, dataset, args)
    out = _out_dir(args)
    manifest = RunManifest(
        command="evaluate", seed=plan.seed, config=args.plan, out_dir=str(out),
        started=_timestamp(),
        inputs={k: v for k, v in (("census", args.census), ("rankings", args.rankings),
                                  ("survey", args.survey), ("truth", args.truth)) if v},
        notes={"workers": args.workers},
    )
    rows, summaries = replication_experiment(plan, dataset, truth, workers=args.workers)
    _write_csv(
        out / "errors.csv", ["method", "n_communities", "replication", "error"],
        [[r.method, r.n_communities, r.replication, _fmt(r.error)] for r in rows],
    )
    _write_csv(
        out / "summary.csv", ["method", "n_communities", "mean", "sd"],
        [[s.method, s.n_communities, _fmt(s.mean_error), _fmt(s.sd_error)] for s in summaries],
    )
    manifest.write(out)
    return 0


def _build_plan(plan_data: dict, dataset, args) -> ExperimentPlan:
    from .gibbs import McmcConfig

    splits = plan_data.get("splits")
    ranked = list(dataset.ranked_community_ids)
    if splits and all(k in splits for k in ("train", "test")):
        train = tuple(splits["train"])
        test = tuple(splits["test"])
        aux = tuple(splits.get("aux", ()))
    else:
        fractions = plan_data.get("fractions", {"train": 0.5, "test": 0.5})
        shuffled = list(ranked)
        derive = derive_split_rng(int(plan_data["seed"]))
        derive.shuffle(shuffled)
        n_train = int(round(fractions.get("train", 0.5) * len(shuffled)))
        n_test = int(round(fractions.get("test", 0.5) * len(shuffled)))
        train = tuple(shuffled[:n_train])
        test = tuple(shuffled[n_train : n_train + n_test])
        aux = tuple(shuffled[n_train + n_test :])
    mcmc_data = plan_data.get("mcmc", {})
    du_prior = None
    if "hybrid-du" in plan_data["methods"]:
        prior_path = plan_data.get("du_prior") or args.prior
        if not prior_path:
            raise UsageError("hybrid-du requires a prior file (plan key du_prior or --prior)")
        from .gibbs import ModelSpec

        du_prior = cfgmod.apply_prior_file(ModelSpec(), _require_file(prior_path, "du_prior"))
    try:
        return ExperimentPlan(
            sizes=tuple(int(n) for n in plan_data["sizes"]),
            replications=int(plan_data["replications"]),
            seed=int(plan_data["seed"]),
            methods=tuple(plan_data["methods"]),
            train=train,
            test=test,
            aux=aux,
            mcmc=McmcConfig(
                iterations=int(mcmc_data.get("iterations", 800)),
                burn_in=int(mcmc_data.get("burn_in", 400)),
                seed=int(plan_data["seed"]),
            ),
            quota_from_truth=bool(plan_data.get("quota_from_truth", True)),
            du_prior=du_prior,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def derive_split_rng(seed: int):
    from .rng import derive_rng

    return derive_rng(seed, 0xB1157)


def cmd_update(args) -> int:
    samples = PosteriorSamples.load(_require_file(args.samples, "--samples"))
    if args.inflation < 1.0:
        raise UsageError("--inflation must be >= 1")
    if not 0.0 <= args.shrink <= 1.0:
        raise UsageError("--shrink must lie in [0, 1]")
    out = _out_dir(args)
    manifest = RunManifest(
        command="update", seed=args.seed or 0, out_dir=str(out), started=_timestamp(),
        inputs={"samples": args.samples},
        notes={"inflation": args.inflation, "shrink": args.shrink},
    )
    prior = compose_updated_priors(samples, args.inflation, args.shrink, args.period)
    cfgmod.write_prior_file(out / "prior.yaml", prior)
    manifest.write(out)
    return 0


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranktarget",
        description="Calibrate targeting weights to community preference rankings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="master random seed")
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("generate", help="write a synthetic dataset with known truth")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit the ranking model and write coefficients")
    common(p)
    p.add_argument("--census", required=False)
    p.add_argument("--rankings", required=False)
    p.add_argument("--survey")
    p.add_argument("--quotas")
    p.add_argument("--prior", help="prior file from the update command")
    p.add_argument("--save-samples", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score census households with fitted coefficients")
    common(p)
    p.add_argument("--coefficients", required=False)
    p.add_argument("--scaling", required=False)
    p.add_argument("--census", required=False)
    p.add_argument("--quotas")
    p.add_argument("--drop-elite", action="store_true",
                   help="zero elite-connection weights when scoring")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="replication experiments over methods and sizes")
    common(p)
    p.add_argument("--plan", required=False, help="experiment plan YAML")
    p.add_argument("--census", required=False)
    p.add_argument("--rankings", required=False)
    p.add_argument("--quotas", required=False)
    p.add_argument("--survey")
    p.add_argument("--truth", help="truth.csv from the generate command")
    p.add_argument("--prior", help="prior file for hybrid-du")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("update", help="derive next-period priors from saved samples")
    common(p)
    p.add_argument("--samples", "--from", dest="samples", required=False,
                   help="samples.npz from fit --save-samples")
    p.add_argument("--inflation", type=float, default=1.5)
    p.add_argument("--shrink", type=float, default=0.1)
    p.add_argument("--period", type=int, default=1)
    p.set_defaults(func=cmd_update)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    required_by_command = {
        "fit": ("census", "rankings"),
        "score": ("coefficients", "scaling", "census"),
        "evaluate": ("plan", "census", "rankings", "quotas"),
        "update": ("samples",),
    }
    try:
        for flag in required_by_command.get(args.command, ()):
            _require_file(getattr(args, flag), f"--{flag}")
        return args.func(args)
    except (UsageError, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RankTargetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
