"""Command-line entry point: ``qkbench {run,grid,gram,importances,selfcheck}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from qkbench import qka, qkernel, selfcheck
from qkbench.bench import config as cfgmod
from qkbench.bench import pipeline
from qkbench.errors import ConfigurationError, QkbenchError
from qkbench.featuremap import FeatureMapSpec
from qkbench.preprocess import rescale, trees

GRID_KEYS = {"base", "rescalers", "selectors", "algorithms", "sample_caps"}


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def cmd_run(args):
    cfg = cfgmod.load_config(args.config)
    report = pipeline.run_experiment(cfg, fit_prep_once=args.fit_prep_once)
    _dump(report.to_dict(), args.out)
    if args.out:
        print(f"cv {report.cv_mean:.4f} +/- {report.cv_std:.4f}, test {report.test_accuracy:.4f}")
    return 0


def load_grid(path):
    spec = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = sorted(set(spec) - GRID_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown grid keys: {unknown}")
    if "base" not in spec:
        raise ConfigurationError("grid config needs a 'base' experiment config")
    base = cfgmod.from_dict(spec["base"])
    return (
        base,
        spec.get("rescalers", list(cfgmod.RESCALERS)),
        spec.get("selectors", ["decision_tree", "random_forest"]),
        spec.get("algorithms", list(cfgmod.ALGORITHMS)),
        spec.get("sample_caps", [base.sample_cap]),
    )


def cmd_grid(args):
    base, rescalers, selectors, algorithms, caps = load_grid(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    configs = list(pipeline.grid_configs(base, rescalers, selectors, algorithms, caps))
    results = pipeline.run_grid(configs, fit_prep_once=args.fit_prep_once)
    summary = []
    for i, res in enumerate(results):
        c = res["config"]
        stem = f"{i:04d}_{c['rescaler']}_{c['reducer']['kind']}_{c['algorithm']}"
        _dump(res, out / f"{stem}.json")
        summary.append({
            "sample_cap": c["sample_cap"],
            "rescaler": c["rescaler"],
            "reducer": c["reducer"]["kind"],
            "algorithm": c["algorithm"],
            "cv_mean": res.get("cv_mean"),
            "cv_std": res.get("cv_std"),
            "test_accuracy": res.get("test_accuracy"),
            "error": res.get("error"),
        })
    _dump(summary, out / "summary.json")
    print(f"{len(results)} reports written to {out}")
    return 0


def _prepared(cfg):
    timings = {}
    ds = pipeline.prepare_dataset(cfg, timings)
    prep = pipeline.fit_prep(cfg, ds.features, ds.labels)
    return ds, prep


def cmd_gram(args):
    cfg = cfgmod.load_config(args.config)
    if not cfg.is_quantum:
        raise ConfigurationError(f"gram export needs a quantum algorithm, got {cfg.algorithm!r}")
    ds, prep = _prepared(cfg)
    Z = prep.transform(ds.features)
    mode = qkernel.EXACT if cfg.shots is None else qkernel.Sampled(cfg.shots, cfg.seed)
    if cfg.algorithm == cfgmod.QKA_ALGORITHM:
        cov = qka.CovariantKernelSpec(FeatureMapSpec(pipeline.QKA_BASE_KIND, Z.shape[1], cfg.reps))
        result = qka.spsa_train(cov, Z, ds.labels, qka.QkaConfig(
            cfg.qka.max_iterations, cfg.qka.learning_rate, cfg.qka.perturbation, cfg.svm_c, cfg.seed))
        K = qka.gram_lambda(cov, result.lambda_star, Z, mode)
    else:
        K = qkernel.gram(FeatureMapSpec(cfg.algorithm, Z.shape[1], cfg.reps), Z, mode)
    K.save(args.out)
    print(f"{K.size_a}x{K.size_b} {K.mode} Gram written to {args.out}")
    return 0


def cmd_importances(args):
    cfg = cfgmod.load_config(args.config)
    ds = pipeline.prepare_dataset(cfg, {})
    Z = rescale.apply_rescaler(rescale.fit_rescaler(cfg.rescaler, ds.features), ds.features)
    if cfg.reducer.kind == "select_forest":
        report = trees.forest_importances(Z, ds.labels, trees.ForestConfig(seed=cfg.seed))
    else:
        report = trees.tree_importances(Z, ds.labels, trees.TreeConfig(seed=cfg.seed))
    order = np.argsort(-report.importances, kind="stable")
    rows = [{"feature": ds.feature_names[j], "importance": float(report.importances[j])} for j in order]
    _dump({"method": report.method.value, "importances": rows, "warnings": report.warnings})
    return 0


def cmd_selfcheck(args):
    return 0 if selfcheck.run(seed=args.seed) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkbench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--fit-prep-once", action="store_true",
                   help="fit rescaler/reducer once on the full training split instead of per fold")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid", help="run a rescaler x selector x algorithm grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fit-prep-once", action="store_true")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("gram", help="export a quantum Gram matrix in QKGM format")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("importances", help="print tree-based feature importances")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_importances)

    p = sub.add_parser("selfcheck", help="run the oracle comparisons")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except QkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
