"""Command-line interface: fit, repair, evaluate, experiment.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.
All outputs are UTF-8 CSV or JSON and byte-stable for fixed inputs.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .data import (GROUP_KEYS, empirical_weights, has_representation_bias,
                   segment, validate_labelled)
from .errors import (ConfigError, DataValidationError, FairotError,
                     NonConvergenceError, SchemaError)
from .experiments import EXPERIMENTS, ExperimentConfig, make_config, run_experiment
from .metrics import damage, e_hat
from .serialize import (config_hash, learner_to_doc, load_json, model_from_doc,
                        model_to_doc, save_json, write_labelled_csv)
from .stopping import PriorSpec, SubgroupLearner
from .transport import fit_repair_model, repair_batch

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NONCONVERGENCE = 3


def read_labelled_csv(path):
    """Read labelled rows from CSV with header ``x,u,s`` (or none)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for i, row in enumerate(reader):
            if not row:
                continue
            if i == 0 and any(c.strip().lower() in ("x", "u", "s") for c in row):
                header = [c.strip().lower() for c in row]
                continue
            try:
                rows.append([float(v) for v in row[:3]])
            except ValueError as exc:
                raise SchemaError(f"{path}:{i + 1}: not numeric: {row!r}") from exc
    if header is not None and header[:3] != ["x", "u", "s"]:
        raise SchemaError(f"{path}: expected columns x,u,s, got {header[:3]}")
    return validate_labelled(np.asarray(rows, dtype=float).reshape(-1, 3))


def _add_learner_flags(p):
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="stopping threshold for the smoothed divergence")
    p.add_argument("--nu0", type=float, default=0.001,
                   help="prior degrees of freedom")
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--kmin", type=int, default=10)
    p.add_argument("--resolution", type=float, default=0.0,
                   help="observation grid width (0 keeps raw values)")
    p.add_argument("--prior-lo", type=float, default=None)
    p.add_argument("--prior-hi", type=float, default=None)


def cmd_fit(args) -> int:
    arr = read_labelled_csv(args.input)
    dataset = segment(arr)
    if args.prior_lo is None or args.prior_hi is None:
        lo, hi = float(arr[:, 0].min()), float(arr[:, 0].max())
        pad = 0.05 * (hi - lo) if hi > lo else 1.0
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = args.prior_lo, args.prior_hi
    prior = PriorSpec.uniform(lo, hi, nu0=args.nu0)
    learners = {}
    for key in GROUP_KEYS:
        learner = SubgroupLearner(prior, epsilon=args.epsilon,
                                  window=args.window, k_min=args.kmin,
                                  resolution=args.resolution)
        xs = dataset.group(*key)
        if len(xs) == 0:
            raise DataValidationError(f"group {key} has no rows; cannot fit")
        learner.absorb_until_quenched(xs)
        if not learner.quenched:
            raise NonConvergenceError(
                f"group {key} exhausted its {len(xs)} rows before stopping "
                f"(smoothed divergence {learner.smoothed_kld:.4g})")
        learners[key] = learner
    stopping = {k: l.stopping_number() for k, l in learners.items()}
    weights = empirical_weights(dataset)
    model = fit_repair_model(dataset, learners, weights=weights)
    meta = {"source": str(args.input), "seed": args.seed,
            "config_hash": config_hash({
                "epsilon": args.epsilon, "nu0": args.nu0,
                "window": args.window, "k_min": args.kmin,
                "resolution": args.resolution, "prior": [lo, hi]})}
    save_json(model_to_doc(model, meta=meta), args.out)
    report = {
        "stopping_numbers": {f"{u},{s}": stopping[(u, s)]
                             for u, s in GROUP_KEYS},
        "group_counts": {f"{u},{s}": dataset.counts[(u, s)]
                         for u, s in GROUP_KEYS},
        "weights": weights.as_dict(),
        "representation_bias": {
            f"{u},{s}": has_representation_bias((u, s), weights, dataset.n,
                                                stopping[(u, s)])
            for u, s in GROUP_KEYS},
        **meta,
    }
    if args.report:
        save_json(report, args.report)
    if args.save_learners:
        save_json({f"{u},{s}": learner_to_doc(learners[(u, s)])
                   for u, s in GROUP_KEYS}, args.save_learners)
    log.info("fit: stopping numbers %s", report["stopping_numbers"])
    return EXIT_OK


def cmd_repair(args) -> int:
    model = model_from_doc(load_json(args.model))
    arr = read_labelled_csv(args.input)
    rng = np.random.default_rng(args.seed)
    if len(arr):
        repaired = repair_batch(model, arr, rng, strategy=args.strategy)[:, 0]
    else:
        repaired = np.empty(0)
    write_labelled_csv(args.out, arr, repaired=repaired)
    return EXIT_OK


def _read_eval_csv(path):
    """Pre/post CSV for evaluate; prefers an x_repaired column when present."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        table = [row for row in reader if row]
    if not table:
        raise SchemaError(f"{path}: empty file")
    header = [c.strip().lower() for c in table[0]]
    if "x" not in header:
        raise SchemaError(f"{path}: expected a header with x,u,s")
    xcol = header.index("x_repaired") if "x_repaired" in header \
        else header.index("x")
    ucol, scol = header.index("u"), header.index("s")
    arr = np.asarray([[float(r[xcol]), float(r[ucol]), float(r[scol])]
                      for r in table[1:]], dtype=float).reshape(-1, 3)
    return validate_labelled(arr)


def cmd_evaluate(args) -> int:
    pre = _read_eval_csv(args.pre)
    post = _read_eval_csv(args.post)
    if len(pre) != len(post) or np.any(pre[:, 1:] != post[:, 1:]):
        raise DataValidationError(
            "pre and post files must align row-for-row with equal labels")
    pre_ds, post_ds = segment(pre), segment(post)
    fairness = e_hat(pre_ds, post_ds, args.bins, args.smoothing)
    dmg = damage(pre_ds, post_ds, args.damage_bins, args.damage_smoothing)
    doc = {
        "fairness": fairness.as_dict(),
        "damage": dmg.as_dict(),
        "inputs": {"pre": str(args.pre), "post": str(args.post)},
        "config_hash": config_hash({
            "bins": args.bins, "smoothing": args.smoothing,
            "damage_bins": args.damage_bins,
            "damage_smoothing": args.damage_smoothing}),
    }
    save_json(doc, args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_doc(load_json(args.config))
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
        if args.adult_path:
            cfg.extras["adult_path"] = args.adult_path
    else:
        if not args.experiment:
            raise ConfigError("need --experiment or --config")
        if args.seed is None:
            raise ConfigError("a --seed is mandatory")
        extras = {}
        if args.adult_path:
            extras["adult_path"] = args.adult_path
        if args.feature:
            extras["features"] = list(args.feature)
        cfg = make_config(args.experiment, args.seed, trials=args.trials,
                          epsilon=args.epsilon, nu0=args.nu0, bins=args.bins,
                          resolution=args.resolution, extras=extras)
    out_dir = Path(args.out)
    records, summary, series = run_experiment(cfg, out_dir=out_dir)
    log.info("experiment %s: %d records -> %s", cfg.experiment, len(records),
             out_dir)
    print(out_dir / "summary.json")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairot",
                     description="Bias-tolerant distribution learning and "
                                 "optimal-transport data repair")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="learn group models and a repair operator")
    p.add_argument("--input", required=True, help="labelled CSV (x,u,s)")
    p.add_argument("--out", required=True, help="model snapshot JSON")
    p.add_argument("--report", default=None, help="stopping report JSON")
    p.add_argument("--save-learners", default=None, help="learner snapshots")
    p.add_argument("--seed", type=int, default=0)
    _add_learner_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("repair", help="apply a fitted model to labelled data")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--strategy", choices=("independent", "stratified"),
                   default="stratified")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("evaluate", help="fairness and damage of a repair")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--smoothing", type=float, default=1e-6)
    p.add_argument("--damage-bins", type=int, default=10)
    p.add_argument("--damage-smoothing", type=float, default=1.0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a named experiment preset")
    p.add_argument("--experiment", choices=EXPERIMENTS, default=None)
    p.add_argument("--config", default=None, help="config JSON document")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--nu0", type=float, default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--feature", action="append", default=None,
                   help="adult feature (repeatable)")
    p.add_argument("--adult-path", default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"diagnostics: {exc.diagnostics}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (FairotError, FileNotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
