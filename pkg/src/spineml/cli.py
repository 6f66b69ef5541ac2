"""Command-line interface: generate, run, report, predict.

Exit codes: 0 success, 1 domain error (printed to stderr), 2 usage error.
All randomness flows from explicit --seed flags (default constant 42), so
repeat invocations are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dataset import write_csv
from .errors import PipelineError
from .experiment import (
    MODEL_IDS,
    ExperimentConfig,
    run_matrix_fitted,
)
from .persist import load_model, predict_single, save_model
from .report import emit_report, load_results, render_table5_text
from .schema import GROUP_IDS
from .synthetic import generate_synthetic

DEFAULT_SEED = 42


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spineml",
        description="Spine-surgery outcome prediction pipeline: synthetic data, "
        "model-by-group experiments, reports, and single-record prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic patient CSV")
    gen.add_argument("--n", type=int, default=244, help="number of patients (≥ 20)")
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--signal", type=float, default=0.5,
                     help="strength of injected predictive structure in [0, 1]")
    gen.add_argument("--p-success", type=float, default=0.522,
                     help="success-class proportion")
    gen.add_argument("--out", required=True, help="output CSV path")

    run = sub.add_parser("run", help="run the experiment matrix and write reports")
    run.add_argument("--config", help="JSON experiment config (flags override it)")
    run.add_argument("--csv", help="input CSV path (default: synthetic data)")
    run.add_argument("--schema", help="JSON schema override file")
    run.add_argument("--n", type=int, help="synthetic patient count (default 244)")
    run.add_argument("--signal", type=float, help="synthetic signal strength (default 0.5)")
    run.add_argument("--data-seed", type=int, help="synthetic generator seed (default: master seed)")
    run.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
    run.add_argument("--groups", help="comma list of variable groups, e.g. I,IV,VII")
    run.add_argument("--models", help="comma list of model ids, e.g. KNN,DT_opt")
    run.add_argument("--test-fraction", type=float, help="test partition fraction (default 0.25)")
    run.add_argument("--folds", type=int, help="cross-validation folds (default 8)")
    run.add_argument("--keep-fraction", type=float, help="feature-selection keep fraction (default 1.0)")
    run.add_argument("--scoring", choices=("f1", "accuracy"), help="grid-search scoring (default f1)")
    run.add_argument("--per-cell-split", action="store_true",
                     help="use an independent split per cell instead of one shared split")
    run.add_argument("--workers", type=int, help="concurrent cell workers (default 1)")
    run.add_argument("--save-models", action="store_true",
                     help="persist every fitted cell under <out>/models/")
    run.add_argument("--out", help="report directory (default: results)")

    rep = sub.add_parser("report", help="re-render tables/charts from results.json")
    rep.add_argument("--results", required=True, help="existing results.json")
    rep.add_argument("--out", required=True, help="directory for re-rendered files")

    pred = sub.add_parser("predict", help="classify one record with a saved model")
    pred.add_argument("--model", required=True, help="persisted model file")
    pred.add_argument("--record", required=True,
                      help="JSON file path or inline JSON object with the features")
    pred.add_argument("--trace", action="store_true",
                      help="include the preprocessing trace in the output")
    return parser


def _cmd_generate(args, parser) -> int:
    if args.n < 20:
        parser.error("n must be ≥ 20")
    if not 0.0 <= args.signal <= 1.0:
        parser.error("signal must be in [0, 1]")
    ds = generate_synthetic(args.n, args.seed, args.signal, p_success=args.p_success)
    write_csv(ds, args.out)
    n0, n1 = ds.class_counts()
    print(
        f"wrote {args.out}: n={ds.n}, success={n1} ({100.0 * n1 / ds.n:.1f}%), "
        f"no-success={n0} ({100.0 * n0 / ds.n:.1f}%)"
    )
    return 0


def _parse_list(parser, text, valid, what):
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    for item in items:
        if item not in valid:
            parser.error(f"unknown {what}: {item}")
    return items


def _build_run_config(args, parser) -> ExperimentConfig:
    raw = {}
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        raw = config.canonical_dict()
        raw["out_dir"] = config.out_dir
        raw["workers"] = config.workers
        raw["save_models"] = config.save_models
    if args.csv:
        raw["data"] = {"csv": args.csv}
    elif args.n is not None or args.signal is not None or args.data_seed is not None:
        syn = raw.get("data", {}).get("synthetic", {}) if "data" in raw else {}
        if args.n is not None:
            syn["n"] = args.n
        if args.signal is not None:
            syn["signal"] = args.signal
        if args.data_seed is not None:
            syn["seed"] = args.data_seed
        raw["data"] = {"synthetic": syn}
    if args.schema:
        raw["schema"] = args.schema
    if args.groups:
        raw["groups"] = list(_parse_list(parser, args.groups, GROUP_IDS, "group"))
    if args.models:
        raw["models"] = list(_parse_list(parser, args.models, MODEL_IDS, "model"))
    for key, value in (
        ("test_fraction", args.test_fraction),
        ("n_folds", args.folds),
        ("seed", args.seed),
        ("keep_fraction", args.keep_fraction),
        ("scoring", args.scoring),
        ("workers", args.workers),
        ("out_dir", args.out),
    ):
        if value is not None:
            raw[key] = value
    if args.per_cell_split:
        raw["per_cell_split"] = True
    if args.save_models:
        raw["save_models"] = True
    if raw.get("schema") is None:
        raw.pop("schema", None)
    return ExperimentConfig.from_dict(raw)


def _cmd_run(args, parser) -> int:
    config = _build_run_config(args, parser)
    matrix, fitted = run_matrix_fitted(config)
    files = emit_report(matrix, config.out_dir)
    if config.save_models:
        models_dir = Path(config.out_dir) / "models"
        models_dir.mkdir(parents=True, exist_ok=True)
        for (g, m), fit in fitted.items():
            cell = matrix.cells[(g, m)]
            save_model(cell, fit, models_dir / f"{m}__{g}.json")
    failures = [c for c in matrix.cells.values() if c.error is not None]
    print(render_table5_text(matrix))
    print(f"\nreports written to {files['table4'].parent}")
    if failures:
        for c in failures:
            print(f"cell failed: {c.model_id} × {c.group_id}: {c.error}", file=sys.stderr)
    return 0


def _cmd_report(args, parser) -> int:
    matrix = load_results(args.results)
    files = emit_report(matrix, args.out, write_results=False)
    print(f"re-rendered {len(files)} files in {args.out}")
    return 0


def _cmd_predict(args, parser) -> int:
    pm = load_model(args.model)
    text = args.record
    if not text.lstrip().startswith("{") and os.path.exists(text):
        with open(text, "r", encoding="utf-8") as fh:
            record = json.load(fh)
    else:
        try:
            record = json.loads(text)
        except json.JSONDecodeError:
            parser.error("--record must be a JSON object or a path to one")
    if not isinstance(record, dict):
        parser.error("--record must decode to a JSON object")
    result = predict_single(pm, record, trace=args.trace)
    print(json.dumps(result))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "run": _cmd_run,
    "report": _cmd_report,
    "predict": _cmd_predict,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
