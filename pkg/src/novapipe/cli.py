"""Command-line interface.

Subcommands mirror the pipeline stages: profile, train, report, predict,
serve. Exit codes: 0 ok, 2 preflight or validation failure, 1 internal
error. The report path writes delimited metrics plus rendered figures next
to each other.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import contract, figures
from .configuration import default_config
from .data_intake import parse_csv, profile_dataset
from .errors import NovapipeError, PreflightFailedError
from .evaluation import EvaluationReport
from .training import one_click_train

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_profile(args) -> int:
    data = Path(args.csv).read_bytes()
    dataset = parse_csv(data)
    report = profile_dataset(dataset)
    _print_json(report.to_dict())
    return EXIT_OK


def cmd_train(args) -> int:
    data = Path(args.csv).read_bytes()
    dataset = parse_csv(data)
    report = profile_dataset(dataset)
    cfg = default_config(report, args.target)
    if args.inputs:
        columns = [c.strip() for c in args.inputs.split(",") if c.strip()]
        if not columns:
            print("--inputs expects a comma-separated column list", file=sys.stderr)
            return EXIT_VALIDATION
        cfg.input_columns = columns
    if args.cascade:
        cfg.strategy = "cascade"
    if args.seed is not None:
        cfg.seed = args.seed

    def progress(update):
        print(f"[{update.fraction_done:5.0%}] {update.message}", file=sys.stderr)

    trained, eval_report, metadata = one_click_train(dataset, cfg, progress)
    out = Path(args.out) if args.out else Path(f"novapipe-model-{metadata.model_id}")
    contract.save_model(trained, metadata, out)
    _print_json({
        "model_id": metadata.model_id,
        "artifact": str(out),
        "strategy": metadata.strategy,
        "accuracy": eval_report.accuracy,
        "macro_f1": eval_report.macro_f1,
    })
    return EXIT_OK


def cmd_report(args) -> int:
    artifact = Path(args.artifact)
    _, metadata = contract.load_model(artifact)
    eval_report = EvaluationReport.from_dict(metadata.metrics_snapshot)
    out = Path(args.out) if args.out else artifact.parent / f"{artifact.name}-report"
    written = figures.render_report_files(eval_report, out)
    _print_json({
        "model_id": metadata.model_id,
        "strategy": metadata.strategy,
        "accuracy": eval_report.accuracy,
        "macro_f1": eval_report.macro_f1,
        "weighted_f1": eval_report.weighted_f1,
        "files": [str(p) for p in written],
    })
    return EXIT_OK


def cmd_predict(args) -> int:
    model, metadata = contract.load_model(Path(args.artifact))
    inputs = {}
    for pair in args.input or []:
        if "=" not in pair:
            print(f"--input expects key=value, got {pair!r}", file=sys.stderr)
            return EXIT_VALIDATION
        key, value = pair.split("=", 1)
        inputs[key] = value
    errors = contract.validate_inputs(metadata, inputs)
    if errors:
        _print_json({"errors": errors})
        return EXIT_VALIDATION
    prediction = contract.predict(model, metadata, inputs)
    _print_json(prediction.to_dict())
    return EXIT_OK


def cmd_serve(args) -> int:  # pragma: no cover - runs a server loop
    from .server import run_server

    run_server(port=args.port, data_dir=args.data_dir, workers=args.workers)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="novapipe",
        description="One-click text classification: profile, train, report, predict, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="parse and profile a CSV file")
    p.add_argument("csv")
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("train", help="train a model with one command")
    p.add_argument("csv")
    p.add_argument("--target", required=True, help="target label column")
    p.add_argument("--inputs", help="comma-separated input columns (default: text columns)")
    p.add_argument("--cascade", action="store_true", help="use the cascade strategy")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="artifact output directory")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("report", help="render metrics CSV and figures from an artifact")
    p.add_argument("artifact")
    p.add_argument("--out", help="report output directory")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("predict", help="predict with a saved artifact")
    p.add_argument("artifact")
    p.add_argument("--input", action="append", metavar="KEY=VALUE")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PreflightFailedError as exc:
        _print_json({"issues": [i.to_dict() for i in exc.issues]})
        return EXIT_VALIDATION
    except NovapipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - last-resort exit code mapping
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
