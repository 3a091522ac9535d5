"""Command-line front door: train, label, report, compare, bench.

Exit codes are a stable contract: 0 on success (and on a clean `compare`
match), 1 when `compare` finds a semantic mismatch, 2 for usage or input
errors. All state is explicit flags; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .cloud import CloudDataError, load_records, regime_report, write_report
from .trainer import (
    ASSIGNMENTS_FILE,
    MANIFEST_FILE,
    PROTOTYPES_FILE,
    TrainerConfig,
    load_run,
    save_run,
    train,
)

__all__ = ["main", "console_main"]


def _add_map_size_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rows", type=int, default=None, help="map rows (requires --cols)")
    parser.add_argument("--cols", type=int, default=None, help="map columns (requires --rows)")
    parser.add_argument(
        "--avg-per-node",
        type=float,
        default=None,
        help="derive the map size from a target average of samples per node",
    )


def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    _add_map_size_flags(parser)
    parser.add_argument(
        "--learning-rate", type=float, default=0.1, help="initial learning rate (default 0.1)"
    )
    parser.add_argument(
        "--base",
        type=float,
        default=math.e,
        help="logarithmic base of the decay schedules (default e)",
    )
    parser.add_argument(
        "--init",
        choices=["gradient", "random"],
        default="gradient",
        help="prototype initialization scheme",
    )
    parser.add_argument(
        "--select",
        choices=["staggered", "random"],
        default="staggered",
        help="sample selection schedule",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed for the random modes")
    parser.add_argument(
        "--epoch-cap", type=int, default=None, help="hard bound on the epoch budget"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detsom",
        description="Deterministic self-organizing map training and cloud-regime reporting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a map and write run artifacts")
    p_train.add_argument("--input", required=True, help="input record CSV")
    p_train.add_argument("--out", required=True, help="run output directory")
    _add_training_flags(p_train)

    p_label = sub.add_parser("label", help="assign records to nodes of a trained map")
    p_label.add_argument("--run", required=True, help="trained run directory")
    p_label.add_argument("--input", required=True, help="input record CSV")
    p_label.add_argument("--out", required=True, help="output assignments CSV")

    p_report = sub.add_parser("report", help="compute regime products for a trained run")
    p_report.add_argument("--run", required=True, help="trained run directory")
    p_report.add_argument("--input", required=True, help="the CSV the run was trained on")
    p_report.add_argument(
        "--out", default=None, help="output directory (default: the run directory)"
    )
    p_report.add_argument(
        "--emit-pgm", action="store_true", help="also write grayscale PGM views of RFO grids"
    )

    p_compare = sub.add_parser(
        "compare", help="byte-compare the artifacts of two runs (exit 0 iff identical)"
    )
    p_compare.add_argument("run_a", help="first run directory")
    p_compare.add_argument("run_b", help="second run directory")

    p_bench = sub.add_parser(
        "bench", help="time the init/select mode combinations on one input"
    )
    p_bench.add_argument("--input", required=True, help="input record CSV")
    p_bench.add_argument(
        "--seeds",
        required=True,
        help="comma-separated seeds for the randomized mode combinations",
    )
    p_bench.add_argument("--out", default=None, help="also write the report as JSON")
    _add_map_size_flags(p_bench)
    p_bench.add_argument("--learning-rate", type=float, default=0.1)
    p_bench.add_argument("--base", type=float, default=math.e)
    p_bench.add_argument("--epoch-cap", type=int, default=None)

    return parser


def _check_map_size(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    explicit = args.rows is not None or args.cols is not None
    if explicit and (args.rows is None or args.cols is None):
        parser.error("--rows and --cols must be given together")
    if explicit and args.avg_per_node is not None:
        parser.error("--avg-per-node conflicts with --rows/--cols")
    if not explicit and args.avg_per_node is None:
        parser.error("one of --rows/--cols or --avg-per-node is required")


def _load_input(path: str):
    p = Path(path)
    if not p.exists():
        raise CloudDataError(f"input file not found: {p}")
    return load_records(p)


def _config_from_args(args: argparse.Namespace, init: str, select: str, seed) -> TrainerConfig:
    return TrainerConfig(
        rows=args.rows,
        cols=args.cols,
        avg_samples_per_node=args.avg_per_node,
        learning_rate=args.learning_rate,
        base=args.base,
        init=init,
        selection=select,
        seed=seed,
        epoch_cap=args.epoch_cap,
    )


def _cmd_train(parser, args) -> int:
    _check_map_size(parser, args)
    config = _config_from_args(args, args.init, args.select, args.seed)
    try:
        config.validate()
    except ValueError as exc:
        parser.error(str(exc))
    dataset, dropped_missing, dropped_all_zero = _load_input(args.input)
    if not len(dataset):
        raise CloudDataError(f"{args.input}: no usable records after filtering")
    run = train(dataset.features(), config, input_hash=dataset.source_hash)
    save_run(run, args.out)
    print(
        f"trained {run.grid.rows}x{run.grid.cols} map on {len(dataset)} records "
        f"({dropped_missing} dropped missing, {dropped_all_zero} dropped all-zero): "
        f"{run.epochs_run} epochs, "
        f"{'converged' if run.converged else 'epoch budget exhausted'}"
    )
    print(f"artifacts written to {args.out}")
    return 0


def _cmd_label(args) -> int:
    run = load_run(args.run)
    dataset, _, _ = _load_input(args.input)
    if not len(dataset):
        raise CloudDataError(f"{args.input}: no usable records after filtering")
    features = dataset.features()
    if features.shape[1] != run.grid.dim:
        raise CloudDataError(
            f"{args.input}: records have {features.shape[1]} features, "
            f"map expects {run.grid.dim}"
        )
    prototypes = run.grid.prototypes
    lines = ["record_index,row,col"]
    for i in range(features.shape[0]):
        diff = prototypes - features[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        row, col = run.grid.coord(int(np.argmin(d2)))
        lines.append(f"{i},{row},{col}")
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"labeled {features.shape[0]} records -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    run = load_run(args.run)
    dataset, dropped_missing, dropped_all_zero = _load_input(args.input)
    report = regime_report(run, dataset)
    out_dir = args.out if args.out is not None else args.run
    write_report(
        report,
        out_dir,
        dropped_missing=dropped_missing,
        dropped_all_zero=dropped_all_zero,
        emit_pgm=args.emit_pgm,
    )
    print(f"report for {report.rows}x{report.cols} map written to {out_dir}")
    return 0


def _diff_summary(path_a: Path, path_b: Path) -> str | None:
    """None when byte-identical, otherwise a one-line human summary."""
    bytes_a = path_a.read_bytes()
    bytes_b = path_b.read_bytes()
    if bytes_a == bytes_b:
        return None
    lines_a = bytes_a.splitlines()
    lines_b = bytes_b.splitlines()
    n_diff = sum(1 for la, lb in zip(lines_a, lines_b) if la != lb)
    n_diff += abs(len(lines_a) - len(lines_b))
    first = next(
        (
            i + 1
            for i, (la, lb) in enumerate(zip(lines_a, lines_b))
            if la != lb
        ),
        min(len(lines_a), len(lines_b)) + 1,
    )
    return f"{n_diff} differing lines (first at line {first})"


def _cmd_compare(args) -> int:
    mismatched = False
    for name in (PROTOTYPES_FILE, ASSIGNMENTS_FILE):
        path_a = Path(args.run_a) / name
        path_b = Path(args.run_b) / name
        for p in (path_a, path_b):
            if not p.exists():
                raise CloudDataError(f"incomplete run directory: missing {p}")
        summary = _diff_summary(path_a, path_b)
        if summary is None:
            print(f"{name}: identical")
        else:
            print(f"{name}: {summary}")
            mismatched = True
    return 1 if mismatched else 0


# Labels for the incremental determinism components: GI = gradient
# initialization, SSS = staggered sample selection.
_BENCH_LABELS = {
    ("random", "random"): "SOM",
    ("gradient", "random"): "SOM+GI",
    ("random", "staggered"): "SOM+SSS",
    ("gradient", "staggered"): "SOM+GI+SSS",
}


def _result_hash(run) -> str:
    h = hashlib.sha256()
    h.update(run.grid.prototypes.tobytes())
    h.update(np.ascontiguousarray(run.assignments, dtype=np.int64).tobytes())
    return h.hexdigest()


def _cmd_bench(parser, args) -> int:
    _check_map_size(parser, args)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError:
        parser.error(f"--seeds must be comma-separated integers, got {args.seeds!r}")
    if not seeds:
        parser.error("--seeds needs at least one seed")
    dataset, _, _ = _load_input(args.input)
    if not len(dataset):
        raise CloudDataError(f"{args.input}: no usable records after filtering")
    features = dataset.features()

    combos: list[tuple[str, str, int | None]] = [("gradient", "staggered", None)]
    for seed in seeds:
        combos += [
            ("random", "random", seed),
            ("gradient", "random", seed),
            ("random", "staggered", seed),
        ]
    rows = []
    for init, select, seed in combos:
        config = _config_from_args(args, init, select, seed)
        started = time.perf_counter()
        run = train(features, config, input_hash=dataset.source_hash)
        elapsed = time.perf_counter() - started
        rows.append(
            {
                "label": _BENCH_LABELS[(init, select)],
                "init": init,
                "select": select,
                "seed": seed,
                "wall_clock_sec": elapsed,
                "epochs_run": run.epochs_run,
                "converged": run.converged,
                "result_hash": _result_hash(run),
            }
        )

    print("| label | init | select | seed | wall_clock_sec | epochs_run | converged |")
    print("|---|---|---|---|---|---|---|")
    for r in rows:
        seed_txt = "-" if r["seed"] is None else str(r["seed"])
        print(
            f"| {r['label']} | {r['init']} | {r['select']} | {seed_txt} "
            f"| {r['wall_clock_sec']:.3f} | {r['epochs_run']} | {str(r['converged']).lower()} |"
        )
    if args.out:
        payload = {"input_hash": dataset.source_hash, "runs": rows}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"bench report written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "train":
            return _cmd_train(parser, args)
        if args.command == "label":
            return _cmd_label(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "bench":
            return _cmd_bench(parser, args)
    except SystemExit as exc:  # parser.error inside a subcommand
        return int(exc.code or 0)
    except (CloudDataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


def console_main() -> None:
    sys.exit(main())
