"""Command-line interface.

Subcommands: features (extract from raw domains), embed (walk-length CSV),
train (full batch-wise pipeline with checkpointing), report (regenerate
metrics CSV + plot from a run directory).

Option values resolve as: command-line flag > config-file entry > built-in
default. The config file is INI-style with one section per subcommand; the
effective train configuration is echoed into the output directory.

Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from qwalktree import features as feat
from qwalktree import pipeline as pl
from qwalktree.embed import walk_lengths
from qwalktree.errors import (
    InvalidConfigError,
    QwalktreeError,
    RowError,
    SchemaError,
)

log = logging.getLogger("qwalktree.cli")

PROFILE_DIR_ENV = "QWALKTREE_PROFILES"
CONFIG_ECHO_NAME = "effective-config.ini"

# option name -> (type, default); shared by flag parsing and config files
TRAIN_OPTIONS: dict[str, tuple[type, object]] = {
    "batch_size": (int, 1000),
    "batches": (int, 5),
    "test_fraction": (float, 0.3),
    "delta": (float, 0.01),
    "tie_threshold": (float, 0.05),
    "bins": (int, 16),
    "reps": (int, 1),
    "seed": (int, 0),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalktree",
        description="Streaming DGA classification over walk-length features.",
    )
    parser.add_argument("--config", help="INI config file with one section per subcommand")
    sub = parser.add_subparsers(dest="command", required=True)

    p_feat = sub.add_parser("features", help="extract feature rows from raw domain names")
    p_feat.add_argument("--input", required=True, help="CSV with columns domain,label")
    p_feat.add_argument("--profiles", help=f"profile directory (default ${PROFILE_DIR_ENV})")
    p_feat.add_argument("--output", required=True, help="feature CSV to write")

    p_embed = sub.add_parser("embed", help="emit walk lengths for a feature CSV")
    p_embed.add_argument("--input", required=True, help="feature CSV (seven columns + label)")
    p_embed.add_argument("--output", required=True, help="walk-length CSV to write")
    p_embed.add_argument("--reps", type=int, default=None)
    p_embed.add_argument(
        "--scale",
        action="store_true",
        help="fit and apply the standard scaler on the input before embedding",
    )

    p_train = sub.add_parser("train", help="run the batch-wise training pipeline")
    p_train.add_argument("--input", required=True, help="feature CSV, or domain CSV with --profiles")
    p_train.add_argument("--profiles", help="profile directory for raw-domain input")
    p_train.add_argument("--output-dir", required=True)
    p_train.add_argument("--resume", help="checkpoint file to continue from")
    p_train.add_argument("--batch-size", type=int, default=None)
    p_train.add_argument("--batches", type=int, default=None)
    p_train.add_argument("--test-fraction", type=float, default=None)
    p_train.add_argument("--delta", type=float, default=None)
    p_train.add_argument("--tie-threshold", type=float, default=None)
    p_train.add_argument("--bins", type=int, default=None)
    p_train.add_argument("--reps", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)

    p_rep = sub.add_parser("report", help="regenerate metrics CSV and plot from a run directory")
    p_rep.add_argument("--run-dir", required=True)

    return parser


def _load_config_section(path: str | None, section: str) -> dict[str, str]:
    if path is None:
        return {}
    if not Path(path).is_file():
        raise InvalidConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise InvalidConfigError(f"config file {path}: {exc}") from exc
    if not parser.has_section(section):
        return {}
    return dict(parser.items(section))


def _resolve(args: argparse.Namespace, file_values: dict[str, str]) -> dict:
    """flag > config file > default, for the train option set."""
    resolved: dict[str, object] = {}
    for name, (cast, default) in TRAIN_OPTIONS.items():
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            resolved[name] = flag_value
        elif name in file_values:
            try:
                resolved[name] = cast(file_values[name])
            except ValueError as exc:
                raise InvalidConfigError(
                    f"config value {name} = {file_values[name]!r}: {exc}"
                ) from exc
        else:
            resolved[name] = default
    return resolved


def _echo_config(out_dir: Path, section: str, values: dict) -> None:
    echo = configparser.ConfigParser()
    echo[section] = {k: str(v) for k, v in values.items()}
    with open(out_dir / CONFIG_ECHO_NAME, "w", encoding="utf-8") as fh:
        echo.write(fh)


def _profile_dir(explicit: str | None) -> Path:
    path = explicit or os.environ.get(PROFILE_DIR_ENV)
    if not path:
        raise SchemaError(
            f"no profile directory given (use --profiles or ${PROFILE_DIR_ENV})"
        )
    return Path(path)


# ---------------- subcommands ----------------


def cmd_features(args, file_values) -> int:
    profiles = feat.load_profiles(_profile_dir(args.profiles))
    rows = []
    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is not None:
            if "domain" not in reader.fieldnames or "label" not in reader.fieldnames:
                raise SchemaError(f"{args.input}: need columns domain,label")
            for record in reader:
                line = reader.line_num
                try:
                    label = int(record["label"])
                except (TypeError, ValueError):
                    raise RowError(line, f"bad label {record['label']!r}") from None
                try:
                    rows.append(feat.extract_row(record["domain"], label, profiles))
                except QwalktreeError as exc:
                    raise RowError(line, str(exc)) from exc
    feat.write_rows(rows, args.output)
    log.info("wrote %d feature rows to %s", len(rows), args.output)
    return 0


def cmd_embed(args, file_values) -> int:
    reps = args.reps
    if reps is None:
        try:
            reps = int(file_values.get("reps", 1))
        except ValueError as exc:
            raise InvalidConfigError(f"config value reps: {exc}") from exc
    rows = feat.load_precomputed(args.input)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_index", "walk_length", "label"])
        if rows:
            matrix, labels = feat.rows_to_arrays(rows)
            if args.scale:
                matrix = pl.apply_scaler(pl.fit_scaler(matrix), matrix)
            lengths = walk_lengths(matrix, reps)
            for i, (length, label) in enumerate(zip(lengths, labels)):
                writer.writerow([i, repr(float(length)), int(label)])
    log.info("wrote %d walk lengths to %s", len(rows), args.output)
    return 0


def _load_training_data(args) -> tuple[np.ndarray, np.ndarray]:
    with open(args.input, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    if "domain" in header:
        profiles = feat.load_profiles(_profile_dir(args.profiles))
        rows = []
        with open(args.input, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for record in reader:
                line = reader.line_num
                try:
                    rows.append(
                        feat.extract_row(record["domain"], int(record["label"]), profiles)
                    )
                except (QwalktreeError, TypeError, ValueError) as exc:
                    raise RowError(line, str(exc)) from exc
    else:
        rows = feat.load_precomputed(args.input)
    if not rows:
        raise SchemaError(f"{args.input}: no data rows")
    return feat.rows_to_arrays(rows)


def cmd_train(args, file_values) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix, labels = _load_training_data(args)

    resume_state = None
    if args.resume:
        resume_state = pl.load_checkpoint(args.resume)
        config = resume_state.config
        log.info("resuming from batch %d of %s", resume_state.next_batch + 1, args.resume)
    else:
        values = _resolve(args, file_values)
        config = pl.BatchConfig(
            batch_size=values["batch_size"],
            n_batches=values["batches"],
            test_fraction=values["test_fraction"],
            seed=values["seed"],
            n_bins=values["bins"],
            reps=values["reps"],
            delta=values["delta"],
            tie_threshold=values["tie_threshold"],
        )
        config.validate()

    _echo_config(
        out_dir,
        "train",
        {
            "input": args.input,
            "output_dir": str(out_dir),
            "batch_size": config.batch_size,
            "batches": config.n_batches,
            "test_fraction": config.test_fraction,
            "delta": config.delta,
            "tie_threshold": config.tie_threshold,
            "bins": config.n_bins,
            "reps": config.reps,
            "seed": config.seed,
        },
    )

    report = pl.run_pipeline(matrix, labels, config, run_dir=out_dir, resume=resume_state)
    pl.emit_report(report, out_dir)

    state = pl.load_checkpoint(out_dir / pl.CHECKPOINT_NAME)
    (out_dir / "model.json").write_text(
        pl.canonical_json(state.model_doc), encoding="utf-8"
    )
    avg = report.averages()
    log.info(
        "finished %d batches: average accuracy=%.4f f1=%.4f auc=%s",
        len(report.batches),
        avg["accuracy"],
        avg["f1"],
        "n/a" if avg["auc"] is None else f"{avg['auc']:.4f}",
    )
    return 0


def cmd_report(args, file_values) -> int:
    run_dir = Path(args.run_dir)
    checkpoint = run_dir / pl.CHECKPOINT_NAME
    if not checkpoint.is_file():
        raise SchemaError(f"no checkpoint found in run directory: {run_dir}")
    state = pl.load_checkpoint(checkpoint)
    pl.emit_report(pl.RunReport(batches=state.completed), run_dir)
    log.info("regenerated report for %d batches in %s", len(state.completed), run_dir)
    return 0


COMMANDS = {
    "features": cmd_features,
    "embed": cmd_embed,
    "train": cmd_train,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = _load_config_section(args.config, args.command)
        return COMMANDS[args.command](args, file_values)
    except (SchemaError, InvalidConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except QwalktreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
