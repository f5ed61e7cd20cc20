"""End-to-end batch-wise training pipeline.

Order of operations: one global seeded shuffle of the loaded sample, a
standard scaler fitted once on the full sample, embedding of every row to
its walk length, then per batch: train/test split, incremental tree
update, prediction, and metrics. A resumable checkpoint is written after
every batch; restoring it and continuing reproduces an uninterrupted run
exactly (given the same inputs, seed, and clock).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from qwalktree import embed
from qwalktree.errors import (
    CheckpointError,
    DegenerateFeatureError,
    InvalidConfigError,
    InvalidInputError,
    QwalktreeError,
    UndefinedMetricError,
)
from qwalktree.metrics import accuracy, f1_score, roc_auc
from qwalktree.tree import HoeffdingTreeModel, fit_binner

log = logging.getLogger("qwalktree.pipeline")

CHECKPOINT_FORMAT = "qwalktree-checkpoint"
CHECKPOINT_VERSION = 1
CHECKPOINT_NAME = "checkpoint.json"


class PipelineError(QwalktreeError):
    """A component failed inside the batch loop; message carries the batch."""


# ---------------- scaling ----------------


@dataclass(frozen=True)
class ScalerState:
    """Per-feature mean and population standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerState":
        return cls(
            mean=np.asarray(data["mean"], dtype=np.float64),
            std=np.asarray(data["std"], dtype=np.float64),
        )


def fit_scaler(rows: np.ndarray) -> ScalerState:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise InvalidInputError("scaler needs a 2-D sample with at least 2 rows")
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)  # population standard deviation
    spread = rows.max(axis=0) - rows.min(axis=0)
    for i in range(rows.shape[1]):
        if std[i] == 0.0 or spread[i] == 0.0:
            raise DegenerateFeatureError(f"feature {i} has zero variance")
    return ScalerState(mean=mean, std=std)


def apply_scaler(scaler: ScalerState, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    return (rows - scaler.mean) / scaler.std


# ---------------- batching ----------------


def split_train_test(batch, test_fraction: float, seed: int):
    """Seeded shuffle, then first ceil((1-f)*n) rows train, rest test."""
    batch = np.asarray(batch)
    n = batch.shape[0]
    if n == 0:
        raise InvalidInputError("batch must be nonempty")
    if not 0.0 < test_fraction < 1.0:
        raise InvalidConfigError(
            f"test_fraction must be in (0, 1), got {test_fraction!r}"
        )
    n_test = math.floor(test_fraction * n + 1e-9)
    n_train = n - n_test
    if n_test == 0 or n_train == 0:
        raise InvalidConfigError(
            f"test_fraction {test_fraction!r} yields an empty partition for n={n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return batch[perm[:n_train]], batch[perm[n_train:]]


@dataclass(frozen=True)
class BatchConfig:
    """Run parameters; defaults mirror the reference experiment layout."""

    batch_size: int = 1000
    n_batches: int = 5
    test_fraction: float = 0.3
    seed: int = 0
    n_bins: int = 16
    reps: int = 1
    delta: float = 0.01
    tie_threshold: float = 0.05

    def validate(self, n_rows: int | None = None) -> None:
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be positive, got {self.batch_size!r}")
        if self.n_batches < 1:
            raise InvalidConfigError(f"n_batches must be positive, got {self.n_batches!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfigError(
                f"test_fraction must be in (0, 1), got {self.test_fraction!r}"
            )
        if self.test_fraction * self.batch_size < 1.0:
            raise InvalidConfigError(
                "test_fraction * batch_size must be at least 1"
            )
        if self.n_bins < 1:
            raise InvalidConfigError(f"n_bins must be positive, got {self.n_bins!r}")
        if self.reps < 1:
            raise InvalidConfigError(f"reps must be positive, got {self.reps!r}")
        if not 0.0 < self.delta <= 1.0:
            raise InvalidConfigError(f"delta must be in (0, 1], got {self.delta!r}")
        if self.tie_threshold < 0.0:
            raise InvalidConfigError(
                f"tie_threshold must be nonnegative, got {self.tie_threshold!r}"
            )
        if n_rows is not None and self.batch_size * self.n_batches > n_rows:
            raise InvalidConfigError(
                f"batch_size * n_batches = {self.batch_size * self.n_batches} "
                f"exceeds the dataset size {n_rows}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BatchConfig":
        return cls(**data)


@dataclass(frozen=True)
class BatchMetrics:
    """Evaluation of one batch; auc is None when the test split is one-class."""

    batch_index: int
    accuracy: float
    f1: float
    auc: float | None
    train_count: int
    test_count: int
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BatchMetrics":
        return cls(**data)


@dataclass
class RunReport:
    """Per-batch metrics plus their averages."""

    batches: list[BatchMetrics] = field(default_factory=list)

    def averages(self) -> dict:
        if not self.batches:
            return {"accuracy": None, "f1": None, "auc": None,
                    "train_count": None, "test_count": None, "wall_time": None}
        aucs = [b.auc for b in self.batches if b.auc is not None]
        return {
            "accuracy": float(np.mean([b.accuracy for b in self.batches])),
            "f1": float(np.mean([b.f1 for b in self.batches])),
            "auc": float(np.mean(aucs)) if aucs else None,
            "train_count": float(np.mean([b.train_count for b in self.batches])),
            "test_count": float(np.mean([b.test_count for b in self.batches])),
            "wall_time": float(np.mean([b.wall_time for b in self.batches])),
        }


# ---------------- checkpointing ----------------


@dataclass
class PipelineState:
    """Everything needed to continue a run after the last finished batch."""

    config: BatchConfig
    model_doc: dict
    scaler: ScalerState
    rng_state: dict
    completed: list[BatchMetrics]
    next_batch: int
    data_fingerprint: str


def canonical_json(payload: dict) -> str:
    """Deterministic JSON encoding used for checksums and emitted documents."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_checkpoint(state: PipelineState, path: str | Path) -> None:
    """Atomically write a versioned, checksummed checkpoint."""
    payload = {
        "config": state.config.to_dict(),
        "model": state.model_doc,
        "scaler": state.scaler.to_dict(),
        "rng_state": state.rng_state,
        "completed": [m.to_dict() for m in state.completed],
        "next_batch": state.next_batch,
        "data_fingerprint": state.data_fingerprint,
    }
    body = canonical_json(payload)
    document = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "checksum": hashlib.sha256(body.encode()).hexdigest(),
        "payload": payload,
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(document))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str | Path) -> PipelineState:
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"checkpoint {path} is corrupt: {exc}") from exc
    if document.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a checkpoint file")
    if document.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {document.get('version')!r}"
        )
    payload = document.get("payload")
    if payload is None or hashlib.sha256(
        canonical_json(payload).encode()
    ).hexdigest() != document.get("checksum"):
        raise CheckpointError(f"checkpoint {path} failed its checksum")
    return PipelineState(
        config=BatchConfig.from_dict(payload["config"]),
        model_doc=payload["model"],
        scaler=ScalerState.from_dict(payload["scaler"]),
        rng_state=payload["rng_state"],
        completed=[BatchMetrics.from_dict(m) for m in payload["completed"]],
        next_batch=payload["next_batch"],
        data_fingerprint=payload["data_fingerprint"],
    )


def _fingerprint(features: np.ndarray, labels: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(features).tobytes())
    digest.update(np.ascontiguousarray(labels).tobytes())
    return digest.hexdigest()


# ---------------- the run itself ----------------


def run_pipeline(
    features: np.ndarray,
    labels: np.ndarray,
    config: BatchConfig,
    run_dir: str | Path | None = None,
    resume: PipelineState | None = None,
    clock=time.perf_counter,
    stop_after: int | None = None,
) -> RunReport:
    """Shuffle, scale, embed, then train/evaluate batch by batch.

    ``resume`` continues from a loaded checkpoint; ``stop_after`` ends the
    run early after that many total batches (used to exercise resuming).
    Returns the report of all completed batches.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise InvalidInputError(
            f"features {features.shape} and labels {labels.shape} do not line up"
        )
    if labels.size and not np.isin(labels, (0, 1)).all():
        raise InvalidInputError("labels must be 0 (benign) or 1 (DGA)")
    config.validate(features.shape[0])
    fingerprint = _fingerprint(features, labels)

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(features.shape[0])

    if resume is not None:
        if resume.data_fingerprint != fingerprint:
            raise CheckpointError(
                "checkpoint was produced from different input data"
            )
        if resume.config != config:
            raise CheckpointError("checkpoint was produced with a different config")
        model = HoeffdingTreeModel.from_document(resume.model_doc)
        scaler = resume.scaler
        completed = list(resume.completed)
        first_batch = resume.next_batch
        rng.bit_generator.state = resume.rng_state
    else:
        model = HoeffdingTreeModel(
            n_features=1,
            n_classes=2,
            delta=config.delta,
            tie_threshold=config.tie_threshold,
        )
        scaler = fit_scaler(features)
        completed = []
        first_batch = 0

    walk = embed.walk_lengths(apply_scaler(scaler, features), config.reps)
    walk = walk[order]
    y = labels[order]

    run_dir = Path(run_dir) if run_dir is not None else None
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)

    last = config.n_batches if stop_after is None else min(stop_after, config.n_batches)
    for b in range(first_batch, last):
        started = clock()
        lo = b * config.batch_size
        batch_idx = np.arange(lo, lo + config.batch_size)
        split_seed = int(rng.integers(0, 2**63))
        try:
            train_idx, test_idx = split_train_test(
                batch_idx, config.test_fraction, split_seed
            )
            if model.binner is None:
                model.binner = fit_binner(
                    walk[train_idx].reshape(-1, 1), config.n_bins
                )
            xs_train = model.binner.transform(walk[train_idx].reshape(-1, 1))
            model.partial_fit(xs_train, y[train_idx])
            xs_test = model.binner.transform(walk[test_idx].reshape(-1, 1))
            y_pred = model.predict(xs_test)
            scores = model.predict_proba(xs_test)[:, 1]
            y_test = y[test_idx]
            acc = accuracy(y_test, y_pred)
            f1 = f1_score(y_test, y_pred)
            try:
                auc = roc_auc(y_test, scores)
            except UndefinedMetricError:
                auc = None
        except QwalktreeError as exc:
            raise PipelineError(f"batch {b + 1}: {exc}") from exc
        metrics = BatchMetrics(
            batch_index=b + 1,
            accuracy=acc,
            f1=f1,
            auc=auc,
            train_count=int(train_idx.size),
            test_count=int(test_idx.size),
            wall_time=clock() - started,
        )
        completed.append(metrics)
        log.info(
            "batch %d/%d: train=%d test=%d accuracy=%.4f f1=%.4f auc=%s wall=%.3fs",
            b + 1,
            config.n_batches,
            metrics.train_count,
            metrics.test_count,
            metrics.accuracy,
            metrics.f1,
            "n/a" if auc is None else f"{auc:.4f}",
            metrics.wall_time,
        )
        if run_dir is not None:
            save_checkpoint(
                PipelineState(
                    config=config,
                    model_doc=model.to_document(),
                    scaler=scaler,
                    rng_state=rng.bit_generator.state,
                    completed=completed,
                    next_batch=b + 1,
                    data_fingerprint=fingerprint,
                ),
                run_dir / CHECKPOINT_NAME,
            )
    return RunReport(batches=completed)


# ---------------- reporting ----------------


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: RunReport, out_dir: str | Path) -> None:
    """Write metrics.csv and metrics.svg for a (possibly partial) run."""
    if not report.batches:
        raise InvalidInputError("report has no completed batches")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    columns = ("accuracy", "f1", "auc", "train_count", "test_count", "wall_time")
    lines = ["batch," + ",".join(columns)]
    for m in report.batches:
        lines.append(
            ",".join([str(m.batch_index)] + [_format_cell(getattr(m, c)) for c in columns])
        )
    avg = report.averages()
    lines.append(",".join(["average"] + [_format_cell(avg[c]) for c in columns]))
    (out_dir / "metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    _plot_metrics(report, out_dir / "metrics.svg")


def _plot_metrics(report: RunReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [m.batch_index for m in report.batches]
    series = {
        "accuracy": [m.accuracy for m in report.batches],
        "F1": [m.f1 for m in report.batches],
        "AUC": [np.nan if m.auc is None else m.auc for m in report.batches],
    }
    with plt.rc_context({"svg.hashsalt": "qwalktree"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for name, values in series.items():
            ax.plot(xs, values, marker="o", label=name)
        ax.set_xlabel("batch")
        ax.set_ylabel("metric")
        ax.set_ylim(0.0, 1.0)
        if len(xs) > 1:
            ax.set_xlim(xs[0], xs[-1])
        else:
            ax.set_xlim(xs[0] - 0.5, xs[0] + 0.5)
        ax.set_xticks(xs)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
