import csv
import string
from pathlib import Path

import numpy as np
import pytest


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    setattr(item, "outcome_" + report.when, report)

from qwalktree import embed
from qwalktree.features import FEATURE_COLUMNS, LABEL_COLUMN
from qwalktree.pipeline import apply_scaler, fit_scaler

ALPHABET = string.ascii_lowercase + string.digits + "-"

# two prototype feature rows whose embedded walk lengths are well separated;
# every row of the synthetic stream is one of these two
PROTO_BENIGN = [12.0, 2.8, 1.1, 0.9, 0.55, 0.2, 120.0]
PROTO_DGA = [22.0, 3.9, 2.4, 1.6, 0.75, 0.8, 10.0]


def threshold_dataset(n_rows: int, seed: int = 0):
    """Rows drawn from two prototypes; label = 1 iff walk length > threshold.

    The threshold is the midpoint of the two embedded walk lengths, computed
    with the same scaling the pipeline applies, so the label is exactly the
    stated threshold rule.
    """
    rng = np.random.default_rng(seed)
    group = rng.integers(0, 2, n_rows)
    rows = np.where(group[:, None] == 0, PROTO_BENIGN, PROTO_DGA)
    scaler = fit_scaler(rows)
    walks = embed.walk_lengths(apply_scaler(scaler, rows), reps=1)
    lo = np.unique(walks[group == 0]).item()
    hi = np.unique(walks[group == 1]).item()
    threshold = 0.5 * (lo + hi)
    labels = (walks > threshold).astype(np.int64)
    return rows, labels, threshold


def write_feature_csv(path: Path, rows: np.ndarray, labels: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*FEATURE_COLUMNS, LABEL_COLUMN])
        for row, label in zip(rows, labels):
            writer.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]] + [int(label)])


class TickClock:
    """Deterministic stand-in for time.perf_counter."""

    def __init__(self, step: float = 0.25):
        self.now = 0.0
        self.step = step

    def __call__(self) -> float:
        self.now += self.step
        return self.now


@pytest.fixture
def tick_clock():
    return TickClock()


@pytest.fixture
def profile_dir(tmp_path):
    """A benign profile plus two family profiles over the full alphabet."""
    rng = np.random.default_rng(17)
    directory = tmp_path / "profiles"
    directory.mkdir()

    def write(name, probs):
        lines = [f"{c} {float(p)!r}" for c, p in zip(ALPHABET, probs) if p > 0]
        (directory / f"{name}.profile").write_text("\n".join(lines) + "\n")

    benign = np.zeros(len(ALPHABET))
    benign[:26] = rng.dirichlet(np.ones(26) * 6)
    write("benign", benign)
    for i in range(2):
        fam = np.zeros(len(ALPHABET))
        fam[:36] = rng.dirichlet(np.ones(36))
        write(f"family{i}", fam)
    return directory
