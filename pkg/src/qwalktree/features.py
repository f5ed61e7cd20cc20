"""Domain-name features for DGA detection.

Seven features per domain: character length, Shannon entropy of the
character distribution, KL divergence against a benign reference profile,
minimum KL divergence against a set of DGA-family profiles, generalized
Jensen-Shannon divergence against the family profiles, plus two
pass-through columns (TreeNewFeature, Reputation) that come precomputed
with the dataset. Features can also be ingested directly from a CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from qwalktree.errors import (
    DivergenceUndefinedError,
    InvalidInputError,
    RowError,
    SchemaError,
)

# lowercase letters, digits, hyphen: the DNS label alphabet (37 symbols)
ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789-"

DEFAULT_SMOOTHING = 1e-6

FEATURE_COLUMNS = (
    "CharLength",
    "EntropyValue",
    "RelativeEntropy",
    "MinREBotnets",
    "InformationRadius",
    "TreeNewFeature",
    "Reputation",
)
LABEL_COLUMN = "label"


@dataclass(frozen=True)
class CharDistribution:
    """Probability distribution over a fixed character alphabet."""

    alphabet: str
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (len(self.alphabet),):
            raise InvalidInputError(
                f"need one probability per alphabet symbol "
                f"({len(self.alphabet)}), got shape {probs.shape}"
            )
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidInputError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class ReferenceProfiles:
    """One benign character profile plus named DGA-family profiles."""

    benign: CharDistribution
    families: dict[str, CharDistribution]

    def __post_init__(self):
        if not self.families:
            raise InvalidInputError("at least one family profile is required")
        for name, dist in self.families.items():
            if dist.alphabet != self.benign.alphabet:
                raise InvalidInputError(f"profile {name!r} uses a different alphabet")


@dataclass(frozen=True)
class FeatureRow:
    """One labeled record of the seven-column feature schema."""

    char_length: int
    entropy_value: float
    relative_entropy: float
    min_re_botnets: float
    information_radius: float
    tree_new_feature: float
    reputation: float
    label: int

    def values(self) -> list[float]:
        """Feature values in dataset column order (without the label)."""
        return [
            float(self.char_length),
            self.entropy_value,
            self.relative_entropy,
            self.min_re_botnets,
            self.information_radius,
            self.tree_new_feature,
            self.reputation,
        ]


def normalize_domain(domain: str, alphabet: str = ALPHABET) -> str:
    """Lowercase, join the dot-separated labels, drop foreign characters."""
    keep = set(alphabet)
    return "".join(c for c in domain.lower().replace(".", "") if c in keep)


def char_distribution(domain: str, alphabet: str = ALPHABET) -> CharDistribution:
    """Relative character frequencies of a domain name."""
    name = normalize_domain(domain, alphabet)
    if not name:
        raise InvalidInputError(
            f"domain {domain!r} has no characters from the alphabet"
        )
    counts = np.zeros(len(alphabet), dtype=np.float64)
    index = {c: i for i, c in enumerate(alphabet)}
    for c in name:
        counts[index[c]] += 1.0
    return CharDistribution(alphabet, counts / counts.sum())


def shannon_entropy(dist: CharDistribution) -> float:
    """-sum p log2 p, in bits; 0 log 0 reads as 0."""
    p = dist.probs[dist.probs > 0]
    return float(-(p * np.log2(p)).sum() + 0.0)


def kl_divergence(
    p: CharDistribution,
    q: CharDistribution,
    smoothing: float = DEFAULT_SMOOTHING,
) -> float:
    """KL(p || q') in bits, where q' is q with additive smoothing, renormalized."""
    if p.alphabet != q.alphabet:
        raise InvalidInputError("distributions must share one alphabet")
    if smoothing < 0:
        raise InvalidInputError("smoothing must be nonnegative")
    qp = q.probs
    if smoothing > 0:
        qp = (qp + smoothing) / (qp + smoothing).sum()
    mask = p.probs > 0
    if (qp[mask] == 0).any():
        raise DivergenceUndefinedError(
            "reference distribution has zero probability where p > 0 "
            "and smoothing is 0"
        )
    pv = p.probs[mask]
    return float((pv * np.log2(pv / qp[mask])).sum())


def relative_entropy(
    domain: str, profiles: ReferenceProfiles, smoothing: float = DEFAULT_SMOOTHING
) -> float:
    """KL divergence of the domain's character distribution from the benign profile."""
    return kl_divergence(char_distribution(domain, profiles.benign.alphabet),
                         profiles.benign, smoothing)


def min_re_botnets(
    domain: str, profiles: ReferenceProfiles, smoothing: float = DEFAULT_SMOOTHING
) -> float:
    """Minimum KL divergence over the DGA-family profiles."""
    dist = char_distribution(domain, profiles.benign.alphabet)
    return min(kl_divergence(dist, fam, smoothing) for fam in profiles.families.values())


def information_radius(domain: str, profiles: ReferenceProfiles) -> float:
    """Generalized Jensen-Shannon divergence of the domain against the families.

    The domain's distribution is pooled with the k family profiles at equal
    weights 1/(k+1): H(mixture) minus the mean of the individual entropies.
    Nonnegative and bounded by log2(k+1).
    """
    dist = char_distribution(domain, profiles.benign.alphabet)
    members = [dist] + list(profiles.families.values())
    mixture = CharDistribution(
        dist.alphabet,
        np.mean([m.probs for m in members], axis=0),
    )
    mean_entropy = sum(shannon_entropy(m) for m in members) / len(members)
    return shannon_entropy(mixture) - mean_entropy


def extract_row(
    domain: str,
    label: int,
    profiles: ReferenceProfiles,
    tree_new_feature: float = 0.0,
    reputation: float = 0.0,
    smoothing: float = DEFAULT_SMOOTHING,
) -> FeatureRow:
    """Compute the five derived features; the two pass-through ones are supplied."""
    if label not in (0, 1):
        raise InvalidInputError(f"label must be 0 or 1, got {label!r}")
    name = normalize_domain(domain, profiles.benign.alphabet)
    if not name:
        raise InvalidInputError(f"domain {domain!r} has no characters from the alphabet")
    dist = char_distribution(domain, profiles.benign.alphabet)
    return FeatureRow(
        char_length=len(name),
        entropy_value=shannon_entropy(dist),
        relative_entropy=kl_divergence(dist, profiles.benign, smoothing),
        min_re_botnets=min(
            kl_divergence(dist, fam, smoothing) for fam in profiles.families.values()
        ),
        information_radius=information_radius(domain, profiles),
        tree_new_feature=tree_new_feature,
        reputation=reputation,
        label=label,
    )


# ---------------- profile and dataset I/O ----------------

BENIGN_PROFILE_NAMES = ("benign", "alexa")


def _parse_profile(path: Path, alphabet: str) -> CharDistribution:
    probs = np.zeros(len(alphabet), dtype=np.float64)
    index = {c: i for i, c in enumerate(alphabet)}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or len(parts[0]) != 1:
                raise SchemaError(
                    f"{path.name}: line {lineno}: expected '<char> <probability>'"
                )
            char, value = parts
            if char not in index:
                raise SchemaError(
                    f"{path.name}: line {lineno}: character {char!r} not in the alphabet"
                )
            try:
                probs[index[char]] = float(value)
            except ValueError:
                raise SchemaError(
                    f"{path.name}: line {lineno}: bad probability {value!r}"
                ) from None
    total = probs.sum()
    if not 0.999 <= total <= 1.001:
        raise SchemaError(f"{path.name}: probabilities sum to {total:.6f}, not 1")
    return CharDistribution(alphabet, probs / total)


def load_profiles(path: str | Path, alphabet: str = ALPHABET) -> ReferenceProfiles:
    """Load '<name>.profile' files from a directory.

    The file named 'benign' (or 'alexa') is the benign reference; every
    other file is one DGA family.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise SchemaError(f"profile directory not found: {directory}")
    benign = None
    families: dict[str, CharDistribution] = {}
    for file in sorted(directory.glob("*.profile")):
        dist = _parse_profile(file, alphabet)
        if file.stem.lower() in BENIGN_PROFILE_NAMES:
            benign = dist
        else:
            families[file.stem] = dist
    if benign is None:
        raise SchemaError(
            f"no benign profile in {directory} (expected benign.profile or alexa.profile)"
        )
    if not families:
        raise SchemaError(f"no family profiles in {directory}")
    return ReferenceProfiles(benign=benign, families=families)


def _parse_field(name: str, text: str, line: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise RowError(line, f"column {name}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise RowError(line, f"column {name}: value must be finite, got {text!r}")
    return value


def _validate_row(fields: dict[str, float], line: int) -> FeatureRow:
    cl = fields["CharLength"]
    if cl <= 0 or cl != int(cl):
        raise RowError(line, f"CharLength must be a positive integer, got {cl!r}")
    label = fields[LABEL_COLUMN]
    if label not in (0.0, 1.0):
        raise RowError(line, f"label must be 0 or 1, got {label!r}")
    for name in ("EntropyValue", "RelativeEntropy", "MinREBotnets",
                 "InformationRadius", "Reputation"):
        if fields[name] < 0:
            raise RowError(line, f"{name} must be nonnegative, got {fields[name]!r}")
    if not 0.0 <= fields["TreeNewFeature"] <= 1.0:
        raise RowError(line, f"TreeNewFeature must be in [0, 1], got {fields['TreeNewFeature']!r}")
    return FeatureRow(
        char_length=int(cl),
        entropy_value=fields["EntropyValue"],
        relative_entropy=fields["RelativeEntropy"],
        min_re_botnets=fields["MinREBotnets"],
        information_radius=fields["InformationRadius"],
        tree_new_feature=fields["TreeNewFeature"],
        reputation=fields["Reputation"],
        label=int(label),
    )


def load_precomputed(path: str | Path) -> list[FeatureRow]:
    """Read a feature CSV (seven feature columns plus label), validating each row."""
    path = Path(path)
    rows: list[FeatureRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return rows  # empty file
        missing = [c for c in (*FEATURE_COLUMNS, LABEL_COLUMN)
                   if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        for record in reader:
            line = reader.line_num
            fields = {
                name: _parse_field(name, record[name], line)
                for name in (*FEATURE_COLUMNS, LABEL_COLUMN)
            }
            rows.append(_validate_row(fields, line))
    return rows


def write_rows(rows: Iterable[FeatureRow], path: str | Path) -> None:
    """Write FeatureRows in the same CSV schema load_precomputed reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*FEATURE_COLUMNS, LABEL_COLUMN])
        for row in rows:
            writer.writerow(
                [row.char_length]
                + [repr(v) for v in row.values()[1:]]
                + [row.label]
            )


def rows_to_arrays(rows: Sequence[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    """Stack rows into a (n, 7) feature matrix and a label vector."""
    features = np.array([r.values() for r in rows], dtype=np.float64)
    labels = np.array([r.label for r in rows], dtype=np.int64)
    return features.reshape(len(rows), len(FEATURE_COLUMNS)), labels
