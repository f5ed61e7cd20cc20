"""Incremental decision tree with Hoeffding-bound split decisions.

The tree consumes discrete (binned) attribute vectors. Split attempts
happen on every training example: the best attribute by information gain
is compared against the runner-up, and the leaf splits once the observed
gain advantage exceeds the Hoeffding bound, or the bound itself drops
below the tie threshold. The null attribute (predict the majority class,
gain 0) takes part in the comparison and wins ties, so a split is only
ever materialized on an attribute with strictly positive gain.

Continuous inputs are discretized by a quantile Binner fitted once and
frozen; see fit_binner/apply_binner.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from qwalktree.errors import DegenerateFeatureError, InvalidInputError, SchemaError

TREE_FORMAT = "qwalktree-tree"
TREE_VERSION = 1


def hoeffding_bound(range_r: float, delta: float, n: int) -> float:
    """Confidence radius sqrt(R^2/2 * ln(1/delta) / n) after n observations."""
    if n < 1:
        raise InvalidInputError("n must be at least 1")
    if not 0.0 < delta <= 1.0:
        raise InvalidInputError(f"delta must be in (0, 1], got {delta!r}")
    if range_r < 0.0:
        raise InvalidInputError(f"range must be nonnegative, got {range_r!r}")
    return math.sqrt(range_r * range_r / 2.0 * math.log(1.0 / delta) / n)


def _entropy(counts, total: int) -> float:
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


class TreeNode:
    """One tree node: class counters, per-attribute per-bin counters, children."""

    __slots__ = ("class_counts", "value_class_counts", "children", "split_attribute", "depth")

    def __init__(self, n_classes: int, depth: int = 0):
        self.class_counts: list[int] = [0] * n_classes
        # attribute index -> bin index -> per-class counts
        self.value_class_counts: dict[int, dict[int, list[int]]] = {}
        self.children: dict[int, TreeNode] = {}
        self.split_attribute: int | None = None
        self.depth = depth

    def is_leaf(self) -> bool:
        return self.split_attribute is None

    def total(self) -> int:
        return sum(self.class_counts)

    def majority_class(self) -> int:
        # empty node: deterministic default, class 0; ties toward lower index
        counts = self.class_counts
        return counts.index(max(counts)) if any(counts) else 0


def info_gain(node: TreeNode, attribute: int) -> float:
    """Class entropy minus bin-count-weighted entropy of per-bin distributions."""
    total = node.total()
    if total < 1:
        raise InvalidInputError("node has not seen any samples")
    parent = _entropy(node.class_counts, total)
    children = 0.0
    for counts in node.value_class_counts.get(attribute, {}).values():
        in_bin = sum(counts)
        if in_bin > 0:
            children += in_bin / total * _entropy(counts, in_bin)
    return parent - children


@dataclass
class SplitRecord:
    """What the tree saw at the moment a leaf was split."""

    samples_seen: int
    depth: int
    attribute: int
    best_gain: float
    second_gain: float
    bound: float
    leaf_count: int


@dataclass
class Binner:
    """Frozen per-attribute quantile bin edges; maps reals to [0, n_bins)."""

    edges: list[list[float]]
    n_bins: int
    frozen: bool = True

    def bin_value(self, attribute: int, value: float) -> int:
        # count of edges strictly below the value; clips at the outer bins
        return bisect_left(self.edges[attribute], value)

    def transform(self, rows: np.ndarray) -> np.ndarray:
        """Bin a (n_rows, n_attributes) array column by column."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(self.edges):
            raise InvalidInputError(
                f"expected {len(self.edges)} attribute columns, got shape {rows.shape}"
            )
        out = np.empty(rows.shape, dtype=np.int64)
        for a, edges in enumerate(self.edges):
            out[:, a] = np.searchsorted(edges, rows[:, a], side="left")
        return out

    def to_dict(self) -> dict:
        return {"n_bins": self.n_bins, "edges": self.edges, "frozen": self.frozen}

    @classmethod
    def from_dict(cls, data: dict) -> "Binner":
        return cls(
            edges=[[float(e) for e in col] for col in data["edges"]],
            n_bins=int(data["n_bins"]),
            frozen=bool(data["frozen"]),
        )


def fit_binner(values: np.ndarray, n_bins: int) -> Binner:
    """Quantile edges per attribute, frozen on the given sample.

    Edge k (k = 1..n_bins-1) is the sorted sample value at index
    ceil(k*m/n_bins) - 1; duplicate edges collapse, so heavy ties can yield
    fewer than n_bins occupied bins.
    """
    if n_bins < 1:
        raise InvalidInputError("n_bins must be positive")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    edges: list[list[float]] = []
    m = values.shape[0]
    for a in range(values.shape[1]):
        col = np.sort(values[:, a])
        if m < 2 or col[0] == col[-1]:
            raise DegenerateFeatureError(
                f"attribute {a} needs at least 2 distinct values to bin"
            )
        att_edges: list[float] = []
        for k in range(1, n_bins):
            edge = float(col[math.ceil(k * m / n_bins) - 1])
            if not att_edges or edge > att_edges[-1]:
                att_edges.append(edge)
        edges.append(att_edges)
    return Binner(edges=edges, n_bins=n_bins)


def apply_binner(binner: Binner, row) -> list[int]:
    """Map one row of raw values to per-attribute bin indices."""
    if not binner.frozen:
        raise InvalidInputError("binner must be fitted and frozen")
    if len(row) != len(binner.edges):
        raise InvalidInputError(
            f"expected {len(binner.edges)} values, got {len(row)}"
        )
    return [binner.bin_value(a, float(v)) for a, v in enumerate(row)]


class HoeffdingTreeModel:
    """Hoeffding tree over binned attributes; single-writer, deterministic."""

    def __init__(
        self,
        n_features: int,
        n_classes: int,
        delta: float = 0.01,
        tie_threshold: float = 0.05,
        max_depth: int | None = None,
    ):
        if n_features < 1:
            raise InvalidInputError(f"n_features must be positive, got {n_features!r}")
        if n_classes < 2:
            raise InvalidInputError(f"n_classes must be at least 2, got {n_classes!r}")
        if not 0.0 < delta <= 1.0:
            raise InvalidInputError(f"delta must be in (0, 1], got {delta!r}")
        if tie_threshold < 0.0:
            raise InvalidInputError(f"tie_threshold must be >= 0, got {tie_threshold!r}")
        if max_depth is not None and max_depth < 1:
            raise InvalidInputError(f"max_depth must be positive or None, got {max_depth!r}")
        self.n_features = n_features
        self.n_classes = n_classes
        self.delta = delta
        self.tie_threshold = tie_threshold
        self.max_depth = max_depth
        self.range_r = math.log2(n_classes)
        self.samples_seen = 0
        self.root = TreeNode(n_classes)
        self.splits: list[SplitRecord] = []
        self.binner: Binner | None = None

    # ---------------- training ----------------

    def partial_fit(self, xs, ys) -> "HoeffdingTreeModel":
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.size == 0 and ys.size == 0:
            return self
        if xs.ndim != 2 or xs.shape[1] != self.n_features:
            raise InvalidInputError(
                f"expected binned vectors with {self.n_features} entries, got shape {xs.shape}"
            )
        if xs.shape[0] != ys.shape[0]:
            raise InvalidInputError(
                f"got {xs.shape[0]} vectors but {ys.shape[0]} labels"
            )
        if ys.size and (ys.min() < 0 or ys.max() >= self.n_classes):
            raise InvalidInputError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{ys.min()}, {ys.max()}]"
            )
        for row, y in zip(xs.tolist(), ys.tolist()):
            self._learn_one(row, y)
        return self

    def _learn_one(self, x: list[int], y: int) -> None:
        node = self.root
        available = set(range(self.n_features))
        while not node.is_leaf():
            available.discard(node.split_attribute)
            b = x[node.split_attribute]
            child = node.children.get(b)
            if child is None:
                child = TreeNode(self.n_classes, depth=node.depth + 1)
                node.children[b] = child
            node = child
        node.class_counts[y] += 1
        for a in available:
            bins = node.value_class_counts.setdefault(a, {})
            counts = bins.get(x[a])
            if counts is None:
                counts = bins[x[a]] = [0] * self.n_classes
            counts[y] += 1
        self.samples_seen += 1
        self._attempt_split(node, available)

    def _attempt_split(self, leaf: TreeNode, available: set[int]) -> None:
        if not available:
            return
        if self.max_depth is not None and leaf.depth >= self.max_depth:
            return
        counts = leaf.class_counts
        if sum(1 for c in counts if c > 0) <= 1:
            return  # all examples at the leaf share one class
        gains = [(a, info_gain(leaf, a)) for a in sorted(available)]
        best_attr, best_gain = gains[0]
        for a, g in gains[1:]:
            if g > best_gain:
                best_attr, best_gain = a, g
        # the null attribute (no split, gain 0) competes and wins ties
        second_gain = max((g for a, g in gains if a != best_attr), default=0.0)
        second_gain = max(second_gain, 0.0)
        if best_gain <= 0.0:
            return
        n = leaf.total()
        bound = hoeffding_bound(self.range_r, self.delta, n)
        if best_gain - second_gain > bound or bound < self.tie_threshold:
            leaf.split_attribute = best_attr
            leaf.children = {}
            leaf.value_class_counts = {}
            self.splits.append(
                SplitRecord(
                    samples_seen=self.samples_seen,
                    depth=leaf.depth,
                    attribute=best_attr,
                    best_gain=best_gain,
                    second_gain=second_gain,
                    bound=bound,
                    leaf_count=n,
                )
            )

    # ---------------- prediction ----------------

    def _sort_to_node(self, x) -> TreeNode:
        node = self.root
        while not node.is_leaf():
            child = node.children.get(int(x[node.split_attribute]))
            if child is None:
                return node  # unseen bin: fall back to this node's own counts
            node = child
        return node

    def _check_vectors(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size == 0:
            return xs.reshape(0, self.n_features)
        if xs.ndim != 2 or xs.shape[1] != self.n_features:
            raise InvalidInputError(
                f"expected binned vectors with {self.n_features} entries, got shape {xs.shape}"
            )
        return xs

    def predict(self, xs) -> np.ndarray:
        xs = self._check_vectors(xs)
        return np.array(
            [self._sort_to_node(row).majority_class() for row in xs], dtype=np.int64
        )

    def predict_proba(self, xs) -> np.ndarray:
        xs = self._check_vectors(xs)
        out = np.empty((xs.shape[0], self.n_classes), dtype=np.float64)
        uniform = 1.0 / self.n_classes
        for i, row in enumerate(xs):
            node = self._sort_to_node(row)
            total = node.total()
            if total == 0:
                out[i, :] = uniform
            else:
                out[i, :] = [c / total for c in node.class_counts]
        return out

    # ---------------- serialization ----------------

    def to_document(self) -> dict:
        nodes: list[dict] = []

        def visit(node: TreeNode) -> int:
            idx = len(nodes)
            entry = {
                "depth": node.depth,
                "split_attribute": node.split_attribute,
                "class_counts": list(node.class_counts),
                "value_class_counts": {
                    str(a): {str(b): list(c) for b, c in bins.items()}
                    for a, bins in node.value_class_counts.items()
                },
                "children": {},
            }
            nodes.append(entry)
            for b in sorted(node.children):
                entry["children"][str(b)] = visit(node.children[b])
            return idx

        visit(self.root)
        return {
            "format": TREE_FORMAT,
            "version": TREE_VERSION,
            "delta": self.delta,
            "tie_threshold": self.tie_threshold,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "range_r": self.range_r,
            "max_depth": self.max_depth,
            "samples_seen": self.samples_seen,
            "binner": self.binner.to_dict() if self.binner is not None else None,
            "splits": [vars(s).copy() for s in self.splits],
            "nodes": nodes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_document(cls, doc: dict) -> "HoeffdingTreeModel":
        if doc.get("format") != TREE_FORMAT:
            raise SchemaError(f"not a tree document: format={doc.get('format')!r}")
        if doc.get("version") != TREE_VERSION:
            raise SchemaError(f"unsupported tree document version {doc.get('version')!r}")
        model = cls(
            n_features=doc["n_features"],
            n_classes=doc["n_classes"],
            delta=doc["delta"],
            tie_threshold=doc["tie_threshold"],
            max_depth=doc["max_depth"],
        )
        model.samples_seen = doc["samples_seen"]
        model.splits = [SplitRecord(**s) for s in doc["splits"]]
        if doc["binner"] is not None:
            model.binner = Binner.from_dict(doc["binner"])

        entries = doc["nodes"]
        built: list[TreeNode] = []
        for e in entries:
            node = TreeNode(model.n_classes, depth=e["depth"])
            node.split_attribute = e["split_attribute"]
            node.class_counts = [int(c) for c in e["class_counts"]]
            node.value_class_counts = {
                int(a): {int(b): [int(v) for v in c] for b, c in bins.items()}
                for a, bins in e["value_class_counts"].items()
            }
            built.append(node)
        for e, node in zip(entries, built):
            for b, idx in e["children"].items():
                node.children[int(b)] = built[idx]
        model.root = built[0]
        return model

    @classmethod
    def from_json(cls, text: str) -> "HoeffdingTreeModel":
        return cls.from_document(json.loads(text))


def init(
    n_features: int,
    n_classes: int,
    delta: float = 0.01,
    tie_threshold: float = 0.05,
    max_depth: int | None = None,
) -> HoeffdingTreeModel:
    """Fresh single-leaf model with zero counters."""
    return HoeffdingTreeModel(n_features, n_classes, delta, tie_threshold, max_depth)
