"""Decision-tree learner over question feature vectors, written from scratch.

Splits are binary. A boolean predictor routes False left, True right; the
numeric ``length`` predictor routes ``<= threshold`` left with thresholds at
midpoints between adjacent distinct observed values. Each node takes the
split with maximal information gain; ties prefer the predictor earliest in
the canonical field order, then the smallest threshold. Instances are
sorted into a canonical order before growing, so the learned tree does not
depend on how the training file was shuffled.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence

from .features import FEATURE_NAMES, FeatureVector
from .model import QuestionType


class EmptyTrainingSet(ValueError):
    """Training or baseline fitting got no instances."""


class MalformedModel(ValueError):
    """A model document that cannot be decoded into a tree."""


class UnsupportedVersion(ValueError):
    """A model document written by a newer format revision."""


MODEL_FORMAT_VERSION = 1

#: Order that breaks leaf-label ties after training frequency.
LABEL_TIE_ORDER: tuple[QuestionType, ...] = (
    QuestionType.YN,
    QuestionType.WH,
    QuestionType.DQ,
    QuestionType.CS,
    QuestionType.PQ,
)

_BOOLEAN_FEATURES = tuple(n for n in FEATURE_NAMES if n != "length")


@dataclass(frozen=True)
class LabeledInstance:
    fv: FeatureVector
    label: QuestionType


@dataclass(frozen=True)
class TrainConfig:
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    random_seed: Optional[int] = None  # reserved; training is deterministic

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when set")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class Node:
    """Internal node (feature set, two children) or leaf (label set)."""

    feature: Optional[str] = None
    threshold: Optional[float] = None
    left: Optional["Node"] = None
    right: Optional["Node"] = None
    label: Optional[QuestionType] = None
    distribution: Optional[dict] = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class TreeModel:
    root: Node

    def depth(self) -> int:
        def walk(node: Node) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def entropy(labels: Iterable[QuestionType]) -> float:
    """Shannon entropy in bits of the empirical label distribution."""
    counts = Counter(labels)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    # fixed summation order keeps float results permutation-independent
    for key in sorted(counts, key=str):
        p = counts[key] / total
        h -= p * math.log2(p)
    return h if h > 0.0 else 0.0


def _goes_right(fv: FeatureVector, feature: str, threshold: Optional[float]) -> bool:
    value = getattr(fv, feature)
    if threshold is None:
        return bool(value)
    return value > threshold


def _partition(
    instances: Sequence[LabeledInstance], feature: str, threshold: Optional[float]
) -> tuple[list[LabeledInstance], list[LabeledInstance]]:
    left: list[LabeledInstance] = []
    right: list[LabeledInstance] = []
    for inst in instances:
        (right if _goes_right(inst.fv, feature, threshold) else left).append(inst)
    return left, right


def candidate_splits(instances: Sequence[LabeledInstance]) -> list[tuple[str, Optional[float]]]:
    """All splits considered at a node, in tie-break order."""
    splits: list[tuple[str, Optional[float]]] = [(name, None) for name in _BOOLEAN_FEATURES]
    lengths = sorted({inst.fv.length for inst in instances})
    for low, high in zip(lengths, lengths[1:]):
        splits.append(("length", (low + high) / 2))
    return splits


def information_gain(
    instances: Sequence[LabeledInstance], feature: str, threshold: Optional[float] = None
) -> float:
    """Entropy reduction of one binary split; 0 when a side is empty."""
    left, right = _partition(instances, feature, threshold)
    if not left or not right:
        return 0.0
    n = len(instances)
    gain = (
        entropy(i.label for i in instances)
        - len(left) / n * entropy(i.label for i in left)
        - len(right) / n * entropy(i.label for i in right)
    )
    return gain if gain > 0.0 else 0.0


def _leaf(counts: Counter, global_counts: Counter) -> Node:
    label = max(
        counts,
        key=lambda lbl: (counts[lbl], global_counts[lbl], -LABEL_TIE_ORDER.index(lbl)),
    )
    return Node(label=label, distribution=dict(counts))


def train_tree(data: Iterable[LabeledInstance], cfg: TrainConfig = TrainConfig()) -> TreeModel:
    """Grow a tree by greedy information-gain maximization.

    Growth stops at label purity, at ``max_depth``, when a split would
    leave a side under ``min_samples_leaf``, or when no candidate split
    achieves positive gain. Leaf label ties break by count at the leaf,
    then count in the whole training set, then a fixed label order.
    """
    instances = sorted(data, key=lambda inst: (inst.fv.as_tuple(), inst.label.value))
    if not instances:
        raise EmptyTrainingSet("no training instances")
    global_counts = Counter(inst.label for inst in instances)

    def grow(subset: Sequence[LabeledInstance], depth: int) -> Node:
        counts = Counter(inst.label for inst in subset)
        if len(counts) == 1 or (cfg.max_depth is not None and depth >= cfg.max_depth):
            return _leaf(counts, global_counts)

        best: Optional[tuple[str, Optional[float]]] = None
        best_gain = 0.0
        for feature, threshold in candidate_splits(subset):
            left, right = _partition(subset, feature, threshold)
            if len(left) < cfg.min_samples_leaf or len(right) < cfg.min_samples_leaf:
                continue
            gain = information_gain(subset, feature, threshold)
            if gain > best_gain:  # strict: first candidate keeps ties
                best, best_gain = (feature, threshold), gain
        if best is None:
            return _leaf(counts, global_counts)

        feature, threshold = best
        left, right = _partition(subset, feature, threshold)
        return Node(
            feature=feature,
            threshold=threshold,
            left=grow(left, depth + 1),
            right=grow(right, depth + 1),
        )

    return TreeModel(root=grow(instances, 0))


def predict(model: TreeModel, fv: FeatureVector) -> QuestionType:
    """Route a feature vector to its leaf label. Total and pure."""
    node = model.root
    while not node.is_leaf:
        node = node.right if _goes_right(fv, node.feature, node.threshold) else node.left
    return node.label


def majority_baseline(labels: Iterable[QuestionType]) -> TreeModel:
    """Constant classifier packaged as a single-leaf tree.

    Predicts the most frequent training label everywhere, so it can be
    saved, loaded, and evaluated exactly like a trained model.
    """
    counts = Counter(labels)
    if not counts:
        raise EmptyTrainingSet("no training labels")
    return TreeModel(root=_leaf(counts, counts))


def _node_to_obj(node: Node) -> dict:
    if node.is_leaf:
        distribution = {str(label): count for label, count in node.distribution.items()}
        return {"label": node.label.value, "distribution": distribution}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_obj(node.left),
        "right": _node_to_obj(node.right),
    }


def save_model(model: TreeModel, stream: IO[str]) -> None:
    """Serialize as versioned JSON with deterministic key order."""
    doc = {"version": MODEL_FORMAT_VERSION, "root": _node_to_obj(model.root)}
    json.dump(doc, stream, sort_keys=True, indent=2)
    stream.write("\n")


def _node_from_obj(obj: object) -> Node:
    if not isinstance(obj, dict):
        raise MalformedModel("node must be a JSON object")
    if "label" in obj:
        try:
            label = QuestionType(obj["label"])
        except (ValueError, TypeError):
            raise MalformedModel(f"bad leaf label {obj.get('label')!r}") from None
        distribution = obj.get("distribution")
        if not isinstance(distribution, dict):
            raise MalformedModel("leaf distribution must be an object")
        decoded: dict[QuestionType, int] = {}
        for key, count in distribution.items():
            try:
                decoded_key = QuestionType(key)
            except ValueError:
                raise MalformedModel(f"bad distribution label {key!r}") from None
            if isinstance(count, bool) or not isinstance(count, int) or count < 0:
                raise MalformedModel(f"bad distribution count for {key!r}")
            decoded[decoded_key] = count
        return Node(label=label, distribution=decoded)

    feature = obj.get("feature")
    if feature not in FEATURE_NAMES:
        raise MalformedModel(f"unknown split feature {feature!r}")
    threshold = obj.get("threshold")
    if feature == "length":
        if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
            raise MalformedModel("length split requires a numeric threshold")
        threshold = float(threshold)
    elif threshold is not None:
        raise MalformedModel(f"boolean split {feature!r} cannot carry a threshold")
    if "left" not in obj or "right" not in obj:
        raise MalformedModel(f"split on {feature!r} is missing a child")
    return Node(
        feature=feature,
        threshold=threshold,
        left=_node_from_obj(obj["left"]),
        right=_node_from_obj(obj["right"]),
    )


def load_model(stream: IO[str]) -> TreeModel:
    """Decode a model document; reject damage and future versions."""
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise MalformedModel("model document must be a JSON object")
    version = doc.get("version")
    if isinstance(version, bool) or not isinstance(version, int) or version < 1:
        raise MalformedModel(f"missing or invalid version field: {version!r}")
    if version > MODEL_FORMAT_VERSION:
        raise UnsupportedVersion(
            f"model format version {version} is newer than supported {MODEL_FORMAT_VERSION}"
        )
    if "root" not in doc:
        raise MalformedModel("model document has no root node")
    return TreeModel(root=_node_from_obj(doc["root"]))
