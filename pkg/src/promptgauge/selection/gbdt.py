"""Gradient-boosted decision trees for the metric-selection classifier.

Second-order boosting with logistic loss, exact greedy split search over
unique midpoints, written from scratch. Deterministic by construction:
splits scan features in index order and thresholds in ascending order, and
ties keep the first (lowest feature index, lowest threshold) candidate.
The inner split scan runs on the compiled kernel when it is built, with a
numerically identical NumPy fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .._kernels import active_kernel, best_split_sorted
from ..errors import EmptyMatrix, SchemaMismatch, SingleClass, UndefinedShares


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class FeatureMatrix:
    feature_names: list[str]
    X: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=bool)
        if len(self.feature_names) != len(set(self.feature_names)):
            raise ValueError("feature names must be unique")
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise ValueError("X shape does not match feature names")
        if self.X.shape[0] != self.labels.shape[0]:
            raise ValueError("row count must equal label count")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("feature matrix contains non-finite values")


@dataclass
class BoostParams:
    n_rounds: int = 50
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    gamma: float = 0.0
    base_score: float = 0.0


# A tree is a flat node list. Internal nodes carry
# {feature, threshold, gain, left, right}; leaves carry {weight}.
Tree = list[dict]


@dataclass
class BoostedTreeModel:
    trees: list[Tree]
    feature_names: list[str]
    params: BoostParams
    kernel: str = field(default_factory=active_kernel)

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        margins = np.full(X.shape[0], self.params.base_score, dtype=np.float64)
        for tree in self.trees:
            margins += self.params.learning_rate * _tree_margins(tree, X)
        return margins

    def to_json(self) -> dict:
        return {
            "trees": self.trees,
            "feature_names": self.feature_names,
            "params": self.params.__dict__,
            "kernel": self.kernel,
        }

    @staticmethod
    def from_json(data: dict) -> "BoostedTreeModel":
        return BoostedTreeModel(
            trees=data["trees"],
            feature_names=list(data["feature_names"]),
            params=BoostParams(**data["params"]),
            kernel=data.get("kernel", "unknown"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "BoostedTreeModel":
        return BoostedTreeModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _tree_margins(tree: Tree, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node_id, rows = stack.pop()
        node = tree[node_id]
        if "weight" in node:
            out[rows] = node["weight"]
            continue
        mask = X[rows, node["feature"]] < node["threshold"]
        stack.append((node["left"], rows[mask]))
        stack.append((node["right"], rows[~mask]))
    return out


def _grow_tree(
    X: np.ndarray, grad: np.ndarray, hess: np.ndarray, params: BoostParams
) -> Tree:
    nodes: Tree = []

    def build(rows: np.ndarray, depth: int) -> int:
        node_id = len(nodes)
        nodes.append({})
        best = None  # (gain, feature, threshold)
        if depth < params.max_depth and rows.shape[0] >= 2:
            g = grad[rows]
            h = hess[rows]
            for feature in range(X.shape[1]):
                col = X[rows, feature]
                order = np.argsort(col, kind="stable")
                found = best_split_sorted(
                    np.ascontiguousarray(col[order]),
                    np.ascontiguousarray(g[order]),
                    np.ascontiguousarray(h[order]),
                    params.l2_lambda,
                    params.gamma,
                )
                if found is None:
                    continue
                gain, threshold, _ = found
                if best is None or gain > best[0]:
                    best = (gain, feature, threshold)
        if best is None:
            g_sum = float(np.sum(grad[rows]))
            h_sum = float(np.sum(hess[rows]))
            nodes[node_id] = {"weight": -g_sum / (h_sum + params.l2_lambda)}
            return node_id
        gain, feature, threshold = best
        mask = X[rows, feature] < threshold
        left = build(rows[mask], depth + 1)
        right = build(rows[~mask], depth + 1)
        nodes[node_id] = {
            "feature": feature,
            "threshold": threshold,
            "gain": gain,
            "left": left,
            "right": right,
        }
        return node_id

    build(np.arange(X.shape[0]), 0)
    return nodes


def fit(matrix: FeatureMatrix, params: BoostParams | None = None) -> BoostedTreeModel:
    params = params or BoostParams()
    n_rows = matrix.X.shape[0]
    if n_rows < 2 or matrix.X.shape[1] < 1:
        raise EmptyMatrix("training needs at least 2 rows and 1 feature")
    y = matrix.labels.astype(np.float64)
    if len(np.unique(matrix.labels)) < 2:
        raise SingleClass("training labels contain a single class")
    margins = np.full(n_rows, params.base_score, dtype=np.float64)
    trees: list[Tree] = []
    for _ in range(params.n_rounds):
        p = sigmoid(margins)
        grad = p - y
        hess = p * (1.0 - p)
        tree = _grow_tree(matrix.X, grad, hess, params)
        trees.append(tree)
        margins += params.learning_rate * _tree_margins(tree, matrix.X)
    return BoostedTreeModel(trees=trees, feature_names=list(matrix.feature_names), params=params)


def _row_vector(model: BoostedTreeModel, row) -> np.ndarray:
    if isinstance(row, Mapping):
        missing = set(model.feature_names) - set(row)
        extra = set(row) - set(model.feature_names)
        if missing or extra:
            raise SchemaMismatch(f"row keys differ from schema (missing={sorted(missing)}, extra={sorted(extra)})")
        return np.array([float(row[name]) for name in model.feature_names])
    vec = np.asarray(row, dtype=np.float64)
    if vec.shape != (len(model.feature_names),):
        raise SchemaMismatch(f"row length {vec.shape} does not match schema size {len(model.feature_names)}")
    return vec


# extreme margins round sigmoid to exactly 0 or 1 in float64; the public
# probability surface stays strictly inside (0, 1)
_PROB_EPS = 1e-15


def predict_proba(model: BoostedTreeModel, row) -> float:
    vec = _row_vector(model, row)
    return float(np.clip(sigmoid(model.predict_margin(vec[None, :])), _PROB_EPS, 1 - _PROB_EPS)[0])


def predict_proba_matrix(model: BoostedTreeModel, X: np.ndarray) -> np.ndarray:
    return np.clip(sigmoid(model.predict_margin(X)), _PROB_EPS, 1 - _PROB_EPS)


@dataclass
class GainImportance:
    total_gain: dict[str, float]
    shares: dict[str, float]


def gain_importance(model: BoostedTreeModel) -> GainImportance:
    totals = {name: 0.0 for name in model.feature_names}
    for tree in model.trees:
        for node in tree:
            if "feature" in node:
                totals[model.feature_names[node["feature"]]] += node["gain"]
    grand_total = sum(totals.values())
    if grand_total <= 0.0:
        raise UndefinedShares("model has no splits; gain shares are undefined")
    shares = {name: gain / grand_total for name, gain in totals.items()}
    return GainImportance(total_gain=totals, shares=shares)
