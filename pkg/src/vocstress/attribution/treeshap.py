"""Shapley attributions for the random forest.

Path-dependent tree traversal: conditional expectations are weighted by the
training sample counts stored in each node, the standard tree formulation.
Local accuracy holds exactly: base value plus attributions equals the
forest's vote fraction for every sample.
"""

from __future__ import annotations

import numpy as np

from ..learn._kernels import shap_tree
from ..learn.models import DimensionMismatch, RandomForestModel


def forest_base_value(model: RandomForestModel) -> float:
    """Expected forest output with no features known (cover-weighted leaves)."""
    total = 0.0
    for sl in model.tree_slices():
        feats = model.features[sl]
        vals = model.values[sl]
        covers = model.covers[sl]
        leaves = feats < 0
        root_cover = covers[0]
        total += float(np.sum(vals[leaves] * covers[leaves]) / root_cover)
    return total / (model.offsets.size - 1)


def tree_shap(model: RandomForestModel, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-feature attributions and base value for one sample."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {x.size}")
    phi = np.zeros(model.n_features + 1)  # slot -1 unused guard for root entry
    acc = np.zeros(model.n_features)
    for sl in model.tree_slices():
        phi[:] = 0.0
        shap_tree(
            model.features[sl],
            model.thresholds[sl],
            model.lefts[sl],
            model.rights[sl],
            model.values[sl],
            model.covers[sl],
            x,
            phi,
        )
        acc += phi[: model.n_features]
    n_trees = model.offsets.size - 1
    return acc / n_trees, forest_base_value(model)


def shap_matrix(model: RandomForestModel, X: np.ndarray) -> tuple[np.ndarray, float]:
    """Attributions for every row of X (n x d) plus the shared base value."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected n x {model.n_features} matrix")
    out = np.zeros((X.shape[0], model.n_features))
    phi = np.zeros(model.n_features + 1)
    n_trees = model.offsets.size - 1
    for i in range(X.shape[0]):
        row = X[i]
        for sl in model.tree_slices():
            phi[:] = 0.0
            shap_tree(
                model.features[sl],
                model.thresholds[sl],
                model.lefts[sl],
                model.rights[sl],
                model.values[sl],
                model.covers[sl],
                row,
                phi,
            )
            out[i] += phi[: model.n_features]
    out /= n_trees
    return out, forest_base_value(model)


def global_importance(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """Mean absolute attribution per feature across all rows of X."""
    if X.shape[0] == 0:
        raise ValueError("need at least one sample")
    phis, _ = shap_matrix(model, X)
    return np.abs(phis).mean(axis=0)
