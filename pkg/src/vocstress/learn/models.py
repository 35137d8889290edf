"""Classifier front-ends: random forest and SVM (linear / RBF).

Both are trained entirely by the local kernels; nothing is delegated to an
external learning library. Probabilities: the forest reports the fraction of
trees voting Stress, the SVMs a Platt sigmoid fitted on training decision
values (raw decision values stay available for rank metrics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._kernels import build_tree, forest_votes, smo_solve


class SingleClassTraining(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "rf" | "svm_rbf" | "svm_linear"
    n_trees: int = 100
    max_depth: int = 10
    min_samples_split: int = 2
    bootstrap: bool = True
    features_per_split: Optional[int] = None  # None -> ceil(sqrt(d))
    C: float = 1.0
    gamma: Union[str, float] = "scale"
    tol: float = 1e-3
    max_iter_factor: int = 100  # iteration cap = factor * n_train

    def __post_init__(self):
        if self.kind not in ("rf", "svm_rbf", "svm_linear"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.n_trees < 1 or self.max_depth < 1 or self.C <= 0 or self.tol <= 0:
            raise ValueError("hyperparameters must be positive")


def features_per_split(d: int) -> int:
    return int(math.ceil(math.sqrt(d)))


@dataclass
class RandomForestModel:
    spec: ModelSpec
    n_features: int
    features: np.ndarray  # int64, concatenated over trees (-1 = leaf)
    thresholds: np.ndarray
    lefts: np.ndarray
    rights: np.ndarray
    values: np.ndarray  # leaf vote (0/1)
    covers: np.ndarray  # training rows through node
    offsets: np.ndarray  # tree t occupies [offsets[t], offsets[t+1])

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1] if X.ndim == 2 else 'non-2D'}"
            )
        return X

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting Stress, in [0, 1]."""
        X = self._check(X)
        return forest_votes(
            self.features, self.thresholds, self.lefts, self.rights, self.values, self.offsets, X
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        # majority with ties to NonStress
        return (self.predict_proba(X) > 0.5).astype(np.int64)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(X)

    def tree_slices(self):
        for t in range(self.offsets.size - 1):
            yield slice(int(self.offsets[t]), int(self.offsets[t + 1]))


def _train_forest(spec: ModelSpec, X: np.ndarray, y: np.ndarray, seed: int) -> RandomForestModel:
    n, d = X.shape
    # constant columns can never split; pruning them keeps the candidate
    # stream identical between a single-modality dataset and an early-fusion
    # matrix whose other blocks are degenerate
    live = np.flatnonzero(np.ptp(X, axis=0) > 0)
    X_live = np.ascontiguousarray(X[:, live]) if live.size < d else X
    d_live = max(1, live.size)
    m_try = spec.features_per_split or features_per_split(d_live)
    max_nodes = 2 * n + 1
    tree_seeds = np.random.SeedSequence(seed).generate_state(spec.n_trees, dtype=np.uint64)

    feats, thrs, lefts, rights, vals, covers, counts = [], [], [], [], [], [], []
    for t in range(spec.n_trees):
        f = np.empty(max_nodes, np.int64)
        th = np.zeros(max_nodes, np.float64)
        le = np.empty(max_nodes, np.int64)
        ri = np.empty(max_nodes, np.int64)
        va = np.empty(max_nodes, np.float64)
        co = np.empty(max_nodes, np.float64)
        n_nodes = build_tree(
            X_live if live.size else X,
            y,
            tree_seeds[t],
            spec.max_depth,
            spec.min_samples_split,
            m_try,
            spec.bootstrap,
            f,
            th,
            le,
            ri,
            va,
            co,
        )
        if live.size < d:
            split_mask = f[:n_nodes] >= 0
            f[:n_nodes][split_mask] = live[f[:n_nodes][split_mask]]
        feats.append(f[:n_nodes].copy())
        thrs.append(th[:n_nodes].copy())
        lefts.append(le[:n_nodes].copy())
        rights.append(ri[:n_nodes].copy())
        vals.append(va[:n_nodes].copy())
        covers.append(co[:n_nodes].copy())
        counts.append(n_nodes)

    offsets = np.zeros(spec.n_trees + 1, np.int64)
    offsets[1:] = np.cumsum(counts)
    return RandomForestModel(
        spec=spec,
        n_features=d,
        features=np.concatenate(feats),
        thresholds=np.concatenate(thrs),
        lefts=np.concatenate(lefts),
        rights=np.concatenate(rights),
        values=np.concatenate(vals),
        covers=np.concatenate(covers),
        offsets=offsets,
    )


def _rbf_gram(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _platt_fit(decisions: np.ndarray, y01: np.ndarray) -> tuple[float, float]:
    """Sigmoid calibration P(y=1|f) = 1/(1+exp(A f + B)).

    Newton iterations with backtracking on the cross-entropy against the
    prior-smoothed targets; A comes out negative when higher decision values
    mean the positive class.
    """
    f = np.asarray(decisions, dtype=np.float64)
    n1 = float(y01.sum())
    n0 = float(y01.size - n1)
    t = np.where(y01 == 1, (n1 + 1.0) / (n1 + 2.0), 1.0 / (n0 + 2.0))
    a, b = 0.0, math.log((n0 + 1.0) / (n1 + 1.0))

    def objective(a_, b_):
        z = a_ * f + b_
        # sum of t*z + log(1+exp(-z)), computed stably on both tails
        return float(
            np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1.0) * z + np.log1p(np.exp(z))))
        )

    f_old = objective(a, b)
    for _ in range(100):
        z = np.clip(a * f + b, -500, 500)
        p = 1.0 / (1.0 + np.exp(z))  # P(y=1)
        q = 1.0 - p
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-10 and abs(g2) < 1e-10:
            break
        d2 = p * q
        h11 = float(np.sum(f * f * d2)) + 1e-12
        h22 = float(np.sum(d2)) + 1e-12
        h21 = float(np.sum(f * d2))
        det = h11 * h22 - h21 * h21
        if det <= 0:
            break
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        improved = False
        while step >= 1e-10:
            f_new = objective(a + step * da, b + step * db)
            if f_new < f_old + 1e-4 * step * gd:
                a += step * da
                b += step * db
                f_old = f_new
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return a, b


@dataclass
class SVMModel:
    spec: ModelSpec
    n_features: int
    kernel: str  # "linear" | "rbf"
    gamma_value: float
    support_X: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for support vectors
    bias: float
    platt_a: float
    platt_b: float
    converged: bool = True
    iterations: int = 0
    weights: Optional[np.ndarray] = field(default=None)  # linear kernel only

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1] if X.ndim == 2 else 'non-2D'}"
            )
        return X

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        if self.kernel == "linear" and self.weights is not None:
            return X @ self.weights + self.bias
        K = _rbf_gram(X, self.support_X, self.gamma_value)
        return K @ self.dual_coef + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = self.platt_a * self.decision_scores(X) + self.platt_b
        return 1.0 / (1.0 + np.exp(np.clip(z, -500, 500)))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_scores(X) > 0).astype(np.int64)


def _train_svm(spec: ModelSpec, X: np.ndarray, y: np.ndarray, seed: int) -> SVMModel:
    n, d = X.shape
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClassTraining("SVM training needs both classes present")
    ypm = np.where(y == 1, 1.0, -1.0)

    if spec.kind == "svm_rbf":
        if spec.gamma == "scale":
            var = float(X.var())
            gamma = 1.0 / (d * var) if var > 0 else 1.0
        else:
            gamma = float(spec.gamma)
        K = _rbf_gram(X, X, gamma)
        kernel = "rbf"
    else:
        gamma = 0.0
        K = X @ X.T
        kernel = "linear"

    alpha, b, iters, converged = smo_solve(
        np.ascontiguousarray(K), ypm, spec.C, spec.tol, spec.max_iter_factor * n
    )
    sv = alpha > 1e-10
    dual = alpha[sv] * ypm[sv]
    support = np.ascontiguousarray(X[sv])

    weights = None
    if kernel == "linear":
        weights = support.T @ dual
        decisions = X @ weights + b
    else:
        decisions = K[:, sv] @ dual + b
    a_p, b_p = _platt_fit(decisions, y)
    return SVMModel(
        spec=spec,
        n_features=d,
        kernel=kernel,
        gamma_value=gamma,
        support_X=support,
        dual_coef=dual,
        bias=float(b),
        platt_a=a_p,
        platt_b=b_p,
        converged=bool(converged),
        iterations=int(iters),
        weights=weights,
    )


def train(spec: ModelSpec, X: np.ndarray, y: np.ndarray, seed: int = 0):
    """Fit a model; deterministic given (spec, X, y, seed)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
        raise ValueError("X must be n x d with matching labels")
    if X.shape[0] < 2:
        raise ValueError("need at least two training rows")
    if np.isnan(X).any():
        raise ValueError("training matrix must be imputed (no missing values)")
    if spec.kind == "rf":
        return _train_forest(spec, X, y, seed)
    return _train_svm(spec, X, y, seed)
