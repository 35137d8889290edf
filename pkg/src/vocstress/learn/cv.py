"""Cross-validation regimes and the leakage-free evaluation loop.

Per-fold imputation means and the RBF gamma scale are always computed on the
training rows only; test rows never influence anything fit on a fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..features import Dataset
from ..preprocess import AllMissingColumn
from .metrics import accuracy, auc_score, confusion_counts, f1_score, precision, recall
from .models import ModelSpec, train


class TooFewPerClass(ValueError):
    pass


class SingleParticipant(ValueError):
    pass


def stratified_kfold(labels, k: int = 5, seed: int = 0) -> np.ndarray:
    """Fold id per sample: per-class seeded shuffle, then round-robin."""
    y = np.asarray(labels)
    folds = np.full(y.size, -1, dtype=np.int64)
    rng = np.random.default_rng(seed)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise TooFewPerClass(f"class {cls!r} has {idx.size} samples for k={k}")
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            folds[sample] = pos % k
    return folds


def loso_split(groups) -> list[tuple[str, np.ndarray]]:
    """One (participant, test-mask) fold per distinct participant."""
    g = np.asarray(groups)
    ids = sorted(set(g.tolist()))
    if len(ids) < 2:
        raise SingleParticipant("leave-one-subject-out needs >= 2 participants")
    return [(pid, g == pid) for pid in ids]


@dataclass(frozen=True)
class FoldMetrics:
    fold: str
    n_test: int
    acc: float
    prec: float
    rec: float
    f1: float
    auc: Optional[float]
    confusion: dict[str, int]


@dataclass
class EvalReport:
    model_kind: str
    regime: str
    folds: list[FoldMetrics]
    pooled_confusion: dict[str, int]
    n_samples: int
    converged: bool = True

    def _series(self, name: str) -> np.ndarray:
        vals = [getattr(f, name) for f in self.folds if getattr(f, name) is not None]
        return np.asarray(vals, dtype=np.float64)

    def mean_sd(self, name: str) -> tuple[float, float]:
        v = self._series(name)
        if v.size == 0:
            return float("nan"), float("nan")
        return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0

    @property
    def pooled_precision(self) -> float:
        return precision(self.pooled_confusion)

    @property
    def pooled_recall(self) -> float:
        return recall(self.pooled_confusion)

    @property
    def pooled_f1(self) -> float:
        return f1_score(self.pooled_confusion)

    @property
    def pooled_accuracy(self) -> float:
        return accuracy(self.pooled_confusion)

    def loso_range(self) -> tuple[float, float]:
        accs = self._series("acc")
        return float(accs.min()), float(accs.max())


def _fold_impute(X_train: np.ndarray, X_test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means fitted on the training rows fill NaNs on both sides."""
    X_train = np.array(X_train, copy=True)
    X_test = np.array(X_test, copy=True)
    for j in range(X_train.shape[1]):
        col = X_train[:, j]
        observed = ~np.isnan(col)
        if not observed.any():
            raise AllMissingColumn(f"training fold column {j} entirely missing")
        mean = float(col[observed].mean())
        col[~observed] = mean
        tcol = X_test[:, j]
        tcol[np.isnan(tcol)] = mean
    return X_train, X_test


def evaluate(
    spec: ModelSpec,
    dataset: Dataset,
    regime: str,
    seed: int = 0,
    k: int = 5,
    feature_subset: Optional[np.ndarray] = None,
    return_models: bool = False,
):
    """Train/test over a CV regime; per-fold metrics plus pooled counts."""
    X_all = dataset.X_raw if feature_subset is None else dataset.X_raw[:, feature_subset]
    y = dataset.y

    if regime == "kfold":
        fold_ids = stratified_kfold(y, k=k, seed=seed)
        fold_masks = [(str(i), fold_ids == i) for i in range(k)]
    elif regime == "loso":
        fold_masks = loso_split(dataset.groups)
    else:
        raise ValueError(f"unknown regime {regime!r}")

    folds: list[FoldMetrics] = []
    models = []
    pooled = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    converged = True
    for fold_no, (name, test_mask) in enumerate(fold_masks):
        train_mask = ~test_mask
        X_tr, X_te = _fold_impute(X_all[train_mask], X_all[test_mask])
        model = train(spec, X_tr, y[train_mask], seed=seed + 9973 * fold_no)
        if getattr(model, "converged", True) is False:
            converged = False
        scores = model.predict_proba(X_te)
        y_pred = model.predict(X_te)
        c = confusion_counts(y[test_mask], y_pred)
        for key in pooled:
            pooled[key] += c[key]
        folds.append(
            FoldMetrics(
                fold=name,
                n_test=int(test_mask.sum()),
                acc=accuracy(c),
                prec=precision(c),
                rec=recall(c),
                f1=f1_score(c),
                auc=auc_score(y[test_mask], scores),
                confusion=c,
            )
        )
        if return_models:
            models.append(model)

    report = EvalReport(
        model_kind=spec.kind,
        regime=regime,
        folds=folds,
        pooled_confusion=pooled,
        n_samples=int(y.size),
        converged=converged,
    )
    return (report, models) if return_models else report
