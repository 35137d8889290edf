"""Unimodal-vs-fusion comparison and modality-level importance shares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..features import FEATURE_NAMES, MODALITY_BLOCKS, Dataset
from ..learn.cv import evaluate
from ..learn.models import ModelSpec

# Reporting groups VOC sensors together: three-way shares (HR / VOC / GSR)
# where VOC = TVOC + Gas320 blocks; the four-way split stays available.
THREE_WAY = {
    "HR": MODALITY_BLOCKS["hr"],
    "VOC": tuple(MODALITY_BLOCKS["tvoc"]) + tuple(MODALITY_BLOCKS["gas320"]),
    "GSR": MODALITY_BLOCKS["gsr"],
}

FUSION_ROWS = (
    ("HR+HRV", MODALITY_BLOCKS["hr"]),
    ("TVOC (ENS160)", MODALITY_BLOCKS["tvoc"]),
    ("GSR", MODALITY_BLOCKS["gsr"]),
    ("Gas320 (BME688)", MODALITY_BLOCKS["gas320"]),
    ("Early Fusion (All)", tuple(range(len(FEATURE_NAMES)))),
)


@dataclass(frozen=True)
class FusionRow:
    modality: str
    n_features: int
    acc: float
    f1: float
    auc: float


@dataclass(frozen=True)
class AttributionReport:
    per_feature: dict[str, float]  # mean |phi| by feature name
    three_way_totals: dict[str, float]
    three_way_pct: dict[str, float]
    four_way_totals: dict[str, float]
    top_features: dict[str, list[tuple[str, float]]]  # per three-way modality
    fusion: list[FusionRow]
    improvement: float  # fusion accuracy - best unimodal accuracy


def fusion_table(
    dataset: Dataset,
    spec: ModelSpec,
    regime: str = "kfold",
    seed: int = 0,
) -> tuple[list[FusionRow], float]:
    """Per-modality models vs the all-features early fusion, same CV regime."""
    rows: list[FusionRow] = []
    for name, cols in FUSION_ROWS:
        report = evaluate(spec, dataset, regime, seed=seed, feature_subset=np.asarray(cols))
        acc, _ = report.mean_sd("acc")
        f1, _ = report.mean_sd("f1")
        auc, _ = report.mean_sd("auc")
        rows.append(FusionRow(modality=name, n_features=len(cols), acc=acc, f1=f1, auc=auc))
    best_unimodal = max(r.acc for r in rows[:-1])
    improvement = rows[-1].acc - best_unimodal
    return rows, improvement


def modality_importance(importance: np.ndarray) -> AttributionReport:
    """Aggregate per-feature importances into modality totals and shares."""
    per_feature = {name: float(v) for name, v in zip(FEATURE_NAMES, importance)}
    four_way = {
        mod: float(np.sum(importance[list(cols)])) for mod, cols in MODALITY_BLOCKS.items()
    }
    three_way = {
        mod: float(np.sum(importance[list(cols)])) for mod, cols in THREE_WAY.items()
    }
    total = sum(three_way.values())
    pct = {mod: (100.0 * v / total if total > 0 else 0.0) for mod, v in three_way.items()}
    top = {}
    for mod, cols in THREE_WAY.items():
        ranked = sorted(((FEATURE_NAMES[c], float(importance[c])) for c in cols), key=lambda t: -t[1])
        top[mod] = ranked[:3]
    return AttributionReport(
        per_feature=per_feature,
        three_way_totals=three_way,
        three_way_pct=pct,
        four_way_totals=four_way,
        top_features=top,
        fusion=[],
        improvement=float("nan"),
    )


def full_attribution(
    dataset: Dataset,
    spec: Optional[ModelSpec] = None,
    regime: str = "kfold",
    seed: int = 0,
) -> AttributionReport:
    """Fusion table plus Shapley importance from a forest on the full dataset."""
    from ..learn.models import train
    from .treeshap import global_importance

    spec = spec or ModelSpec(kind="rf")
    rows, improvement = fusion_table(dataset, spec, regime=regime, seed=seed)
    model = train(spec, dataset.X, dataset.y, seed=seed)
    importance = global_importance(model, dataset.X)
    base = modality_importance(importance)
    return AttributionReport(
        per_feature=base.per_feature,
        three_way_totals=base.three_way_totals,
        three_way_pct=base.three_way_pct,
        four_way_totals=base.four_way_totals,
        top_features=base.top_features,
        fusion=rows,
        improvement=improvement,
    )
