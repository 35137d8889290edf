from .models import (
    ModelSpec,
    RandomForestModel,
    SVMModel,
    SingleClassTraining,
    DimensionMismatch,
    train,
)
from .metrics import confusion_counts, accuracy, precision, recall, f1_score, auc_score
from .cv import (
    TooFewPerClass,
    SingleParticipant,
    FoldMetrics,
    EvalReport,
    stratified_kfold,
    loso_split,
    evaluate,
)
from .serialize import save_model, load_model, dumps_model, loads_model

__all__ = [
    "ModelSpec",
    "RandomForestModel",
    "SVMModel",
    "SingleClassTraining",
    "DimensionMismatch",
    "train",
    "confusion_counts",
    "accuracy",
    "precision",
    "recall",
    "f1_score",
    "auc_score",
    "TooFewPerClass",
    "SingleParticipant",
    "FoldMetrics",
    "EvalReport",
    "stratified_kfold",
    "loso_split",
    "evaluate",
    "save_model",
    "load_model",
    "dumps_model",
    "loads_model",
]
