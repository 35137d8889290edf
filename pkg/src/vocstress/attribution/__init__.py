from .treeshap import tree_shap, shap_matrix, forest_base_value, global_importance
from .fusion import FusionRow, fusion_table, modality_importance, AttributionReport

__all__ = [
    "tree_shap",
    "shap_matrix",
    "forest_base_value",
    "global_importance",
    "FusionRow",
    "fusion_table",
    "modality_importance",
    "AttributionReport",
]
