"""Multimodal stress-sensing workbench.

Subpackages cover the full chain: live acquisition and session control,
synthetic cohort generation, signal alignment and normalization, windowed
feature extraction, physiology-VOC coupling analysis, from-scratch
classifiers with two cross-validation regimes, and Shapley attribution.
"""

__version__ = "0.1.0"
