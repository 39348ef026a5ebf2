"""Interpretable distance metric learning for handwritten character glyphs.

A learned metric is a non-negative weighted sum of base distance components
(e.g. Manhattan distance between row foreground counts). Weights are fitted
by clustering-driven updates, and component subsets are chosen by exhaustive,
greedy, or threshold-pruned hybrid search.
"""

from .dataset import (
    BinaryGlyph,
    DataError,
    RawImage,
    Stroke,
    SynthSpec,
    binarize,
    generate_synthetic,
    load_manifest,
    normalize,
)
from .features import FEATURE_IDS, FeatureSet, extract_features, feature_vector
from .metrics import (
    DEFAULT_COMPONENTS,
    ComponentId,
    ComponentRegistry,
    WeightedMetric,
    build_tensor,
    combined_distance,
    component_distance,
)
from .clustering import ClusteringResult, kmeans
from .optimizer import (
    ConfusionCounts,
    MetCharConfig,
    TrainedMetric,
    metchar,
    score_pairs,
    weight_update,
)
from .selection import (
    SelectionConfig,
    SelectionReport,
    exhaustive_selection,
    greedy_selection,
    hybrid_selection,
    single_component_accuracies,
)

__all__ = [
    "BinaryGlyph",
    "DataError",
    "RawImage",
    "Stroke",
    "SynthSpec",
    "binarize",
    "generate_synthetic",
    "load_manifest",
    "normalize",
    "FEATURE_IDS",
    "FeatureSet",
    "extract_features",
    "feature_vector",
    "DEFAULT_COMPONENTS",
    "ComponentId",
    "ComponentRegistry",
    "WeightedMetric",
    "build_tensor",
    "combined_distance",
    "component_distance",
    "ClusteringResult",
    "kmeans",
    "ConfusionCounts",
    "MetCharConfig",
    "TrainedMetric",
    "metchar",
    "score_pairs",
    "weight_update",
    "SelectionConfig",
    "SelectionReport",
    "exhaustive_selection",
    "greedy_selection",
    "hybrid_selection",
    "single_component_accuracies",
]

__version__ = "0.1.0"
