"""sdforest: first-frame-prompted video object segmentation.

A semi-parametric ensemble (random forest + softmax regression) over generic
per-pixel features, trained only on the prompted first frame, with search-
window tracking, superpixel pooling, guided filtering, DAVIS-style J/F
evaluation, and generalization-bound calculators.
"""

from .bounds import (
    diversity_bound,
    maxmargin_bound,
    relu_vc_lower_bound,
    tree_generalization_gap,
)
from .config import RunConfig, apply_overrides, load_config, thread_count
from .features import (
    bilinear_upsample,
    concat_features,
    handcrafted_features,
    load_external_features,
)
from .forest import RandomForestPixelClassifier, predict_forest, train_forest
from .guided_filter import box_filter, guided_filter, threshold_mask
from .linear import SoftmaxRegression, loss_and_grad, predict_logistic, train_logistic
from .metrics import MetricsReport, boundary_f, evaluate, jaccard, sequence_stats
from .pipeline import (
    ObjectModel,
    SDForestSegmenter,
    SequenceResult,
    fit_first_frame,
    predict_confidence,
    run_sequence,
    segment_frame,
)
from .sampler import PixelDataset, SearchWindow, build_training_set
from .superpixel import SuperpixelLabels, slic, soft_mean_pool
from .tensor_io import (
    read_image,
    read_mask,
    read_tensor,
    write_image,
    write_mask,
    write_tensor,
)
from .tracker import TrackerState, cross_correlate, init_tracker, track_step

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "apply_overrides",
    "load_config",
    "thread_count",
    "read_image",
    "write_image",
    "read_mask",
    "write_mask",
    "read_tensor",
    "write_tensor",
    "handcrafted_features",
    "bilinear_upsample",
    "concat_features",
    "load_external_features",
    "SearchWindow",
    "PixelDataset",
    "build_training_set",
    "RandomForestPixelClassifier",
    "train_forest",
    "predict_forest",
    "SoftmaxRegression",
    "train_logistic",
    "loss_and_grad",
    "predict_logistic",
    "SuperpixelLabels",
    "slic",
    "soft_mean_pool",
    "box_filter",
    "guided_filter",
    "threshold_mask",
    "TrackerState",
    "init_tracker",
    "cross_correlate",
    "track_step",
    "ObjectModel",
    "SDForestSegmenter",
    "SequenceResult",
    "fit_first_frame",
    "predict_confidence",
    "segment_frame",
    "run_sequence",
    "MetricsReport",
    "jaccard",
    "boundary_f",
    "sequence_stats",
    "evaluate",
    "tree_generalization_gap",
    "relu_vc_lower_bound",
    "maxmargin_bound",
    "diversity_bound",
    "__version__",
]
