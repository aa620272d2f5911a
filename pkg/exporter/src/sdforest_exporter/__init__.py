"""Offline deep-feature exporter for the segmentation core.

Runs an ImageNet-trained EfficientNet-B0 over PNG frames, taps four layers,
and writes 219-channel float32 tensors in the core's file format, paired to
frames by filename stem.
"""

from .export import TAPS, TOTAL_CHANNELS, build_backbone, export_features, extract_feature_map
from .tensor_writer import write_tensor

__version__ = "0.1.0"

__all__ = [
    "TAPS",
    "TOTAL_CHANNELS",
    "build_backbone",
    "export_features",
    "extract_feature_map",
    "write_tensor",
    "__version__",
]
