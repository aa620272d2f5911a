"""Input validation helpers shared across the package.

Array conventions: images are uint8 (H, W, 3), label masks uint8 (H, W),
feature maps float32 (C, H, W), confidence maps float (H, W) in [0, 1].
"""

import numpy as np


def check_image(frame) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        raise ValueError(f"expected uint8 image data, got {frame.dtype}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise ValueError("image extents must be positive")
    return frame


def check_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"expected an (H, W) label mask, got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise ValueError(f"expected uint8 mask labels, got {mask.dtype}")
    return mask


def check_feature_map(fmap, require_finite: bool = False) -> np.ndarray:
    fmap = np.asarray(fmap)
    if fmap.ndim != 3:
        raise ValueError(f"expected a (C, H, W) feature map, got shape {fmap.shape}")
    if fmap.shape[0] < 1 or fmap.shape[1] < 1 or fmap.shape[2] < 1:
        raise ValueError("feature map extents must be positive")
    if require_finite and not np.isfinite(fmap).all():
        raise ValueError("feature map contains non-finite values")
    return fmap


def check_confidence(conf) -> np.ndarray:
    conf = np.asarray(conf, dtype=np.float64)
    if conf.ndim != 2:
        raise ValueError(f"expected an (H, W) confidence map, got shape {conf.shape}")
    return conf


def spatial_extent(arr) -> tuple:
    """(H, W) of any of the package's array shapes: 2-D maps, (H, W, 3)
    uint8 images, or channel-first (C, H, W) feature stacks."""
    if arr.ndim == 2:
        return arr.shape
    if arr.ndim == 3 and arr.dtype == np.uint8 and arr.shape[2] == 3:
        return arr.shape[:2]
    if arr.ndim == 3:
        return arr.shape[1:]
    raise ValueError(f"no spatial extent for shape {arr.shape}")


def check_same_extent(a, b, what: str = "inputs"):
    ea, eb = spatial_extent(a), spatial_extent(b)
    if ea != eb:
        raise ValueError(f"{what} have mismatched extents: {ea} vs {eb}")


def rgb_to_gray(frame) -> np.ndarray:
    """BT.601 grayscale of a uint8 RGB frame, scaled to [0, 1] float32."""
    frame = check_image(frame)
    rgb = frame.astype(np.float32) / np.float32(255.0)
    return 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
