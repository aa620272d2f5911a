"""Edge-preserving refinement of confidence maps guided by the frame, and
thresholding to a binary mask.

Per window k the filter fits the local linear model Q = a_k*I + b_k by
least squares with ridge term eps on a_k, which in closed form is
a_k = cov(I, P) / (var(I) + eps) and b_k = mean(P) - a_k*mean(I); the
coefficients are then averaged over all windows covering each pixel.
Border windows are clipped to the frame and use valid-count means.
"""

import numpy as np

from .validation import check_confidence, check_same_extent


def _window_counts(h: int, w: int, r: int) -> np.ndarray:
    ys = np.minimum(np.arange(h) + r, h - 1) - np.maximum(np.arange(h) - r, 0) + 1
    xs = np.minimum(np.arange(w) + r, w - 1) - np.maximum(np.arange(w) - r, 0) + 1
    return ys[:, None].astype(np.float64) * xs[None, :]


def _window_sums(arr: np.ndarray, r: int) -> np.ndarray:
    h, w = arr.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(arr, axis=0, out=sat[1:, 1:])
    np.cumsum(sat[1:, 1:], axis=1, out=sat[1:, 1:])
    y0 = np.maximum(np.arange(h) - r, 0)
    y1 = np.minimum(np.arange(h) + r, h - 1) + 1
    x0 = np.maximum(np.arange(w) - r, 0)
    x1 = np.minimum(np.arange(w) + r, w - 1) + 1
    return sat[y1[:, None], x1[None, :]] - sat[y0[:, None], x1[None, :]] \
        - sat[y1[:, None], x0[None, :]] + sat[y0[:, None], x0[None, :]]


def box_filter(arr, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 box centered at each pixel, clipped to the
    frame; border means divide by the valid pixel count."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    return _window_sums(arr, radius) / _window_counts(*arr.shape, radius)


def guided_filter(guidance, conf, radius: int = 8, eps: float = 1e-3) -> np.ndarray:
    """Filter a confidence map against a [0, 1] grayscale guidance image.

    Output is clamped to [0, 1].
    """
    guide = check_confidence(guidance)
    conf = check_confidence(conf)
    check_same_extent(guide, conf, "guidance and confidence")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    mean_i = box_filter(guide, radius)
    mean_p = box_filter(conf, radius)
    corr_ip = box_filter(guide * conf, radius)
    var_i = box_filter(guide * guide, radius) - mean_i * mean_i
    a = (corr_ip - mean_i * mean_p) / (var_i + eps)
    b = mean_p - a * mean_i
    out = box_filter(a, radius) * guide + box_filter(b, radius)
    return np.clip(out, 0.0, 1.0)


def threshold_mask(conf, threshold: float) -> np.ndarray:
    """Binary mask: 1 where confidence >= threshold, else 0."""
    conf = check_confidence(conf)
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return (conf >= threshold).astype(np.uint8)
