"""Generic per-pixel feature maps: a handcrafted extractor plus loading of
externally exported feature tensors, both upsampled to frame resolution.
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from . import tensor_io
from .validation import check_feature_map, check_image, rgb_to_gray

BLUR_SIGMAS = (1.0, 2.0, 4.0)
HANDCRAFTED_CHANNELS = 11


def _abs_central_diff(gray, axis):
    # |I[p+1] - I[p-1]| with replicated borders; for data in [0, 1] the
    # maximum possible magnitude is 1, so the channel is already normalized.
    fwd = np.empty_like(gray)
    bwd = np.empty_like(gray)
    if axis == 1:
        fwd[:, :-1] = gray[:, 1:]
        fwd[:, -1] = gray[:, -1]
        bwd[:, 1:] = gray[:, :-1]
        bwd[:, 0] = gray[:, 0]
    else:
        fwd[:-1, :] = gray[1:, :]
        fwd[-1, :] = gray[-1, :]
        bwd[1:, :] = gray[:-1, :]
        bwd[0, :] = gray[0, :]
    return np.abs(fwd - bwd)


def handcrafted_features(frame) -> np.ndarray:
    """Deterministic 11-channel feature map of a uint8 RGB frame.

    Channel order: R, G, B in [0,1]; BT.601 grayscale; |dx| and |dy| of the
    grayscale via central differences (replicated borders); grayscale after
    Gaussian blur at sigma 1, 2, 4 (separable kernel, radius ceil(3*sigma),
    replicated borders); normalized x and y coordinates (0 when the extent
    is 1).
    """
    frame = check_image(frame)
    h, w = frame.shape[:2]
    rgb = frame.astype(np.float32) / np.float32(255.0)
    gray = rgb_to_gray(frame)

    out = np.empty((HANDCRAFTED_CHANNELS, h, w), dtype=np.float32)
    out[0] = rgb[:, :, 0]
    out[1] = rgb[:, :, 1]
    out[2] = rgb[:, :, 2]
    out[3] = gray
    out[4] = _abs_central_diff(gray, axis=1)
    out[5] = _abs_central_diff(gray, axis=0)
    for i, sigma in enumerate(BLUR_SIGMAS):
        # scipy's radius is int(truncate*sigma + 0.5) = 3*sigma here
        out[6 + i] = gaussian_filter(gray, sigma, mode="nearest", truncate=3.0)
    xs = np.arange(w, dtype=np.float32) / (w - 1) if w > 1 else np.zeros(w, np.float32)
    ys = np.arange(h, dtype=np.float32) / (h - 1) if h > 1 else np.zeros(h, np.float32)
    out[9] = np.broadcast_to(xs[None, :], (h, w))
    out[10] = np.broadcast_to(ys[:, None], (h, w))
    return out


def _axis_coords(src: int, dst: int):
    # half-pixel convention: src_pos = (dst + 0.5) * (src/dst) - 0.5, clamped
    pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    pos = np.clip(pos, 0.0, src - 1.0)
    i0 = np.floor(pos).astype(np.int64)
    i0 = np.minimum(i0, src - 1)
    frac = pos - i0
    i1 = np.minimum(i0 + 1, src - 1)
    return i0, i1, frac


def bilinear_upsample(fmap, target_h: int, target_w: int) -> np.ndarray:
    """Bilinear resampling of a (C, H, W) map with the half-pixel convention.

    Exact identity (bit-for-bit copy) when the targets equal the sources.
    """
    fmap = check_feature_map(fmap)
    if target_h < 1 or target_w < 1:
        raise ValueError("target extents must be >= 1")
    c, h, w = fmap.shape
    if (target_h, target_w) == (h, w):
        return fmap.copy()
    y0, y1, fy = _axis_coords(h, target_h)
    x0, x1, fx = _axis_coords(w, target_w)
    out = np.empty((c, target_h, target_w), dtype=np.float32)
    # chunk channels to bound the float64 intermediates on wide maps; the
    # float64 weights upcast the math, so values match a full-precision pass
    for lo in range(0, c, 16):
        data = fmap[lo:lo + 16]
        rows = data[:, y0, :] * (1.0 - fy)[None, :, None] + data[:, y1, :] * fy[None, :, None]
        out[lo:lo + 16] = rows[:, :, x0] * (1.0 - fx)[None, None, :] \
            + rows[:, :, x1] * fx[None, None, :]
    return out


def concat_features(maps) -> np.ndarray:
    """Concatenate feature maps along the channel axis; extents must match."""
    maps = [check_feature_map(m) for m in maps]
    if not maps:
        raise ValueError("need at least one feature map")
    h, w = maps[0].shape[1:]
    for m in maps[1:]:
        if m.shape[1:] != (h, w):
            raise ValueError(f"mismatched spatial extents: {m.shape[1:]} vs {(h, w)}")
    if len(maps) == 1:
        return maps[0].copy()
    return np.concatenate(maps, axis=0)


def load_external_features(path, frame_h: int, frame_w: int) -> np.ndarray:
    """Load a (C, h, w) feature tensor, upsampling to frame resolution if needed."""
    t = tensor_io.read_tensor(path)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-dimensional (C, H, W) tensor, got dims {t.shape}: {path}")
    if not np.isfinite(t).all():
        raise ValueError(f"feature tensor contains non-finite values: {path}")
    if t.shape[1:] == (frame_h, frame_w):
        return t
    return bilinear_upsample(t, frame_h, frame_w)
