"""Search-window tracking by zero-normalized cross-correlation of an
exemplar feature patch against a larger search region.

The exemplar refreshes every frame from the previous frame's predicted
bounding box; the next window is that box scaled about the correlation
peak.  An empty previous mask falls back to re-centering the previous
window on the correlation peak.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .config import thread_count
from .sampler import SearchWindow, _round_half_up
from .validation import check_feature_map, check_mask

NORM_EPS = 1e-12


@dataclass
class TrackerState:
    exemplar: np.ndarray          # (C, eh, ew) feature patch
    exemplar_window: SearchWindow
    last_window: SearchWindow
    frame_index: int
    prev_features: np.ndarray     # features of the most recent frame seen


def init_tracker(frame_features, prompt_mask, object_id: int,
                 scale: float = 2.0) -> TrackerState:
    features = check_feature_map(frame_features)
    mask = check_mask(prompt_mask)
    h, w = mask.shape
    bbox = SearchWindow.from_mask(mask, object_id)
    exemplar = features[:, bbox.y0:bbox.y1, bbox.x0:bbox.x1].copy()
    window = bbox.scaled(scale).clipped(w, h)
    return TrackerState(exemplar, bbox, window, 0, features)


def _valid_window_sums(arr: np.ndarray, wh: int, ww: int) -> np.ndarray:
    h, w = arr.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(arr, axis=0, out=sat[1:, 1:])
    np.cumsum(sat[1:, 1:], axis=1, out=sat[1:, 1:])
    return sat[wh:, ww:] - sat[:h - wh + 1, ww:] - sat[wh:, :w - ww + 1] \
        + sat[:h - wh + 1, :w - ww + 1]


def cross_correlate(exemplar, region) -> np.ndarray:
    """Zero-normalized cross-correlation over all channels jointly.

    Scores lie in [-1, 1]; positions where either the exemplar or the patch
    has norm below 1e-12 score 0.  Output extents are region - exemplar + 1.
    """
    e = np.asarray(exemplar, dtype=np.float64)
    reg = np.asarray(region, dtype=np.float64)
    if e.ndim != 3 or reg.ndim != 3 or e.shape[0] != reg.shape[0]:
        raise ValueError("exemplar and region must be (C, H, W) with equal C")
    if e.shape[1] > reg.shape[1] or e.shape[2] > reg.shape[2]:
        raise ValueError(f"exemplar {e.shape} larger than region {reg.shape}")
    _, eh, ew = e.shape
    n = e.size

    e_centered = e - e.mean()
    e_norm = np.sqrt((e_centered * e_centered).sum())
    # numerator: sum_c corr(region_c, e_c); e_centered has zero sum, so the
    # patch mean drops out of the cross term.  One batched forward FFT per
    # input, channel sum in the frequency domain, single inverse.  Threading
    # splits across independent 1-D transforms and leaves results bit-exact.
    workers = thread_count()
    fh = sp_fft.next_fast_len(reg.shape[1] + eh - 1)
    fw = sp_fft.next_fast_len(reg.shape[2] + ew - 1)
    spec = sp_fft.rfft2(reg, s=(fh, fw), workers=workers) \
        * np.conj(sp_fft.rfft2(e_centered, s=(fh, fw), workers=workers))
    num = sp_fft.irfft2(spec.sum(axis=0), s=(fh, fw), workers=workers)
    num = num[:reg.shape[1] - eh + 1, :reg.shape[2] - ew + 1]

    s1 = _valid_window_sums(reg.sum(axis=0), eh, ew)
    s2 = _valid_window_sums((reg * reg).sum(axis=0), eh, ew)
    p_norm = np.sqrt(np.maximum(s2 - s1 * s1 / n, 0.0))

    degenerate = (p_norm < NORM_EPS) | (e_norm < NORM_EPS)
    denom = np.where(degenerate, 1.0, p_norm * max(e_norm, NORM_EPS))
    return np.where(degenerate, 0.0, num / denom)


def _fit_window(cx: float, cy: float, w: int, h: int,
                frame_w: int, frame_h: int) -> SearchWindow:
    # keep the requested extents (capped by the frame) and shift inside
    w = min(max(w, 1), frame_w)
    h = min(max(h, 1), frame_h)
    x0 = min(max(_round_half_up(cx - w / 2.0), 0), frame_w - w)
    y0 = min(max(_round_half_up(cy - h / 2.0), 0), frame_h - h)
    return SearchWindow(x0, y0, w, h)


def track_step(state: TrackerState, frame_features, predicted_mask_prev,
               scale: float = 2.0):
    """Advance the tracker by one frame; returns (new_state, SearchWindow)."""
    features = check_feature_map(frame_features)
    frame_h, frame_w = features.shape[1:]
    mask_prev = check_mask(predicted_mask_prev)

    exemplar = state.exemplar
    exemplar_window = state.exemplar_window
    prev_bbox = None
    if mask_prev.any():
        prev_bbox = SearchWindow.from_mask(mask_prev)
        exemplar = state.prev_features[:, prev_bbox.y0:prev_bbox.y1,
                                       prev_bbox.x0:prev_bbox.x1].copy()
        exemplar_window = prev_bbox
    _, eh, ew = exemplar.shape

    region = state.last_window.scaled(scale).clipped(frame_w, frame_h)
    if region.w < ew or region.h < eh:
        region = _fit_window(*region.center, max(region.w, ew), max(region.h, eh),
                             frame_w, frame_h)
    region_features = features[:, region.y0:region.y1, region.x0:region.x1]
    response = cross_correlate(exemplar, region_features)
    peak = int(np.argmax(response))  # first maximum: top-left-most tie-break
    py, px = divmod(peak, response.shape[1])
    peak_cx = region.x0 + px + (ew - 1) / 2.0
    peak_cy = region.y0 + py + (eh - 1) / 2.0

    base = prev_bbox.scaled(scale) if prev_bbox is not None else state.last_window
    window = _fit_window(peak_cx, peak_cy, max(base.w, ew), max(base.h, eh),
                         frame_w, frame_h)
    new_state = TrackerState(exemplar, exemplar_window, window,
                             state.frame_index + 1, features)
    return new_state, window
