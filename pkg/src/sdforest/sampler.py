"""First-frame training set construction: all pixels inside the search
window plus a sparse stride grid outside it.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .validation import check_feature_map, check_mask, check_same_extent


@dataclass(frozen=True)
class SearchWindow:
    """Axis-aligned pixel window; x1/y1 are exclusive."""

    x0: int
    y0: int
    w: int
    h: int

    @property
    def x1(self) -> int:
        return self.x0 + self.w

    @property
    def y1(self) -> int:
        return self.y0 + self.h

    @property
    def center(self):
        return (self.x0 + self.w / 2.0, self.y0 + self.h / 2.0)

    def clipped(self, frame_w: int, frame_h: int) -> "SearchWindow":
        x0 = max(self.x0, 0)
        y0 = max(self.y0, 0)
        x1 = min(self.x1, frame_w)
        y1 = min(self.y1, frame_h)
        if x1 <= x0 or y1 <= y0:
            raise ValueError(f"window {self} does not intersect a {frame_w}x{frame_h} frame")
        return SearchWindow(x0, y0, x1 - x0, y1 - y0)

    def scaled(self, factor: float) -> "SearchWindow":
        """Scale extents by `factor` about the window center (round half up)."""
        cx, cy = self.center
        nw = max(1, _round_half_up(self.w * factor))
        nh = max(1, _round_half_up(self.h * factor))
        return SearchWindow(_round_half_up(cx - nw / 2.0), _round_half_up(cy - nh / 2.0), nw, nh)

    @staticmethod
    def from_mask(mask, object_id=None) -> "SearchWindow":
        """Bounding box of mask pixels equal to object_id (any nonzero if None)."""
        mask = np.asarray(mask)
        hit = mask > 0 if object_id is None else mask == object_id
        ys, xs = np.nonzero(hit)
        if ys.size == 0:
            raise ValueError(f"mask has no pixels for object {object_id!r}")
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        return SearchWindow(x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def _round_half_up(v: float) -> int:
    return int(np.floor(v + 0.5))


@dataclass
class PixelDataset:
    """Rows of (feature vector, class label, pixel position)."""

    features: np.ndarray   # (N, C) float32
    labels: np.ndarray     # (N,) int64
    positions: np.ndarray  # (N, 2) int64, (x, y)

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise ValueError("dataset must contain at least one row")
        if len(self.labels) != len(self.features) or len(self.positions) != len(self.features):
            raise ValueError("features, labels and positions must have equal length")


def build_training_set(features, mask, window: SearchWindow, stride: int = 10) -> PixelDataset:
    """Select training pixels from the reference frame.

    Takes every pixel inside `window` (row-major) with its mask label, then
    every pixel outside the window whose x and y coordinates are both
    multiples of `stride` (row-major).  Outside pixels keep their true mask
    label, so objects extending past the window are not mislabeled.
    """
    features = check_feature_map(features)
    mask = check_mask(mask)
    check_same_extent(features, mask, "features and mask")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    h, w = mask.shape
    win = window.clipped(w, h)

    wy, wx = np.mgrid[win.y0:win.y1, win.x0:win.x1]
    wy = wy.ravel()
    wx = wx.ravel()

    gy, gx = np.meshgrid(np.arange(0, h, stride), np.arange(0, w, stride), indexing="ij")
    gy = gy.ravel()
    gx = gx.ravel()
    inside = (gx >= win.x0) & (gx < win.x1) & (gy >= win.y0) & (gy < win.y1)
    gy = gy[~inside]
    gx = gx[~inside]

    ys = np.concatenate([wy, gy])
    xs = np.concatenate([wx, gx])
    rows = np.ascontiguousarray(features[:, ys, xs].T, dtype=np.float32)
    labels = mask[ys, xs].astype(np.int64)
    if np.unique(labels).size < 2:
        warnings.warn(
            "training set contains a single class; downstream models degenerate",
            stacklevel=2,
        )
    positions = np.stack([xs, ys], axis=1).astype(np.int64)
    return PixelDataset(rows, labels, positions)
