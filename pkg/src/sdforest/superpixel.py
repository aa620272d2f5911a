"""SLIC superpixel clustering and soft mean pooling of confidence maps."""

from dataclasses import dataclass

import numpy as np

from .validation import check_confidence, check_image, check_same_extent

try:  # compiled assignment loop; the numpy path below is the reference
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


@dataclass
class SuperpixelLabels:
    """Full-frame partition: labels in [0, k); centers hold (x, y, r, g, b)
    means of each cluster's members (color on the 0..255 scale)."""

    labels: np.ndarray   # (H, W) int32
    k: int
    centers: np.ndarray  # (k, 5) float64


def _seed_grid(h: int, w: int, k: int):
    # grid interval from the requested cluster count; the realized count is
    # ny*nx with ny ~ H/S rows and nx ~ k/ny columns
    s = np.sqrt(h * w / k)
    ny = min(max(int(round(h / s)), 1), h)
    nx = min(max(int(round(k / ny)), 1), w)
    cy = np.minimum(((np.arange(ny) + 0.5) * h / ny).astype(np.int64), h - 1)
    cx = np.minimum(((np.arange(nx) + 0.5) * w / nx).astype(np.int64), w - 1)
    gy, gx = np.meshgrid(cy, cx, indexing="ij")
    return gx.ravel(), gy.ravel(), s


def _color_gradient(img: np.ndarray) -> np.ndarray:
    # squared color difference of x/y neighbors, replicated at borders
    left = img[:, np.maximum(np.arange(img.shape[1]) - 1, 0)]
    right = img[:, np.minimum(np.arange(img.shape[1]) + 1, img.shape[1] - 1)]
    up = img[np.maximum(np.arange(img.shape[0]) - 1, 0)]
    down = img[np.minimum(np.arange(img.shape[0]) + 1, img.shape[0] - 1)]
    dx = right - left
    dy = down - up
    return (dx * dx).sum(axis=2) + (dy * dy).sum(axis=2)


def _assign_numpy(img, centers, s, spatial_w, dmin, labels):
    h, w = labels.shape
    xs_row = np.arange(w, dtype=np.float64)
    ys_col = np.arange(h, dtype=np.float64)
    for cid in range(centers.shape[0]):
        cx, cy = centers[cid, 0], centers[cid, 1]
        x0 = max(int(np.ceil(cx - s)), 0)
        x1 = min(int(np.floor(cx + s)), w - 1)
        y0 = max(int(np.ceil(cy - s)), 0)
        y1 = min(int(np.floor(cy + s)), h - 1)
        if x1 < x0 or y1 < y0:
            continue
        dxx = xs_row[x0:x1 + 1] - cx
        dyy = ys_col[y0:y1 + 1] - cy
        # term order mirrors the compiled path so both produce identical floats
        d2 = (
            (img[y0:y1 + 1, x0:x1 + 1, 0] - centers[cid, 2]) ** 2
            + (img[y0:y1 + 1, x0:x1 + 1, 1] - centers[cid, 3]) ** 2
            + (img[y0:y1 + 1, x0:x1 + 1, 2] - centers[cid, 4]) ** 2
            + spatial_w * (dxx * dxx)[None, :]
            + spatial_w * (dyy * dyy)[:, None]
        )
        view = dmin[y0:y1 + 1, x0:x1 + 1]
        upd = d2 < view  # strict: earlier (lower) ids win exact ties
        view[upd] = d2[upd]
        labels[y0:y1 + 1, x0:x1 + 1][upd] = cid


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _assign_compiled(img, centers, s, spatial_w, dmin, labels):  # pragma: no cover
        h, w = labels.shape
        for cid in range(centers.shape[0]):
            cx = centers[cid, 0]
            cy = centers[cid, 1]
            cr = centers[cid, 2]
            cg = centers[cid, 3]
            cb = centers[cid, 4]
            x0 = max(int(np.ceil(cx - s)), 0)
            x1 = min(int(np.floor(cx + s)), w - 1)
            y0 = max(int(np.ceil(cy - s)), 0)
            y1 = min(int(np.floor(cy + s)), h - 1)
            for y in range(y0, y1 + 1):
                dy = y - cy
                for x in range(x0, x1 + 1):
                    dx = x - cx
                    d2 = (
                        (img[y, x, 0] - cr) ** 2
                        + (img[y, x, 1] - cg) ** 2
                        + (img[y, x, 2] - cb) ** 2
                        + spatial_w * (dx * dx)
                        + spatial_w * (dy * dy)
                    )
                    if d2 < dmin[y, x]:
                        dmin[y, x] = d2
                        labels[y, x] = cid


def slic(frame, k: int = 400, compactness: float = 10.0, iters: int = 10,
         compiled: bool | None = None) -> SuperpixelLabels:
    """Cluster a uint8 RGB frame into roughly-k superpixels.

    Centers seed on a uniform grid, move to the lowest-gradient pixel in
    their 3x3 neighborhood, then alternate between claiming pixels inside
    their 2Sx2S box with D = sqrt(d_color^2 + (m/S)^2 * d_xy^2) (RGB on the
    0..255 scale; comparisons use squared D, which preserves order and
    ties) and updating to their members' means.  Ties go to the lowest
    center id; pixels no box claims attach to the nearest center by spatial
    distance.  `compiled` forces the numba/numpy code path; both produce
    bit-identical results.
    """
    frame = check_image(frame)
    h, w = frame.shape[:2]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > h * w:
        raise ValueError(f"k = {k} exceeds the pixel count {h * w}")
    if compiled is None:
        compiled = _HAVE_NUMBA
    if compiled and not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed; use compiled=False")
    img = np.ascontiguousarray(frame.astype(np.float64))

    cx, cy, s = _seed_grid(h, w, k)
    grad = _color_gradient(img)
    for i in range(cx.size):
        x0, x1 = max(cx[i] - 1, 0), min(cx[i] + 1, w - 1)
        y0, y1 = max(cy[i] - 1, 0), min(cy[i] + 1, h - 1)
        patch = grad[y0:y1 + 1, x0:x1 + 1]
        flat = int(np.argmin(patch))  # first minimum in row-major order
        cy[i] = y0 + flat // patch.shape[1]
        cx[i] = x0 + flat % patch.shape[1]

    n_centers = cx.size
    centers = np.empty((n_centers, 5), dtype=np.float64)
    centers[:, 0] = cx
    centers[:, 1] = cy
    centers[:, 2:] = img[cy, cx]

    spatial_w = (compactness / s) ** 2
    xs_row = np.arange(w, dtype=np.float64)
    ys_col = np.arange(h, dtype=np.float64)
    labels = np.empty((h, w), dtype=np.int32)
    assign = _assign_compiled if compiled else _assign_numpy

    for _ in range(max(iters, 1)):
        dmin = np.full((h, w), np.inf, dtype=np.float64)
        labels.fill(-1)
        assign(img, centers, float(s), float(spatial_w), dmin, labels)

        flat_labels = labels.ravel()
        orphan = np.nonzero(flat_labels == -1)[0]
        if orphan.size:
            oy, ox = np.divmod(orphan, w)
            dx = ox[:, None] - centers[None, :, 0]
            dy = oy[:, None] - centers[None, :, 1]
            flat_labels[orphan] = np.argmin(dx * dx + dy * dy, axis=1)

        counts = np.bincount(flat_labels, minlength=n_centers).astype(np.float64)
        filled = counts > 0
        sums = np.empty((n_centers, 5), dtype=np.float64)
        sums[:, 0] = np.bincount(flat_labels, weights=np.tile(xs_row, h), minlength=n_centers)
        sums[:, 1] = np.bincount(flat_labels, weights=np.repeat(ys_col, w), minlength=n_centers)
        for ch in range(3):
            sums[:, 2 + ch] = np.bincount(flat_labels, weights=img[:, :, ch].ravel(),
                                          minlength=n_centers)
        centers[filled] = sums[filled] / counts[filled, None]

    return SuperpixelLabels(labels=labels.copy(), k=n_centers, centers=centers)


def soft_mean_pool(conf, labels, blend: float = 0.5) -> np.ndarray:
    """Blend each pixel's confidence toward its superpixel's mean:
    out = (1 - blend) * conf + blend * cluster_mean."""
    conf = check_confidence(conf)
    lab = labels.labels if isinstance(labels, SuperpixelLabels) else np.asarray(labels)
    k = labels.k if isinstance(labels, SuperpixelLabels) else int(lab.max()) + 1
    check_same_extent(conf, lab, "confidence and superpixel labels")
    if not 0.0 <= blend <= 1.0:
        raise ValueError("blend must lie in [0, 1]")
    flat = lab.ravel()
    counts = np.bincount(flat, minlength=k).astype(np.float64)
    sums = np.bincount(flat, weights=conf.ravel(), minlength=k)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return (1.0 - blend) * conf + blend * means[lab]
