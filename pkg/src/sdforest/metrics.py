"""DAVIS-style evaluation: region similarity J, boundary measure F, and the
mean / recall / decay statistics of each per-sequence series.

Conventions (fixed here, overridable where noted):
  - J and F of two empty masks are 1; of exactly one empty mask, 0.
  - Boundary pixels are mask pixels 4-adjacent to a non-mask pixel, with
    the frame edge counting as non-mask.
  - Boundary matches use Chebyshev distance <= tol; the default tolerance
    is ceil(0.8% of the frame diagonal).
  - recall = fraction of frames with value > 0.5; decay = mean of the first
    quartile bin minus mean of the last, over 4 contiguous
    equal-as-possible bins (remainder frames go to the earliest bins; with
    fewer than 4 frames the last non-empty bin stands in for the fourth).
  - The first frame of a sequence is the prompt and is excluded.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import binary_dilation

from . import tensor_io

MEASURES = ("J_M", "J_O", "J_D", "F_M", "F_O", "F_D")


def jaccard(pred, gt) -> float:
    """Intersection over union of two binary masks."""
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise ValueError(f"extent mismatch: {pred.shape} vs {gt.shape}")
    union = np.logical_or(pred, gt).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred, gt).sum() / union)


def mask_boundary(mask) -> np.ndarray:
    """Mask pixels 4-adjacent to a non-mask pixel (frame edge = non-mask)."""
    mask = np.asarray(mask).astype(bool)
    interior = mask.copy()
    interior[1:, :] &= mask[:-1, :]
    interior[:-1, :] &= mask[1:, :]
    interior[:, 1:] &= mask[:, :-1]
    interior[:, :-1] &= mask[:, 1:]
    interior[0, :] = False
    interior[-1, :] = False
    interior[:, 0] = False
    interior[:, -1] = False
    return mask & ~interior


def default_boundary_tol(h: int, w: int) -> int:
    return int(math.ceil(0.008 * math.hypot(h, w)))


def boundary_f(pred, gt, tol: int | None = None) -> float:
    """Boundary F-measure: precision/recall of boundary pixels within a
    Chebyshev-distance tolerance, combined as 2PR/(P+R)."""
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise ValueError(f"extent mismatch: {pred.shape} vs {gt.shape}")
    if tol is None:
        tol = default_boundary_tol(*pred.shape)
    pb = mask_boundary(pred)
    gb = mask_boundary(gt)
    np_pb, np_gb = int(pb.sum()), int(gb.sum())
    if np_pb == 0 and np_gb == 0:
        return 1.0
    if np_pb == 0 or np_gb == 0:
        return 0.0
    if tol > 0:
        square = np.ones((2 * tol + 1, 2 * tol + 1), dtype=bool)
        gb_zone = binary_dilation(gb, structure=square)
        pb_zone = binary_dilation(pb, structure=square)
    else:
        gb_zone, pb_zone = gb, pb
    precision = float((pb & gb_zone).sum() / np_pb)
    recall = float((gb & pb_zone).sum() / np_gb)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _quartile_bins(n: int):
    sizes = [n // 4 + (1 if i < n % 4 else 0) for i in range(4)]
    bins, start = [], 0
    for size in sizes:
        bins.append((start, start + size))
        start += size
    return [b for b in bins if b[1] > b[0]]


def sequence_stats(values) -> tuple[float, float, float]:
    """(mean, recall, decay) of a per-frame measure series."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("need at least one value")
    mean = float(values.mean())
    recall = float((values > 0.5).mean())
    bins = _quartile_bins(values.size)
    first = values[bins[0][0]:bins[0][1]].mean()
    last = values[bins[-1][0]:bins[-1][1]].mean()
    return mean, recall, float(first - last)


@dataclass
class MetricsReport:
    # sequences[name][object_id] -> {measure: value}; per_sequence[name] and
    # globals average over objects, then over sequences
    sequences: dict = field(default_factory=dict)
    per_sequence: dict = field(default_factory=dict)
    globals: dict = field(default_factory=dict)
    fps: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "global": self.globals,
            "sequences": {
                name: {
                    "mean": self.per_sequence[name],
                    "objects": {str(oid): stats for oid, stats in objs.items()},
                }
                for name, objs in self.sequences.items()
            },
            "fps": self.fps,
        }

    def to_text(self) -> str:
        lines = [f"global.{m}: {self.globals[m]:.6f}" for m in MEASURES]
        if self.fps is not None:
            lines.append(f"fps: {self.fps:.3f}")
        for name in sorted(self.sequences):
            for m in MEASURES:
                lines.append(f"seq.{name}.{m}: {self.per_sequence[name][m]:.6f}")
            for oid in sorted(self.sequences[name]):
                for m in MEASURES:
                    lines.append(
                        f"seq.{name}.obj{oid}.{m}: {self.sequences[name][oid][m]:.6f}"
                    )
        return "\n".join(lines) + "\n"


def _sequence_dirs(pred_dir: Path, gt_dir: Path):
    subdirs = sorted(p.name for p in gt_dir.iterdir() if p.is_dir())
    if subdirs:
        return [(name, pred_dir / name, gt_dir / name) for name in subdirs]
    return [(gt_dir.name, pred_dir, gt_dir)]


def evaluate(pred_dir, gt_dir, tol: int | None = None, fps: float | None = None) -> MetricsReport:
    """Score predicted masks against ground truth, per object then averaged.

    Both directories either contain mask PNGs directly (one sequence) or one
    subdirectory of PNGs per sequence.  Frames pair by filename.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    report = MetricsReport(fps=fps)
    for name, pdir, gdir in _sequence_dirs(pred_dir, gt_dir):
        frames = sorted(p.name for p in gdir.glob("*.png"))
        if not frames:
            continue
        scored = frames[1:] if len(frames) > 1 else frames
        gt_masks, pred_masks = [], []
        for fname in scored:
            ppath = pdir / fname
            if not ppath.is_file():
                raise FileNotFoundError(f"missing predicted frame {name}/{fname}")
            gt = tensor_io.read_mask(gdir / fname)
            pred = tensor_io.read_mask(ppath)
            if gt.shape != pred.shape:
                raise ValueError(f"extent mismatch on {name}/{fname}: "
                                 f"{pred.shape} vs {gt.shape}")
            gt_masks.append(gt)
            pred_masks.append(pred)
        ids = sorted(set(np.unique(np.stack(gt_masks))) - {0})
        if not ids:
            continue
        per_object = {}
        for oid in ids:
            j_series = [jaccard(p == oid, g == oid) for p, g in zip(pred_masks, gt_masks)]
            f_series = [boundary_f(p == oid, g == oid, tol) for p, g in zip(pred_masks, gt_masks)]
            jm, jo, jd = sequence_stats(j_series)
            fm, fo, fd = sequence_stats(f_series)
            per_object[int(oid)] = dict(zip(MEASURES, (jm, jo, jd, fm, fo, fd)))
        report.sequences[name] = per_object
        report.per_sequence[name] = {
            m: float(np.mean([stats[m] for stats in per_object.values()])) for m in MEASURES
        }
    if not report.per_sequence:
        raise ValueError(f"no scorable sequences under {gt_dir}")
    report.globals = {
        m: float(np.mean([seq[m] for seq in report.per_sequence.values()])) for m in MEASURES
    }
    return report


def write_report(report: MetricsReport, path) -> None:
    """Write the plain-text report to `path` and its JSON twin to `path`.json."""
    path = Path(path)
    path.write_text(report.to_text(), encoding="utf-8")
    json_path = path.with_suffix(path.suffix + ".json")
    json_path.write_text(json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8")
