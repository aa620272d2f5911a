"""End-to-end segmentation: fit forest+linear models on the prompted first
frame, then per frame track a search window, score confidence, pool over
superpixels, refine with the guided filter, and threshold to a label mask.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .config import RunConfig
from .features import handcrafted_features
from .forest import RandomForestPixelClassifier
from .guided_filter import guided_filter
from .linear import SoftmaxRegression
from .sampler import SearchWindow, build_training_set
from .superpixel import slic, soft_mean_pool
from .tracker import init_tracker, track_step
from .validation import check_feature_map, check_image, check_mask, check_same_extent, rgb_to_gray


@dataclass
class ObjectModel:
    """One-vs-rest semi-parametric model for a single object id."""

    object_id: int
    forest: RandomForestPixelClassifier
    linear: SoftmaxRegression
    forest_weight: float = 0.8

    def __post_init__(self):
        if not 0.0 <= self.forest_weight <= 1.0:
            raise ValueError("forest_weight must lie in [0, 1]")


@dataclass
class SequenceResult:
    masks: list
    object_ids: list
    timings_ms: dict = field(default_factory=dict)
    fps: float = 0.0
    confidences: list | None = None


def _positive_column(model, proba: np.ndarray) -> np.ndarray:
    cols = np.nonzero(model.classes_ == 1)[0]
    if cols.size == 0:  # object class absent from training labels
        return np.zeros(proba.shape[0], dtype=np.float64)
    return proba[:, cols[0]]


def predict_confidence(model: ObjectModel, features) -> np.ndarray:
    """Ensemble confidence map: w*forest + (1-w)*linear, per pixel."""
    features = check_feature_map(features)
    c, h, w = features.shape
    rows = features.reshape(c, h * w).T
    conf = _ensemble_rows(model, rows)
    return conf.reshape(h, w)


def _ensemble_rows(model: ObjectModel, rows: np.ndarray) -> np.ndarray:
    gamma = model.forest_weight
    forest_pos = _positive_column(model.forest, model.forest.predict_proba(rows))
    linear_pos = _positive_column(model.linear, model.linear.predict_proba(rows))
    return gamma * forest_pos + (1.0 - gamma) * linear_pos


def fit_first_frame(frame, prompt_mask, window: SearchWindow | None = None,
                    config: RunConfig = RunConfig(), seed: int | None = None,
                    features=None) -> list[ObjectModel]:
    """Train one object-vs-rest model pair per prompt object id."""
    frame = check_image(frame)
    prompt_mask = check_mask(prompt_mask)
    check_same_extent(frame, prompt_mask, "frame and prompt mask")
    if seed is None:
        seed = config.seed
    if features is None:
        features = handcrafted_features(frame)
    features = check_feature_map(features)
    check_same_extent(features, prompt_mask, "features and prompt mask")
    h, w = prompt_mask.shape

    object_ids = [int(v) for v in np.unique(prompt_mask) if v != 0]
    if not object_ids:
        raise ValueError("prompt mask contains no objects")
    if window is None:
        window = SearchWindow.from_mask(prompt_mask).scaled(config.tracker_scale)
    window = window.clipped(w, h)

    data = build_training_set(features, prompt_mask, window, config.sampler_stride)
    models = []
    for oid in object_ids:
        y = (data.labels == oid).astype(np.int64)
        if not y.any():
            raise ValueError(f"object {oid} has no pixels in the training window")
        forest = RandomForestPixelClassifier(
            n_trees=config.forest_trees, max_depth=config.forest_max_depth,
            seed=seed + oid,
        ).fit(data.features, y)
        linear = SoftmaxRegression(
            l2=config.linear_l2, tol=config.linear_tol, max_iters=config.linear_max_iters,
        ).fit(data.features, y)
        models.append(ObjectModel(oid, forest, linear, config.ensemble_forest_weight))
    return models


def segment_frame(models, frame, windows, config: RunConfig = RunConfig(),
                  features=None, superpixels=None, timings=None):
    """Segment one frame given per-object search windows.

    Returns (label mask, per-object refined confidence stack in ascending
    object-id order).  Confidence is computed only inside each object's
    window (0 elsewhere), pooled over the frame's superpixels, refined by
    the guided filter against the grayscale frame, and thresholded; pixels
    take the argmax object (ties to the lowest id) or background below the
    threshold.
    """
    frame = check_image(frame)
    h, w = frame.shape[:2]
    t = _StageClock(timings)
    # id-ascending order makes the argmax tie-break "lowest object id"
    order = sorted(range(len(models)), key=lambda i: models[i].object_id)
    models = [models[i] for i in order]
    windows = [windows[i] for i in order]
    if features is None:
        with t("features"):
            features = handcrafted_features(frame)
    if superpixels is None:
        with t("superpixel"):
            superpixels = slic(frame, config.slic_k, config.slic_compactness, config.slic_iters)
    guide = rgb_to_gray(frame).astype(np.float64)

    refined = np.zeros((len(models), h, w), dtype=np.float64)
    for i, (model, window) in enumerate(zip(models, windows)):
        window = window.clipped(w, h)
        with t("confidence"):
            conf = np.zeros((h, w), dtype=np.float64)
            sub = features[:, window.y0:window.y1, window.x0:window.x1]
            rows = sub.reshape(sub.shape[0], -1).T
            conf[window.y0:window.y1, window.x0:window.x1] = \
                _ensemble_rows(model, rows).reshape(window.h, window.w)
        with t("pooling"):
            pooled = soft_mean_pool(conf, superpixels, config.pooling_blend)
        with t("guided_filter"):
            refined[i] = guided_filter(guide, pooled, config.igf_radius, config.igf_eps)

    with t("assign"):
        best = np.argmax(refined, axis=0)  # first maximum: lowest object id
        ids = np.asarray([m.object_id for m in models], dtype=np.uint8)
        label = np.where(refined.max(axis=0) >= config.threshold, ids[best], 0).astype(np.uint8)
    return label, refined


class _StageClock:
    def __init__(self, timings):
        self.timings = timings

    def __call__(self, stage):
        self.stage = stage
        return self

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        if self.timings is not None:
            dt = (time.perf_counter() - self.t0) * 1000.0
            self.timings[self.stage] = self.timings.get(self.stage, 0.0) + dt
        return False


def run_sequence(frames, prompt_mask, config: RunConfig = RunConfig(),
                 seed: int | None = None, features_list=None,
                 collect_confidence: bool = False) -> SequenceResult:
    """Segment a frame sequence from a first-frame prompt.

    Frame 1's output is the prompt itself; later frames get their windows
    from the per-object trackers, which are fed back each predicted mask.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("need at least one frame")
    prompt_mask = check_mask(prompt_mask)
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ValueError(f"frame {i} changed size: {f.shape} vs {shape}")
    check_same_extent(frames[0], prompt_mask, "frame and prompt mask")
    if features_list is not None and len(features_list) < len(frames):
        raise ValueError(f"features_list covers {len(features_list)} of "
                         f"{len(frames)} frames")
    if seed is None:
        seed = config.seed

    def frame_features(i):
        if features_list is not None:
            return check_feature_map(features_list[i])
        return handcrafted_features(frames[i])

    start = time.perf_counter()
    timings: dict = {}
    clock = _StageClock(timings)

    with clock("features"):
        feats = frame_features(0)
    with clock("fit"):
        models = fit_first_frame(frames[0], prompt_mask, None, config, seed, feats)
        trackers = {
            m.object_id: init_tracker(feats, prompt_mask, m.object_id, config.tracker_scale)
            for m in models
        }

    masks = [prompt_mask.copy()]
    confidences = [] if collect_confidence else None
    prev_mask = prompt_mask
    for n in range(1, len(frames)):
        with clock("features"):
            feats = frame_features(n)
        windows = []
        with clock("track"):
            for m in models:
                obj_prev = (prev_mask == m.object_id).astype(np.uint8)
                trackers[m.object_id], window = track_step(
                    trackers[m.object_id], feats, obj_prev, config.tracker_scale)
                windows.append(window)
        label, refined = segment_frame(models, frames[n], windows, config,
                                       features=feats, timings=timings)
        masks.append(label)
        if collect_confidence:
            confidences.append(refined)
        prev_mask = label

    total = time.perf_counter() - start
    fps = len(frames) / total if total > 0 else 0.0
    timings["total"] = total * 1000.0
    return SequenceResult(
        masks=masks,
        object_ids=[m.object_id for m in models],
        timings_ms=timings,
        fps=fps,
        confidences=confidences,
    )


class SDForestSegmenter(BaseEstimator):
    """Estimator facade: fit on a prompted first frame, then segment the
    following frames one at a time (stateful, in order)."""

    def __init__(self, config: RunConfig = RunConfig(), seed: int | None = None):
        self.config = config
        self.seed = seed

    def fit(self, frame, prompt_mask, features=None):
        feats = features if features is not None else handcrafted_features(frame)
        seed = self.seed if self.seed is not None else self.config.seed
        self.models_ = fit_first_frame(frame, prompt_mask, None, self.config, seed, feats)
        self.trackers_ = {
            m.object_id: init_tracker(feats, prompt_mask, m.object_id,
                                      self.config.tracker_scale)
            for m in self.models_
        }
        self.prev_mask_ = check_mask(prompt_mask)
        return self

    def predict(self, frame, features=None):
        """Segment the next frame of the sequence and advance tracker state."""
        feats = features if features is not None else handcrafted_features(frame)
        windows = []
        for m in self.models_:
            obj_prev = (self.prev_mask_ == m.object_id).astype(np.uint8)
            self.trackers_[m.object_id], window = track_step(
                self.trackers_[m.object_id], feats, obj_prev, self.config.tracker_scale)
            windows.append(window)
        label, _ = segment_frame(self.models_, frame, windows, self.config, features=feats)
        self.prev_mask_ = label
        return label
