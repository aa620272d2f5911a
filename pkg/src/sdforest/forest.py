"""Random-forest pixel classifier: the nonparametric half of the
semi-parametric estimator.

Training is fully deterministic given the seed and independent of the
thread count: tree t draws its bootstrap resample and all of its per-node
feature subsets from a private stream seeded with ``seed ^ t``, and nodes
are processed in preorder (left child first).
"""

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .config import thread_count
from .sampler import PixelDataset

MODEL_MAGIC = b"SDFM"


@dataclass
class _Tree:
    # feature[i] == -1 marks a leaf; dist rows are zero for internal nodes
    feature: np.ndarray    # (n_nodes,) int32
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray       # (n_nodes,) int32
    right: np.ndarray      # (n_nodes,) int32
    dist: np.ndarray       # (n_nodes, n_classes) float64


def _best_split_on_feature(values, labels, n_classes, parent_sq):
    """Best midpoint split of one feature column.

    Returns (gini_decrease, threshold) or None when the column is constant.
    Among equal decreases the lowest threshold wins (thresholds scan in
    ascending order).
    """
    order = np.argsort(values, kind="stable")
    sv = values[order].astype(np.float64, copy=False)
    sy = labels[order]
    n = sv.size
    cut = np.nonzero(sv[1:] != sv[:-1])[0]  # split between cut and cut+1
    if cut.size == 0:
        return None

    n_left = (cut + 1).astype(np.float64)
    n_right = n - n_left
    if n_classes == 2:
        # counts are exact small integers; same class-index summation order
        # as the general path, so both produce identical floats
        cum1 = np.cumsum(sy.astype(np.float64))
        left1 = cum1[cut]
        left0 = n_left - left1
        right1 = cum1[-1] - left1
        right0 = n_right - right1
        sq_left = left0 * left0 + left1 * left1
        sq_right = right0 * right0 + right1 * right1
    else:
        onehot = np.zeros((n, n_classes), dtype=np.float64)
        onehot[np.arange(n), sy] = 1.0
        cum = np.cumsum(onehot, axis=0)
        sq_left = np.einsum("ij,ij->i", cum[cut], cum[cut])
        counts_right = cum[-1][None, :] - cum[cut]
        sq_right = np.einsum("ij,ij->i", counts_right, counts_right)
    # weighted Gini decrease, written with sums of squared class counts
    decrease = (sq_left / n_left + sq_right / n_right) / n - parent_sq / (n * n)

    best = int(np.argmax(decrease))
    thr = (sv[cut[best]] + sv[cut[best] + 1]) / 2.0
    if thr >= sv[cut[best] + 1]:  # midpoint rounded up onto the right value
        thr = sv[cut[best]]
    return float(decrease[best]), float(thr)


def _build_tree(xb, yb, n_classes, max_depth, n_candidates, rng):
    n_total, n_features = xb.shape
    feature, threshold, left, right, dist = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        dist.append(np.zeros(n_classes, dtype=np.float64))
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(n_total), 0)]
    while stack:
        nid, idx, depth = stack.pop()
        labels = yb[idx]
        counts = np.bincount(labels, minlength=n_classes).astype(np.float64)
        n = idx.size
        if counts.max() == n or depth >= max_depth or n < 2:
            dist[nid] = counts / n
            continue

        cand = np.sort(rng.choice(n_features, size=n_candidates, replace=False))
        parent_sq = float(counts @ counts)
        best = None  # (decrease, feature, threshold)
        for d in cand:
            found = _best_split_on_feature(xb[idx, d], labels, n_classes, parent_sq)
            if found is None:
                continue
            dec, thr = found
            # strict > keeps the lowest feature index among ties
            if best is None or dec > best[0]:
                best = (dec, int(d), thr)
        if best is None or best[0] <= 0.0:
            dist[nid] = counts / n
            continue

        _, d, thr = best
        go_left = xb[idx, d] <= thr
        lid = new_node()
        rid = new_node()
        feature[nid] = d
        threshold[nid] = thr
        left[nid] = lid
        right[nid] = rid
        stack.append((rid, idx[~go_left], depth + 1))
        stack.append((lid, idx[go_left], depth + 1))  # popped first: preorder

    return _Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        dist=np.stack(dist),
    )


class RandomForestPixelClassifier(BaseEstimator):
    """Bootstrap forest with Gini splits over sqrt-subsampled features.

    Leaves store full class histograms, so multi-class masks are handled
    directly; prediction is the mean over trees of the reached leaf's class
    frequencies.
    """

    def __init__(self, n_trees: int = 20, max_depth: int = 20, seed: int = 0, n_threads=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed
        self.n_threads = n_threads

    def fit(self, X, y):
        X = np.asarray(X)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("X must be a non-empty (N, C) matrix")
        if X.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        n, c = X.shape
        n_candidates = math.ceil(math.sqrt(c))
        n_classes = self.classes_.size

        def train_one(t):
            rng = np.random.default_rng(self.seed ^ t)
            boot = rng.integers(0, n, size=n)
            return _build_tree(X[boot], y_enc[boot], n_classes, self.max_depth, n_candidates, rng)

        workers = thread_count(self.n_threads)
        if workers > 1 and self.n_trees > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                self.trees_ = list(pool.map(train_one, range(self.n_trees)))
        else:
            self.trees_ = [train_one(t) for t in range(self.n_trees)]
        self.n_features_in_ = c
        return self

    def _check_features(self, n_features):
        if n_features != self.n_features_in_:
            raise ValueError(
                f"feature count mismatch: model trained on {self.n_features_in_} "
                f"channels, got {n_features}"
            )

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X)
        self._check_features(X.shape[1])
        n = X.shape[0]
        out = np.zeros((n, self.classes_.size), dtype=np.float64)
        for tree in self.trees_:
            node = np.zeros(n, dtype=np.int32)
            while True:
                feat = tree.feature[node]
                active = np.nonzero(feat >= 0)[0]
                if active.size == 0:
                    break
                sub = node[active]
                go_left = X[active, feat[active]] <= tree.threshold[sub]
                node[active] = np.where(go_left, tree.left[sub], tree.right[sub])
            out += tree.dist[node]
        out /= len(self.trees_)
        return out

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    def predict_map(self, fmap) -> np.ndarray:
        """Per-class confidence stack (n_classes, H, W) for a (C, H, W) map."""
        fmap = np.asarray(fmap)
        c, h, w = fmap.shape
        proba = self.predict_proba(fmap.reshape(c, h * w).T)
        return proba.T.reshape(self.classes_.size, h, w)

    def to_bytes(self) -> bytes:
        """Canonical serialization; equal models produce equal bytes."""
        parts = [
            MODEL_MAGIC,
            struct.pack(
                "<IIIIq",
                len(self.trees_),
                self.classes_.size,
                self.n_features_in_,
                self.max_depth,
                self.seed,
            ),
            np.asarray(self.classes_, dtype="<i8").tobytes(),
        ]
        for tree in self.trees_:
            parts.append(struct.pack("<I", tree.feature.size))
            parts.append(tree.feature.astype("<i4").tobytes())
            parts.append(tree.threshold.astype("<f8").tobytes())
            parts.append(tree.left.astype("<i4").tobytes())
            parts.append(tree.right.astype("<i4").tobytes())
            parts.append(tree.dist.astype("<f8").tobytes())
        return b"".join(parts)


def train_forest(data: PixelDataset, n_trees: int = 20, max_depth: int = 20,
                 seed: int = 0, n_threads=None) -> RandomForestPixelClassifier:
    model = RandomForestPixelClassifier(n_trees, max_depth, seed, n_threads)
    return model.fit(data.features, data.labels)


def predict_forest(model: RandomForestPixelClassifier, fmap) -> np.ndarray:
    return model.predict_map(fmap)
