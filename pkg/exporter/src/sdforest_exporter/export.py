"""Batch feature export: run EfficientNet-B0 over PNG frames, tap four
layers, resize each tap to a shared grid and concatenate to 219 channels.

Tap list (torchvision block indices of the `features` sequential):
the normalized input image (3 channels) plus the outputs of blocks 2, 4
and 5 (24 + 80 + 112 channels), giving 219 channels total.  The chosen
taps are recorded in a manifest.json sidecar next to the tensors.
"""

import json
import warnings
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image, UnidentifiedImageError
from torchvision import models

from .tensor_writer import SUFFIX, write_tensor

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# (name, block index in model.features, channel count); index None = the
# normalized input itself
TAPS = (
    ("input", None, 3),
    ("block2", 2, 24),
    ("block4", 4, 80),
    ("block5", 5, 112),
)
TOTAL_CHANNELS = sum(t[2] for t in TAPS)


REFERENCE_BACKBONE = "efficientnet_b0"


def build_backbone(backbone: str = REFERENCE_BACKBONE, pretrained: bool = True,
                   seed: int = 0) -> torch.nn.Module:
    """EfficientNet-B0 feature stack in eval mode.

    With pretrained=False the weights are randomly initialized from `seed`,
    which keeps smoke runs reproducible when no weights are available.
    """
    if backbone != REFERENCE_BACKBONE:
        raise ValueError(f"unsupported backbone {backbone!r}; the tap list is "
                         f"defined for {REFERENCE_BACKBONE!r}")
    if pretrained:
        weights = models.EfficientNet_B0_Weights.IMAGENET1K_V1
        try:
            model = models.efficientnet_b0(weights=weights)
        except Exception as exc:  # download/read failure
            raise RuntimeError(
                "could not obtain pretrained EfficientNet-B0 weights; "
                "rerun with pretrained=False for a randomly initialized backbone"
            ) from exc
    else:
        torch.manual_seed(seed)
        model = models.efficientnet_b0(weights=None)
    model.eval()
    return model


def _load_frame(path) -> np.ndarray | None:
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "L":
                im = im.convert("RGB")
            if im.mode != "RGB":
                warnings.warn(f"skipping non-RGB image {path}", stacklevel=2)
                return None
            return np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError):
        warnings.warn(f"skipping unreadable image {path}", stacklevel=2)
        return None


def extract_feature_map(model: torch.nn.Module, frame: np.ndarray,
                        target_hw: tuple[int, int]) -> np.ndarray:
    """(219, th, tw) float32 map for one uint8 RGB frame."""
    x = torch.from_numpy(frame.copy()).to(torch.float32).permute(2, 0, 1) / 255.0
    mean = torch.tensor(IMAGENET_MEAN).view(3, 1, 1)
    std = torch.tensor(IMAGENET_STD).view(3, 1, 1)
    x = ((x - mean) / std).unsqueeze(0)

    max_tap = max(idx for _, idx, _ in TAPS if idx is not None)
    outputs = {}
    with torch.no_grad():
        h = x
        for i, block in enumerate(model.features):
            h = block(h)
            outputs[i] = h
            if i >= max_tap:
                break

    planes = []
    for _, idx, channels in TAPS:
        tap = x if idx is None else outputs[idx]
        assert tap.shape[1] == channels
        if tap.shape[2:] != target_hw:
            tap = F.interpolate(tap, size=target_hw, mode="bilinear", align_corners=False)
        planes.append(tap[0])
    return torch.cat(planes, dim=0).numpy().astype(np.float32)


def export_features(frames_dir, out_dir, backbone: str = REFERENCE_BACKBONE,
                    target_size: int | None = None, pretrained: bool = True,
                    seed: int = 0, model: torch.nn.Module | None = None) -> int:
    """Write one tensor per readable PNG frame; returns the file count.

    Tensors are written at a reduced grid (default: quarter resolution of
    each frame) and upsampled by the consumer.  A manifest.json sidecar
    records the backbone, taps, and normalization.
    """
    frames_dir = Path(frames_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(frames_dir.glob("*.png")) if frames_dir.is_dir() else []
    if model is None:
        model = build_backbone(backbone, pretrained=pretrained, seed=seed)

    count = 0
    for path in paths:
        frame = _load_frame(path)
        if frame is None:
            continue
        h, w = frame.shape[:2]
        if target_size is None:
            target_hw = (max(h // 4, 1), max(w // 4, 1))
        else:
            target_hw = (target_size, target_size)
        fmap = extract_feature_map(model, frame, target_hw)
        write_tensor(fmap, out_dir / (path.stem + SUFFIX))
        count += 1

    manifest = {
        "backbone": f"torchvision {backbone}",
        "pretrained": pretrained,
        "normalization": {"mean": list(IMAGENET_MEAN), "std": list(IMAGENET_STD)},
        "taps": [
            {"name": name, "features_index": idx, "channels": channels}
            for name, idx, channels in TAPS
        ],
        "total_channels": TOTAL_CHANNELS,
        "target_size": target_size if target_size is not None else "quarter resolution",
        "files_written": count,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")
    return count
