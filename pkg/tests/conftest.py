import numpy as np
import pytest


def _coarse_noise(rng, h, w, cells=16, lo=0.0, hi=1.0):
    """Smooth texture: coarse uniform noise bilinearly upsampled."""
    coarse = rng.uniform(lo, hi, size=(cells, cells))
    ys = np.linspace(0, cells - 1, h)
    xs = np.linspace(0, cells - 1, w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, cells - 1)
    x1 = np.minimum(x0 + 1, cells - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = coarse[y0][:, x0] * (1 - fx) + coarse[y0][:, x1] * fx
    bot = coarse[y1][:, x0] * (1 - fx) + coarse[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def make_disk_sequence(n_frames=40, size=256, radius=42, start=(70, 80),
                       velocity=(3, 2), seed=7):
    """Textured red disk moving over a textured blue-green background.

    Returns (frames, masks): uint8 (H, W, 3) frames and analytic uint8
    ground-truth masks.  The disk texture moves rigidly with the disk.
    """
    rng = np.random.default_rng(seed)
    h = w = size
    bg = np.empty((h, w, 3), dtype=np.float64)
    bg[:, :, 0] = 20 + 60 * _coarse_noise(rng, h, w)
    bg[:, :, 1] = 80 + 60 * _coarse_noise(rng, h, w)
    bg[:, :, 2] = 130 + 70 * _coarse_noise(rng, h, w)

    pad = radius + 2
    tex = np.empty((2 * pad + 1, 2 * pad + 1, 3), dtype=np.float64)
    tex[:, :, 0] = 190 + 50 * _coarse_noise(rng, 2 * pad + 1, 2 * pad + 1, cells=8)
    tex[:, :, 1] = 40 + 40 * _coarse_noise(rng, 2 * pad + 1, 2 * pad + 1, cells=8)
    tex[:, :, 2] = 25 + 35 * _coarse_noise(rng, 2 * pad + 1, 2 * pad + 1, cells=8)

    yy, xx = np.mgrid[0:h, 0:w]
    frames, masks = [], []
    cx, cy = start
    for _ in range(n_frames):
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius
        frame = bg.copy()
        ty = np.clip(yy - cy + pad, 0, 2 * pad)
        tx = np.clip(xx - cx + pad, 0, 2 * pad)
        frame[inside] = tex[ty[inside], tx[inside]]
        frames.append(np.clip(frame, 0, 255).astype(np.uint8))
        masks.append(inside.astype(np.uint8))
        cx += velocity[0]
        cy += velocity[1]
    return frames, masks


@pytest.fixture
def disk_frame():
    frames, masks = make_disk_sequence(n_frames=1, size=128, radius=24,
                                       start=(52, 60), velocity=(0, 0), seed=3)
    return frames[0], masks[0]
