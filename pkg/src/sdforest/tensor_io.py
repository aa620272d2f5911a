"""Bit-exact file I/O: PNG images, PNG label masks, and raw float32 tensors.

Tensor container format (little-endian throughout):

    bytes 0..3   magic "SDFT"
    byte  4      format version, currently 1
    byte  5      dtype code, 1 = float32 little-endian
    byte  6      ndim (>= 1)
    byte  7      reserved, must be 0
    next 4*ndim  uint32 extents, first dimension outermost
    rest         row-major float32 payload, product(extents) values

Header length is exactly 8 + 4*ndim bytes.  Feature maps use dim order
(C, H, W).
"""

import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .validation import check_image, check_mask

TENSOR_MAGIC = b"SDFT"
TENSOR_VERSION = 1
TENSOR_DTYPE_F32LE = 1
TENSOR_SUFFIX = ".sdft"


class MalformedPngError(ValueError):
    """The file is not a decodable PNG (corrupt or truncated)."""


class UnsupportedPngError(ValueError):
    """Decodable, but not an 8-bit RGB or grayscale PNG."""


class MaskFormatError(ValueError):
    """Mask PNG does not carry raw per-pixel object ids."""


class TensorFormatError(ValueError):
    """Tensor file violates the container format."""


def _open_png(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        im = Image.open(path)
        im.load()
    except UnidentifiedImageError as exc:
        raise MalformedPngError(f"not a decodable PNG: {path}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise MalformedPngError(f"corrupt or truncated PNG: {path}") from exc
    return im


def read_image(path) -> np.ndarray:
    """Read an 8-bit RGB or grayscale PNG as a uint8 (H, W, 3) array.

    Grayscale pixels are replicated onto all three channels.
    """
    im = _open_png(path)
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
        raise UnsupportedPngError(f"unsupported bit depth (mode {im.mode}): {path}")
    if im.mode == "L":
        arr = np.asarray(im, dtype=np.uint8)
        return np.repeat(arr[:, :, None], 3, axis=2)
    if im.mode == "RGB":
        return np.asarray(im, dtype=np.uint8)
    raise UnsupportedPngError(f"expected 8-bit RGB or grayscale, got mode {im.mode}: {path}")


def write_image(frame, path) -> None:
    frame = check_image(frame)
    Image.fromarray(frame, mode="RGB").save(Path(path), format="PNG")


def read_mask(path) -> np.ndarray:
    """Read a label mask PNG as a uint8 (H, W) array; pixel value = object id.

    Accepts single-channel (grayscale) and palette PNGs; palette entries are
    read as raw indices.  The object count of a mask is its maximum label.
    """
    im = _open_png(path)
    if im.mode in ("L", "P"):
        return np.asarray(im.getchannel(0) if im.mode == "L" else im, dtype=np.uint8)
    if im.mode in ("RGB", "RGBA"):
        raise MaskFormatError(
            f"mask {path} is stored as RGB; convert it to a single-channel or "
            "palette PNG whose pixel values are object ids"
        )
    raise UnsupportedPngError(f"unsupported mask mode {im.mode}: {path}")


def write_mask(mask, path) -> None:
    mask = check_mask(mask)
    Image.fromarray(mask, mode="L").save(Path(path), format="PNG")


def write_gray(values, path) -> None:
    """Write a uint8 (H, W) array as a single-channel grayscale PNG."""
    values = np.asarray(values)
    if values.ndim != 2 or values.dtype != np.uint8:
        raise ValueError(f"expected a uint8 (H, W) array, got {values.dtype} {values.shape}")
    Image.fromarray(values, mode="L").save(Path(path), format="PNG")


def num_objects(mask) -> int:
    """Object count of a label mask: its maximum label value."""
    mask = check_mask(mask)
    return int(mask.max()) if mask.size else 0


def read_tensor_header(path) -> tuple:
    """Validate a tensor file and return its dims without loading the payload."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "rb") as f:
        head = f.read(8)
        if len(head) < 8:
            raise TensorFormatError(f"truncated header ({len(head)} bytes): {path}")
        if head[:4] != TENSOR_MAGIC:
            raise TensorFormatError(f"bad magic {head[:4]!r}: {path}")
        version, dtype_code, ndim, reserved = head[4], head[5], head[6], head[7]
        if version != TENSOR_VERSION:
            raise TensorFormatError(f"unsupported version {version}: {path}")
        if dtype_code != TENSOR_DTYPE_F32LE:
            raise TensorFormatError(f"unsupported dtype code {dtype_code}: {path}")
        if ndim < 1:
            raise TensorFormatError(f"ndim must be >= 1: {path}")
        if reserved != 0:
            raise TensorFormatError(f"reserved byte must be 0, got {reserved}: {path}")
        extents = f.read(4 * ndim)
        if len(extents) < 4 * ndim:
            raise TensorFormatError(f"truncated extents: {path}")
        dims = struct.unpack(f"<{ndim}I", extents)
    count = 1
    for d in dims:
        count *= d
    expected = 8 + 4 * ndim + 4 * count
    if path.stat().st_size != expected:
        raise TensorFormatError(
            f"payload length mismatch: expected {expected} bytes total for dims "
            f"{dims}, file has {path.stat().st_size}: {path}"
        )
    return dims


def read_tensor(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    data = path.read_bytes()
    if len(data) < 8:
        raise TensorFormatError(f"truncated header ({len(data)} bytes): {path}")
    if data[:4] != TENSOR_MAGIC:
        raise TensorFormatError(f"bad magic {data[:4]!r}: {path}")
    version, dtype_code, ndim, reserved = data[4], data[5], data[6], data[7]
    if version != TENSOR_VERSION:
        raise TensorFormatError(f"unsupported version {version}: {path}")
    if dtype_code != TENSOR_DTYPE_F32LE:
        raise TensorFormatError(f"unsupported dtype code {dtype_code}: {path}")
    if ndim < 1:
        raise TensorFormatError(f"ndim must be >= 1: {path}")
    if reserved != 0:
        raise TensorFormatError(f"reserved byte must be 0, got {reserved}: {path}")
    header_len = 8 + 4 * ndim
    if len(data) < header_len:
        raise TensorFormatError(f"truncated extents: {path}")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    count = 1
    for d in dims:
        count *= d
    payload = data[header_len:]
    if len(payload) != 4 * count:
        raise TensorFormatError(
            f"payload length mismatch: expected {4 * count} bytes for dims {dims}, "
            f"got {len(payload)}: {path}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def write_tensor(tensor, path) -> None:
    tensor = np.asarray(tensor, dtype="<f4")
    if tensor.ndim < 1:
        raise TensorFormatError("0-dimensional tensors are not representable (ndim >= 1)")
    if tensor.ndim > 255:
        raise TensorFormatError("ndim does not fit the single-byte header field")
    for d in tensor.shape:
        if d >= 2**32:
            raise TensorFormatError(f"extent {d} does not fit a uint32")
    header = TENSOR_MAGIC + bytes([TENSOR_VERSION, TENSOR_DTYPE_F32LE, tensor.ndim, 0])
    header += struct.pack(f"<{tensor.ndim}I", *tensor.shape)
    with open(Path(path), "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(tensor).tobytes())
