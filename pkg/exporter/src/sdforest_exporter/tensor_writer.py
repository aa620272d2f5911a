"""Writer for the segmentation core's raw tensor container.

Layout (little-endian): magic "SDFT", version byte 1, dtype byte 1
(float32 LE), ndim byte, one reserved zero byte, ndim uint32 extents,
then the row-major float32 payload.  This module is the exporter's only
coupling to the core: it emits the same bytes the core reads.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SDFT"
VERSION = 1
DTYPE_F32LE = 1
SUFFIX = ".sdft"


def write_tensor(tensor: np.ndarray, path) -> None:
    tensor = np.asarray(tensor, dtype="<f4")
    if tensor.ndim < 1:
        raise ValueError("0-dimensional tensors are not representable")
    header = MAGIC + bytes([VERSION, DTYPE_F32LE, tensor.ndim, 0])
    header += struct.pack(f"<{tensor.ndim}I", *tensor.shape)
    with open(Path(path), "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(tensor).tobytes())
