"""Binary container for named float32 tensors.

Used for model checkpoints and the unit-feature cache. The layout is fixed
so that save -> load -> save reproduces the file byte for byte:

    magic (8 bytes) | version u64 | tensor count u64
    per tensor: name length u64 | name (utf-8) | rank u64 | extents u64 each
                | raw float32 data

All integers are little-endian. Tensors are written in sorted name order.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"LRACTNN\x00"
VERSION = 1

_U64 = struct.Struct("<Q")


def save_tensors(path, tensors: dict) -> None:
    """Write a name -> array mapping. Arrays are stored as float32."""
    blob = bytearray()
    blob += MAGIC
    blob += _U64.pack(VERSION)
    blob += _U64.pack(len(tensors))
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        raw = name.encode("utf-8")
        blob += _U64.pack(len(raw))
        blob += raw
        blob += _U64.pack(arr.ndim)
        for extent in arr.shape:
            blob += _U64.pack(extent)
        blob += arr.tobytes()
    tmp = f"{path}.tmp"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def load_tensors(path) -> dict:
    """Read a container written by :func:`save_tensors`. Returns float32 arrays."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a tensor container (bad magic)")
    off = len(MAGIC)

    def u64():
        nonlocal off
        (val,) = _U64.unpack_from(blob, off)
        off += 8
        return val

    version = u64()
    if version != VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    count = u64()
    tensors = {}
    for _ in range(count):
        name_len = u64()
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        rank = u64()
        shape = tuple(u64() for _ in range(rank))
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(blob, dtype="<f4", count=n, offset=off).reshape(shape)
        off += 4 * n
        tensors[name] = arr.copy()
    if off != len(blob):
        raise ValueError(f"{path}: {len(blob) - off} trailing bytes")
    return tensors
