"""Binary parameter checkpoints.

Little-endian layout:
  header: magic b"TGN1", uint32 version, uint32 tensor count
  per tensor: uint16 name length, utf-8 name, uint32 rank,
              uint32 dims[rank], float32 data (row-major)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TGN1"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_params(params: dict[str, np.ndarray], path: str | Path) -> None:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(params))]
    for name in sorted(params):
        src = np.asarray(params[name])
        # ascontiguousarray promotes 0-d to (1,), so take the shape first
        arr = np.ascontiguousarray(src, dtype=np.float32)
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", src.ndim))
        chunks.append(struct.pack(f"<{src.ndim}I", *src.shape))
        chunks.append(arr.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_params(path: str | Path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a parameter checkpoint")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    pos = 12
    out: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", data, pos)
            pos += 2
            name = data[pos : pos + name_len].decode("utf-8")
            pos += name_len
            (rank,) = struct.unpack_from("<I", data, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}I", data, pos)
            pos += 4 * rank
            n = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(data, dtype="<f4", count=n, offset=pos)
            pos += 4 * n
            out[name] = arr.reshape(dims).astype(float)
    except (struct.error, ValueError) as e:
        raise CheckpointError(f"{path}: truncated checkpoint ({e})") from None
    if pos != len(data):
        raise CheckpointError(f"{path}: {len(data) - pos} trailing bytes")
    return out
