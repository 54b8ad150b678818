"""Binary PPM (P6, maxval 255) backgrounds.

Rasters are immutable: width, height and a flat RGB byte string.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class RasterError(ValueError):
    pass


@dataclass(frozen=True)
class Raster:
    width: int
    height: int
    pixels: bytes  # row-major RGB, len == 3 * width * height

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise RasterError(f"degenerate raster {self.width}x{self.height}")
        if len(self.pixels) != 3 * self.width * self.height:
            raise RasterError(
                f"pixel buffer holds {len(self.pixels)} bytes, "
                f"expected {3 * self.width * self.height}"
            )

    def to_array(self) -> np.ndarray:
        """Pixels as float array (height, width, 3) in [0, 1]."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        return arr.reshape(self.height, self.width, 3).astype(float) / 255.0

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Raster":
        """Build from a float array in [0, 1] or a uint8 array, shape (h, w, 3)."""
        arr = np.asarray(arr)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise RasterError(f"need (h, w, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
        h, w = arr.shape[:2]
        return cls(width=w, height=h, pixels=arr.tobytes())


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise RasterError("truncated PPM header")
    return data[start:pos], pos


def read_ppm(path: str | Path) -> Raster:
    data = Path(path).read_bytes()
    if data[:2] != b"P6":
        raise RasterError(f"{path}: not a binary PPM (P6)")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise RasterError(f"{path}: bad header token {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise RasterError(f"{path}: maxval {maxval} unsupported, need 255")
    pos += 1  # single whitespace byte after maxval
    need = 3 * width * height
    body = data[pos : pos + need]
    if len(body) != need:
        raise RasterError(f"{path}: expected {need} pixel bytes, found {len(body)}")
    return Raster(width=width, height=height, pixels=body)


def write_ppm(raster: Raster, path: str | Path) -> None:
    header = f"P6\n{raster.width} {raster.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.pixels)
