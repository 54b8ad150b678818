"""Deterministic context features.

Stands in for pretrained image/text encoders behind a small interface so a
learned extractor could be swapped in without touching the model. Image
statistics: a 4x4 grid of mean RGB (48), global per-channel mean and std
(6), and mean luma (1) = 55 dims. Text statistics: length and character
class ratios (6) plus a 32-bin hashed character-trigram bag = 38 dims.
"""
from __future__ import annotations

import string
import zlib
from dataclasses import dataclass

import numpy as np

from .color import luma
from .docs import CanvasSpec, TextElement
from .raster import Raster

GRID = 4
CANVAS_IMAGE_DIM = GRID * GRID * 3 + 6 + 1  # 55
TEXT_DIM = 6 + 32  # 38
DEFAULT_EXTENT = 0.10  # of canvas width/height per side pair

_PUNCT = set(string.punctuation)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    source: str  # canvas-image | element-image | text


def _grid_stats(pixels: np.ndarray) -> np.ndarray:
    """55-dim statistics of an (h, w, 3) array in [0, 1]."""
    h, w = pixels.shape[:2]
    rows = np.linspace(0, h, GRID + 1).round().astype(int)
    cols = np.linspace(0, w, GRID + 1).round().astype(int)
    cells = []
    for r in range(GRID):
        # clamp to a nonempty in-bounds slice even when the raster is
        # smaller than the grid (cells may then overlap)
        r0 = min(rows[r], h - 1)
        r1 = max(rows[r + 1], r0 + 1)
        for c in range(GRID):
            c0 = min(cols[c], w - 1)
            c1 = max(cols[c + 1], c0 + 1)
            cells.append(pixels[r0:r1, c0:c1].mean(axis=(0, 1)))
    grid = np.concatenate(cells)
    mean = pixels.mean(axis=(0, 1))
    std = pixels.std(axis=(0, 1))
    lum = float(luma(pixels).mean())
    return np.concatenate([grid, mean, std, [lum]])


def extract_canvas_image(background: Raster) -> FeatureVector:
    return FeatureVector(values=_grid_stats(background.to_array()), source="canvas-image")


def _crop_bounds(
    canvas: CanvasSpec, elem: TextElement, half_w: float, half_h: float
) -> tuple[int, int, int, int] | None:
    """Crop rectangle in raster pixel indices, or None when degenerate."""
    r = canvas.background
    x0 = max(elem.center_x - half_w, 0.0) / canvas.width * r.width
    x1 = min(elem.center_x + half_w, canvas.width) / canvas.width * r.width
    y0 = max(elem.center_y - half_h, 0.0) / canvas.height * r.height
    y1 = min(elem.center_y + half_h, canvas.height) / canvas.height * r.height
    ix0, ix1 = int(np.floor(x0)), int(np.ceil(x1))
    iy0, iy1 = int(np.floor(y0)), int(np.ceil(y1))
    ix0, iy0 = max(ix0, 0), max(iy0, 0)
    ix1, iy1 = min(ix1, r.width), min(iy1, r.height)
    if ix1 <= ix0 or iy1 <= iy0:
        return None
    return ix0, ix1, iy0, iy1


def extract_element_image(canvas: CanvasSpec, elem: TextElement) -> FeatureVector:
    """Same statistics over the element's crop of the background.

    Box extents default to 10% of the canvas per side when absent; a crop
    that clamps to zero area falls back to the default extent rather than
    failing.
    """
    half_w = elem.box_width / 2.0 if elem.box_width else canvas.width * DEFAULT_EXTENT
    half_h = elem.box_height / 2.0 if elem.box_height else canvas.height * DEFAULT_EXTENT
    bounds = _crop_bounds(canvas, elem, half_w, half_h)
    if bounds is None:
        bounds = _crop_bounds(
            canvas, elem, canvas.width * DEFAULT_EXTENT, canvas.height * DEFAULT_EXTENT
        )
    if bounds is None:
        # center pinned on a border of a 1-px raster; take everything
        r = canvas.background
        bounds = (0, r.width, 0, r.height)
    ix0, ix1, iy0, iy1 = bounds
    crop = canvas.background.to_array()[iy0:iy1, ix0:ix1]
    return FeatureVector(values=_grid_stats(crop), source="element-image")


def extract_text(text: str) -> FeatureVector:
    if not text:
        raise ValueError("cannot featurize empty text")
    n = len(text)
    counts = np.zeros(4)
    for ch in text:
        if ch.isupper():
            counts[0] += 1
        if ch.isdigit():
            counts[1] += 1
        if ch in _PUNCT:
            counts[2] += 1
        if ch.isspace():
            counts[3] += 1
    head = np.array(
        [
            np.log1p(n),
            float(text.count("\n") + 1),
            counts[0] / n,
            counts[1] / n,
            counts[2] / n,
            counts[3] / n,
        ]
    )
    bag = np.zeros(32)
    folded = text.casefold()
    for i in range(len(folded) - 2):
        tri = folded[i : i + 3]
        bag[zlib.crc32(tri.encode("utf-8")) % 32] += 1.0
    total = bag.sum()
    if total > 0:
        bag = bag / total
    return FeatureVector(values=np.concatenate([head, bag]), source="text")


class DeterministicExtractor:
    """Default extractor bundling the three modalities."""

    canvas_dim = CANVAS_IMAGE_DIM
    element_dim = CANVAS_IMAGE_DIM
    text_dim = TEXT_DIM

    def canvas_image(self, canvas: CanvasSpec) -> np.ndarray:
        return extract_canvas_image(canvas.background).values

    def element_image(self, canvas: CanvasSpec, elem: TextElement) -> np.ndarray:
        return extract_element_image(canvas, elem).values

    def text(self, elem: TextElement) -> np.ndarray:
        return extract_text(elem.text).values
