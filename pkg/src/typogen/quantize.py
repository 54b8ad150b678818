"""Scalar and color quantization.

Continuous context and typographic quantities are discretized with 1-D
k-means (Lloyd's algorithm, quantile seeding). Colors get a 64-entry
codebook fitted in Lab. Encoding is nearest-centroid with ties broken
toward the lower index; decoding returns the centroid.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attributes import CONTEXT_BINS, GEOMETRIC
from .color import lab_to_srgb, srgb_to_lab

MAX_ITER = 200


class QuantizeError(ValueError):
    pass


@dataclass(frozen=True)
class Codebook:
    """Strictly ascending 1-D centroids."""

    name: str
    centroids: tuple[float, ...]
    converged: bool = field(default=True, compare=False)

    @property
    def k(self) -> int:
        return len(self.centroids)

    def encode(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        c = np.asarray(self.centroids)
        idx = np.argmin(np.abs(values[..., None] - c), axis=-1)
        return idx if idx.ndim else int(idx)

    def decode(self, bins) -> np.ndarray:
        c = np.asarray(self.centroids)
        bins = np.asarray(bins, dtype=int)
        if np.any(bins < 0) or np.any(bins >= self.k):
            raise QuantizeError(f"{self.name}: bin out of range 0..{self.k - 1}")
        out = c[bins]
        return out if out.ndim else float(out)


def fit_kmeans_1d(values, k: int, seed: int = 0) -> Codebook:
    """Lloyd's algorithm on scalars. `seed` is accepted for interface
    stability; quantile seeding makes the fit deterministic without it.

    Fewer distinct values than k collapses to the exact distinct set.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise QuantizeError("cannot fit a codebook on no values")
    if not np.all(np.isfinite(values)):
        raise QuantizeError("non-finite values in codebook fit")
    if k < 1:
        raise QuantizeError(f"k must be positive, got {k}")

    distinct = np.unique(values)
    if distinct.size <= k:
        return Codebook(name="", centroids=tuple(float(v) for v in distinct))

    order = np.sort(values)
    centroids = np.quantile(order, (np.arange(k) + 0.5) / k)
    centroids = np.unique(centroids)
    prev_assign = None
    converged = False
    for _ in range(MAX_ITER):
        mids = 0.5 * (centroids[:-1] + centroids[1:])
        assign = np.searchsorted(mids, order, side="right")
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            converged = True
            break
        prev_assign = assign
        sums = np.bincount(assign, weights=order, minlength=centroids.size)
        counts = np.bincount(assign, minlength=centroids.size)
        nonempty = counts > 0
        centroids = np.where(nonempty, sums / np.maximum(counts, 1), centroids)
        centroids = np.unique(centroids)

    if centroids.size < k:
        warnings.warn(
            f"codebook collapsed to {centroids.size} centroids (asked for {k})",
            stacklevel=2,
        )
    return Codebook(name="", centroids=tuple(float(c) for c in centroids), converged=converged)


@dataclass(frozen=True)
class ColorCodebook:
    """k centroids in Lab; encode from sRGB, decode back to 8-bit sRGB."""

    centroids_lab: tuple[tuple[float, float, float], ...]
    converged: bool = field(default=True, compare=False)

    @property
    def k(self) -> int:
        return len(self.centroids_lab)

    def encode(self, rgb) -> np.ndarray:
        lab = srgb_to_lab(np.asarray(rgb, dtype=float))
        c = np.asarray(self.centroids_lab)
        d = np.sum((lab[..., None, :] - c) ** 2, axis=-1)
        idx = np.argmin(d, axis=-1)
        return idx if idx.ndim else int(idx)

    def decode_lab(self, bins) -> np.ndarray:
        c = np.asarray(self.centroids_lab)
        bins = np.asarray(bins, dtype=int)
        if np.any(bins < 0) or np.any(bins >= self.k):
            raise QuantizeError(f"color bin out of range 0..{self.k - 1}")
        out = c[bins]
        return out

    def decode(self, bins) -> np.ndarray:
        """Decoded centroid as rounded 8-bit sRGB, clamped to gamut."""
        rgb = np.clip(np.rint(lab_to_srgb(self.decode_lab(bins))), 0, 255)
        return rgb.astype(int)


def fit_color_codebook(rgb_values, k: int = 64, seed: int = 0) -> ColorCodebook:
    """Lloyd's in Lab with farthest-point seeding from a seeded start."""
    rgb = np.asarray(rgb_values, dtype=float).reshape(-1, 3)
    if rgb.shape[0] == 0:
        raise QuantizeError("cannot fit a color codebook on no colors")
    lab = srgb_to_lab(rgb)
    distinct = np.unique(lab, axis=0)
    if distinct.shape[0] <= k:
        cents = distinct
        converged = True
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        first = int(rng.integers(distinct.shape[0]))
        chosen = [first]
        dmin = np.sum((distinct - distinct[first]) ** 2, axis=1)
        for _ in range(k - 1):
            nxt = int(np.argmax(dmin))
            chosen.append(nxt)
            dmin = np.minimum(dmin, np.sum((distinct - distinct[nxt]) ** 2, axis=1))
        cents = distinct[chosen]
        prev = None
        converged = False
        for _ in range(MAX_ITER):
            d = np.sum((lab[:, None, :] - cents[None]) ** 2, axis=2)
            assign = np.argmin(d, axis=1)
            if prev is not None and np.array_equal(assign, prev):
                converged = True
                break
            prev = assign
            for j in range(cents.shape[0]):
                members = lab[assign == j]
                if members.shape[0]:
                    cents[j] = members.mean(axis=0)
    # canonical order: by L, then a, then b
    order = np.lexsort((cents[:, 2], cents[:, 1], cents[:, 0]))
    cents = cents[order]
    return ColorCodebook(
        centroids_lab=tuple(tuple(float(x) for x in c) for c in cents),
        converged=converged,
    )


@dataclass(frozen=True)
class CodebookSet:
    """Every fitted codebook the pipeline needs, persisted as one JSON file."""

    scalar: dict[str, Codebook]
    color: ColorCodebook

    def __getitem__(self, name: str) -> Codebook:
        return self.scalar[name]

    def to_json(self) -> str:
        payload = {
            "scalar": {
                name: {"k": cb.k, "centroids": list(cb.centroids)}
                for name, cb in sorted(self.scalar.items())
            },
            "color": {"k": self.color.k, "centroids_lab": [list(c) for c in self.color.centroids_lab]},
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CodebookSet":
        payload = json.loads(text)
        scalar = {
            name: Codebook(name=name, centroids=tuple(entry["centroids"]))
            for name, entry in payload["scalar"].items()
        }
        color = ColorCodebook(centroids_lab=tuple(tuple(c) for c in payload["color"]["centroids_lab"]))
        return cls(scalar=scalar, color=color)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "CodebookSet":
        return cls.from_json(Path(path).read_text())

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


def fit_codebooks(records: list[dict], seed: int = 0) -> CodebookSet:
    """Fit every codebook from raw corpus records (parsed JSONL dicts).

    Records must carry typographic raw values; context quantities are
    derived from geometry and text.
    """
    pools: dict[str, list[float]] = {name: [] for name in CONTEXT_BINS}
    for attr in GEOMETRIC:
        pools[attr] = []
    colors: list[tuple[float, float, float]] = []

    for rec in records:
        canvas = rec["canvas"]
        w, h = canvas["width"], canvas["height"]
        pools["aspect"].append(w / h)
        pools["numtext"].append(float(len(rec["elements"])))
        for el in rec["elements"]:
            pools["left"].append((el["center_x"] - el.get("box_width", 0.0) / 2.0) / w)
            pools["top"].append((el["center_y"] - el.get("box_height", 0.0) / 2.0) / h)
            pools["line_count"].append(float(el["text"].count("\n") + 1))
            pools["char_count"].append(float(len(el["text"])))
            for attr in GEOMETRIC:
                if attr not in el:
                    raise QuantizeError(f"record {rec.get('id')!r}: element missing {attr}")
                pools[attr].append(float(el[attr]))
            if "color_rgb" not in el:
                raise QuantizeError(f"record {rec.get('id')!r}: element missing color_rgb")
            colors.append(tuple(el["color_rgb"]))

    sizes = dict(CONTEXT_BINS)
    for attr in GEOMETRIC:
        sizes[attr] = 16
    scalar = {}
    for name, values in pools.items():
        cb = fit_kmeans_1d(values, sizes[name], seed=seed)
        scalar[name] = Codebook(name=name, centroids=cb.centroids, converged=cb.converged)
    color = fit_color_codebook(colors, k=64, seed=seed)
    return CodebookSet(scalar=scalar, color=color)
