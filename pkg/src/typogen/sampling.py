"""Top-1 prediction, nucleus sampling, and structure-preserved resampling.

Plain sampling draws every attribute of every element independently from the
top-p filtered conditional. Structure-preserved sampling first takes the
top-1 assignment, clusters elements per attribute by label equality, then
resamples so that only the first-visited element of each (attribute,
cluster) draws and later members copy its label. Both modes condition the
autoregressive context on the finally assigned labels. Locks pre-assign a
label to an (attribute, cluster) before any drawing, in every mode.

Randomness is split into one stream per (seed, sample index, attribute), so
adjusting one attribute's p leaves the other attributes' draws untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attributes import ATTRIBUTES, CARDINALITIES, GEOMETRIC, attribute_index
from .docs import DesignDocument
from .model import EncodedDoc, TypographyModel
from .quantize import CodebookSet

MODES = ("plain", "structure_preserved", "top1")

DEFAULT_P = {name: 0.1 if name in GEOMETRIC else 0.9 for name in ATTRIBUTES}


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingConfig:
    p_k: dict[str, float] = field(default_factory=dict)
    mode: str = "structure_preserved"
    n_samples: int = 1
    seed: int = 0
    locks: dict[tuple[str, int], int] | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise SamplingError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.n_samples < 1:
            raise SamplingError("n_samples must be >= 1")
        unknown = set(self.p_k) - set(ATTRIBUTES)
        if unknown:
            raise SamplingError(f"unknown attributes in p_k: {sorted(unknown)}")
        merged = dict(DEFAULT_P)
        merged.update(self.p_k)
        for name, p in merged.items():
            if not (0.0 < p <= 1.0):
                raise SamplingError(f"p for {name} must be in (0, 1], got {p}")
        object.__setattr__(self, "p_k", merged)


@dataclass(frozen=True)
class StructureClusters:
    """Per-attribute partition of elements, cluster ids numbered by first
    occurrence in raster order (0-based)."""

    assignment: dict[str, tuple[int, ...]]

    def num_clusters(self, attr: str) -> int:
        ids = self.assignment[attr]
        return max(ids) + 1 if ids else 0

    def members(self, attr: str, cluster: int) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.assignment[attr]) if c == cluster)

    def to_json_dict(self) -> dict[str, list[int]]:
        return {attr: list(ids) for attr, ids in self.assignment.items()}


def cluster_by_linkage(labels: dict[str, list[int]] | np.ndarray) -> StructureClusters:
    """Equality-partition per attribute; ids follow first occurrence."""
    if isinstance(labels, np.ndarray):
        labels = {name: labels[:, k].tolist() for k, name in enumerate(ATTRIBUTES)}
    assignment = {}
    for attr, vals in labels.items():
        seen: dict[int, int] = {}
        ids = []
        for v in vals:
            if v not in seen:
                seen[v] = len(seen)
            ids.append(seen[v])
        assignment[attr] = tuple(ids)
    return StructureClusters(assignment=assignment)


def top_p_filter(probs: np.ndarray, p: float) -> np.ndarray:
    """Keep the smallest descending-probability prefix (ties by ascending
    label id) whose cumulative mass reaches p, then renormalize."""
    if not (0.0 < p <= 1.0):
        raise SamplingError(f"p must be in (0, 1], got {p}")
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise SamplingError("probs must be a non-empty vector")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-6:
        raise SamplingError("probs is not a distribution")
    order = np.lexsort((np.arange(probs.size), -probs))
    cum = np.cumsum(probs[order])
    cut = min(int(np.searchsorted(cum, p, side="left")), probs.size - 1)
    keep = order[: cut + 1]
    out = np.zeros_like(probs)
    out[keep] = probs[keep] / probs[keep].sum()
    return out


def valid_label_counts(codebooks: CodebookSet | None) -> dict[str, int]:
    """Number of decodable bins per attribute.

    Codebooks may converge to fewer centroids than the head size; bins past
    the fitted count are masked out of prediction and sampling.
    """
    counts = dict(CARDINALITIES)
    if codebooks is not None:
        counts["color"] = len(codebooks.color.centroids_lab)
        for attr in GEOMETRIC:
            counts[attr] = len(codebooks[attr].centroids)
    return counts


def _masked(logits: np.ndarray, count: int) -> np.ndarray:
    if count >= logits.size:
        return logits
    out = logits.copy()
    out[count:] = -np.inf
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def _draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    if idx >= probs.size or probs[idx] == 0.0:
        idx = int(np.flatnonzero(probs)[-1])
    return idx


def predict_top1(
    model: TypographyModel,
    doc: DesignDocument,
    codebooks: CodebookSet | None = None,
    encoded: EncodedDoc | None = None,
) -> tuple[np.ndarray, StructureClusters]:
    """Autoregressive argmax (ties toward the lowest label id) plus the
    label-linkage clusters of the result."""
    encoded = encoded or model.encode_context(doc)
    counts = valid_label_counts(codebooks)
    labels = np.zeros((doc.num_elements, len(ATTRIBUTES)), dtype=int)
    prev: list[tuple[int, ...]] = []
    for t in range(1, doc.num_elements + 1):
        logits = model.decode_logits(encoded, prev, t)
        row = tuple(int(np.argmax(_masked(logits[a], counts[a]))) for a in ATTRIBUTES)
        labels[t - 1] = row
        prev.append(row)
    return labels, cluster_by_linkage(labels)


@dataclass(frozen=True)
class SampleSet:
    doc_id: str
    mode: str
    p_k: dict[str, float]
    seed: int
    samples: tuple[np.ndarray, ...]
    clusters: tuple[StructureClusters, ...]  # realized per sample
    predicted: StructureClusters | None  # conditioning structure, if one was computed

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "mode": self.mode,
            "p_k": {a: self.p_k[a] for a in ATTRIBUTES},
            "seed": self.seed,
            "clusters": [c.to_json_dict() for c in self.clusters],
            "samples": [s.tolist() for s in self.samples],
        }

    def to_json(self) -> str:
        import json

        return json.dumps(self.to_json_dict(), indent=1, sort_keys=True)


def _validate_locks(cfg: SamplingConfig, predicted: StructureClusters, counts: dict[str, int]) -> dict[str, dict[int, int]]:
    locked: dict[str, dict[int, int]] = {a: {} for a in ATTRIBUTES}
    for (attr, cluster), label in (cfg.locks or {}).items():
        if attr not in ATTRIBUTES:
            raise SamplingError(f"lock references unknown attribute {attr!r}")
        if not (0 <= cluster < predicted.num_clusters(attr)):
            raise SamplingError(
                f"lock references unknown cluster {cluster} for {attr} "
                f"(prediction has {predicted.num_clusters(attr)})"
            )
        if not (0 <= int(label) < counts[attr]):
            raise SamplingError(f"lock label {label} out of range for {attr}")
        locked[attr][cluster] = int(label)
    return locked


def sample(
    model: TypographyModel,
    doc: DesignDocument,
    cfg: SamplingConfig,
    codebooks: CodebookSet | None = None,
    encoded: EncodedDoc | None = None,
    structure: StructureClusters | None = None,
) -> SampleSet:
    """Draw cfg.n_samples label assignments for doc under cfg.mode.

    `structure` substitutes the conditioning clusters for
    structure-preserved mode (default: clusters of the top-1 prediction).
    """
    encoded = encoded or model.encode_context(doc)
    counts = valid_label_counts(codebooks)
    T = doc.num_elements

    need_structure = cfg.mode != "plain" or bool(cfg.locks)
    predicted: StructureClusters | None = structure
    if need_structure and predicted is None:
        _, predicted = predict_top1(model, doc, codebooks, encoded)
    locked = _validate_locks(cfg, predicted, counts) if predicted is not None else {a: {} for a in ATTRIBUTES}

    copy_within_cluster = cfg.mode == "structure_preserved"
    samples: list[np.ndarray] = []
    realized: list[StructureClusters] = []
    for s in range(cfg.n_samples):
        rngs = {
            a: np.random.default_rng(np.random.SeedSequence([cfg.seed, s, attribute_index(a)]))
            for a in ATTRIBUTES
        }
        assigned: dict[str, dict[int, int]] = {a: dict(locked[a]) for a in ATTRIBUTES}
        labels = np.zeros((T, len(ATTRIBUTES)), dtype=int)
        prev: list[tuple[int, ...]] = []
        for t in range(1, T + 1):
            logits = model.decode_logits(encoded, prev, t)
            row = []
            for k, attr in enumerate(ATTRIBUTES):
                cluster = predicted.assignment[attr][t - 1] if predicted is not None else None
                if cluster is not None and cluster in assigned[attr]:
                    y = assigned[attr][cluster]
                else:
                    masked = _masked(logits[attr], counts[attr])
                    if cfg.mode == "top1":
                        y = int(np.argmax(masked))
                    else:
                        probs = top_p_filter(_softmax(masked), cfg.p_k[attr])
                        y = _draw(probs, rngs[attr])
                    if cluster is not None and copy_within_cluster:
                        assigned[attr][cluster] = y
                row.append(y)
            labels[t - 1] = row
            prev.append(tuple(row))
        samples.append(labels)
        realized.append(cluster_by_linkage(labels))

    return SampleSet(
        doc_id=doc.id,
        mode=cfg.mode,
        p_k=dict(cfg.p_k),
        seed=cfg.seed,
        samples=tuple(samples),
        clusters=tuple(realized),
        predicted=predicted,
    )
