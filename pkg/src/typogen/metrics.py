"""Evaluation suite: per-attribute accuracy, unit-aware MAE, CIEDE2000 color
difference, pairwise structure score, sample diversity, and the modal-bin
baseline."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .attributes import ATTRIBUTES, CARDINALITIES, GEOMETRIC, attribute_index
from .color import ciede2000, srgb_to_lab
from .docs import DesignDocument
from .quantize import CodebookSet
from .sampling import SampleSet

ACCURACY_ATTRS = ("font", "alignment", "capitalization")
MAE_UNITS = {"font_size": "pt", "angle": "deg", "letter_spacing": "pt", "line_spacing": "rel"}


class MetricsError(ValueError):
    pass


@dataclass
class StructureResult:
    scores: dict[str, float | None]  # percent, None when no eligible documents
    eligible: int
    excluded: int


@dataclass
class EvalReport:
    documents: int
    accuracy: dict[str, float]
    mae: dict[str, float]
    color_diff: float
    color_truth_source: str
    structure: dict[str, float | None]
    structure_documents: int
    structure_excluded: int
    diversity: dict[str, float] | None = None
    diversity_samples: int = 0

    def to_json_dict(self) -> dict:
        return {
            "documents": self.documents,
            "accuracy_percent": self.accuracy,
            "mae": {a: {"value": v, "unit": MAE_UNITS[a]} for a, v in self.mae.items()},
            "color_diff_ciede2000": self.color_diff,
            "color_truth_source": self.color_truth_source,
            "structure_percent": self.structure,
            "structure_documents": self.structure_documents,
            "structure_excluded": self.structure_excluded,
            "diversity_percent": self.diversity,
            "diversity_samples": self.diversity_samples,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1, sort_keys=True)

    def format_table(self) -> str:
        """Aligned plain-text table, one row per attribute."""
        headers = ["attribute", "acc%", "mae", "diff", "struct%", "divers%"]
        rows = [headers]
        for attr in ATTRIBUTES:
            acc = f"{self.accuracy[attr]:.1f}" if attr in self.accuracy else "-"
            mae = f"{self.mae[attr]:.3f} {MAE_UNITS[attr]}" if attr in self.mae else "-"
            diff = f"{self.color_diff:.3f}" if attr == "color" else "-"
            st = self.structure.get(attr)
            struct = f"{st:.1f}" if st is not None else "-"
            dv = (self.diversity or {}).get(attr)
            divers = f"{dv:.1f}" if dv is not None else "-"
            rows.append([attr, acc, mae, diff, struct, divers])
        widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
        footer = (
            f"documents: {self.documents}; structure over {self.structure_documents} "
            f"({self.structure_excluded} excluded with fewer than 2 elements)"
        )
        if self.diversity is not None:
            footer += f"; diversity over {self.diversity_samples} samples/doc"
        return "\n".join(lines + [footer])


def _check_alignment(pred: list[np.ndarray], docs: list[DesignDocument]) -> None:
    if len(pred) != len(docs):
        raise MetricsError(f"{len(pred)} predictions for {len(docs)} documents")
    for labels, doc in zip(pred, docs):
        labels = np.asarray(labels)
        if labels.shape != (doc.num_elements, len(ATTRIBUTES)):
            raise MetricsError(
                f"document {doc.id!r}: prediction shape {labels.shape}, "
                f"expected ({doc.num_elements}, {len(ATTRIBUTES)})"
            )


def _attribute_metrics_arrays(
    pred: list[np.ndarray],
    truth: list[np.ndarray],
    raws: list | None,
    codebooks: CodebookSet,
) -> tuple[dict[str, float], dict[str, float], float, str]:
    have_raw = raws is not None
    acc = {a: [] for a in ACCURACY_ATTRS}
    mae = {a: [] for a in GEOMETRIC}
    diffs = []
    for i, (labels, tr) in enumerate(zip(pred, truth)):
        labels, tr = np.asarray(labels), np.asarray(tr)
        for a in ACCURACY_ATTRS:
            k = attribute_index(a)
            acc[a].append(float(np.mean(labels[:, k] == tr[:, k])))
        for a in GEOMETRIC:
            k = attribute_index(a)
            cb = codebooks[a]
            pv = np.array([cb.decode(int(b)) for b in labels[:, k]])
            if have_raw:
                tv = np.array([getattr(raw, a) for raw in raws[i]])
            else:
                tv = np.array([cb.decode(int(b)) for b in tr[:, k]])
            mae[a].append(float(np.mean(np.abs(pv - tv))))
        kc = attribute_index("color")
        pl = np.array([codebooks.color.decode_lab(int(b)) for b in labels[:, kc]])
        if have_raw:
            tl = srgb_to_lab(np.array([raw.color_rgb for raw in raws[i]], dtype=float))
        else:
            tl = np.array([codebooks.color.decode_lab(int(b)) for b in tr[:, kc]])
        diffs.append(float(np.mean(ciede2000(pl, tl))))
    accuracy = {a: 100.0 * float(np.mean(v)) for a, v in acc.items()}
    maes = {a: float(np.mean(v)) for a, v in mae.items()}
    return accuracy, maes, float(np.mean(diffs)), "raw" if have_raw else "bins"


def attribute_metrics(
    pred: list[np.ndarray], docs: list[DesignDocument], codebooks: CodebookSet
) -> tuple[dict[str, float], dict[str, float], float, str]:
    """(accuracy %, geometric MAE, mean color diff, color truth source).

    Per-document means averaged over documents. Geometric MAE compares
    decoded centroids against raw truth values when present, decoded truth
    bins otherwise; same rule on the color side.
    """
    _check_alignment(pred, docs)
    truth = [d.label_array() for d in docs]
    raws = [d.raw_labels for d in docs] if all(d.raw_labels is not None for d in docs) else None
    return _attribute_metrics_arrays(pred, truth, raws, codebooks)


def structure_score(pred: list[np.ndarray], truth: list[np.ndarray]) -> StructureResult:
    """Pairwise equality-indicator accuracy of pred against truth, averaged
    over documents; depends only on each labeling's equality pattern."""
    if len(pred) != len(truth):
        raise MetricsError(f"{len(pred)} predictions for {len(truth)} truths")
    per_doc = {a: [] for a in ATTRIBUTES}
    eligible = 0
    excluded = 0
    for p, t in zip(pred, truth):
        p, t = np.asarray(p), np.asarray(t)
        if p.shape != t.shape:
            raise MetricsError(f"shape mismatch {p.shape} vs {t.shape}")
        T = p.shape[0]
        if T < 2:
            excluded += 1
            continue
        eligible += 1
        iu, ju = np.triu_indices(T, k=1)
        for k, a in enumerate(ATTRIBUTES):
            pe = p[iu, k] == p[ju, k]
            te = t[iu, k] == t[ju, k]
            per_doc[a].append(float(np.mean(pe == te)))
    if eligible == 0:
        return StructureResult(scores={a: None for a in ATTRIBUTES}, eligible=0, excluded=excluded)
    scores = {a: 100.0 * float(np.mean(v)) for a, v in per_doc.items()}
    return StructureResult(scores=scores, eligible=eligible, excluded=excluded)


def diversity_score(samples: SampleSet) -> dict[str, float]:
    """Per attribute: mean over elements of (unique labels across samples)/N."""
    if samples.n_samples < 1:
        raise MetricsError("need at least one sample")
    stack = np.stack(samples.samples)  # (N, T, 8)
    N, T, _ = stack.shape
    out = {}
    for k, a in enumerate(ATTRIBUTES):
        uniq = [len(np.unique(stack[:, t, k])) for t in range(T)]
        out[a] = float(np.mean(uniq)) / N
    return out


@dataclass(frozen=True)
class ModeBaseline:
    """Constant predictor emitting each attribute's modal training bin."""

    labels: tuple[int, ...]

    def predict(self, doc: DesignDocument) -> np.ndarray:
        return np.tile(np.array(self.labels, dtype=int), (doc.num_elements, 1))


def mode_baseline(train_docs: list[DesignDocument]) -> ModeBaseline:
    """Most frequent bin per attribute over all training elements, ties
    toward the lowest id."""
    pool = [d.label_array() for d in train_docs if d.num_elements]
    if not pool:
        raise MetricsError("no training labels")
    stacked = np.concatenate(pool, axis=0)
    modal = []
    for k, a in enumerate(ATTRIBUTES):
        counts = np.bincount(stacked[:, k], minlength=CARDINALITIES[a])
        modal.append(int(np.argmax(counts)))
    return ModeBaseline(labels=tuple(modal))


def report_from_bins(
    pred: list[np.ndarray], truth: list[np.ndarray], codebooks: CodebookSet
) -> EvalReport:
    """Report from bare label arrays (no documents, so no raw-value truth)."""
    if len(pred) != len(truth):
        raise MetricsError(f"{len(pred)} predictions for {len(truth)} truths")
    for p, t in zip(pred, truth):
        if np.asarray(p).shape != np.asarray(t).shape:
            raise MetricsError("prediction/truth shape mismatch")
        if np.asarray(p).ndim != 2 or np.asarray(p).shape[1] != len(ATTRIBUTES):
            raise MetricsError("label arrays must be (num_elements, 8)")
    accuracy, maes, color_diff, source = _attribute_metrics_arrays(pred, truth, None, codebooks)
    struct = structure_score(pred, truth)
    return EvalReport(
        documents=len(pred),
        accuracy=accuracy,
        mae=maes,
        color_diff=color_diff,
        color_truth_source=source,
        structure=struct.scores,
        structure_documents=struct.eligible,
        structure_excluded=struct.excluded,
    )


def build_report(
    pred: list[np.ndarray],
    docs: list[DesignDocument],
    codebooks: CodebookSet,
    sample_sets: list[SampleSet] | None = None,
) -> EvalReport:
    accuracy, maes, color_diff, source = attribute_metrics(pred, docs, codebooks)
    struct = structure_score(pred, [d.label_array() for d in docs])
    diversity = None
    n_div = 0
    if sample_sets:
        per_doc = [diversity_score(ss) for ss in sample_sets]
        diversity = {a: 100.0 * float(np.mean([d[a] for d in per_doc])) for a in ATTRIBUTES}
        n_div = sample_sets[0].n_samples
    return EvalReport(
        documents=len(docs),
        accuracy=accuracy,
        mae=maes,
        color_diff=color_diff,
        color_truth_source=source,
        structure=struct.scores,
        structure_documents=struct.eligible,
        structure_excluded=struct.excluded,
        diversity=diversity,
        diversity_samples=n_div,
    )
