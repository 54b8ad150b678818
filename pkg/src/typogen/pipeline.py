"""Orchestration shared by the CLI, the service wiring, and the trend
tests: batch prediction, evaluation with optional sampling diversity, and
the p-sweep that backs the quality/diversity CSV."""
from __future__ import annotations

import numpy as np

from .attributes import ATTRIBUTES, GEOMETRIC
from .docs import DesignDocument
from .metrics import (
    ACCURACY_ATTRS,
    EvalReport,
    _attribute_metrics_arrays,
    build_report,
    diversity_score,
    structure_score,
)
from .model import EncodedDoc, TypographyModel
from .quantize import CodebookSet
from .sampling import SampleSet, SamplingConfig, StructureClusters, predict_top1, sample


def encode_all(model: TypographyModel, docs: list[DesignDocument]) -> dict[str, EncodedDoc]:
    return {doc.id: model.encode_context(doc) for doc in docs}


def predict_documents(
    model: TypographyModel,
    docs: list[DesignDocument],
    codebooks: CodebookSet,
    encoded: dict[str, EncodedDoc] | None = None,
) -> list[tuple[np.ndarray, StructureClusters]]:
    encoded = encoded or encode_all(model, docs)
    return [predict_top1(model, doc, codebooks, encoded[doc.id]) for doc in docs]


def evaluate_documents(
    model: TypographyModel,
    docs: list[DesignDocument],
    codebooks: CodebookSet,
    n_samples: int = 0,
    mode: str = "plain",
    seed: int = 0,
    p_k: dict[str, float] | None = None,
) -> EvalReport:
    """Top-1 quality plus, when n_samples > 0, sampling diversity."""
    encoded = encode_all(model, docs)
    preds = [lab for lab, _ in predict_documents(model, docs, codebooks, encoded)]
    sets = None
    if n_samples > 0:
        cfg = SamplingConfig(p_k=p_k or {}, mode=mode, n_samples=n_samples, seed=seed)
        sets = [sample(model, doc, cfg, codebooks, encoded[doc.id]) for doc in docs]
    return build_report(preds, docs, codebooks, sets)


def sweep_metrics(
    model: TypographyModel,
    docs: list[DesignDocument],
    codebooks: CodebookSet,
    p_values: list[float],
    modes: tuple[str, ...] = ("plain", "structure_preserved"),
    n_samples: int = 10,
    seed: int = 0,
    sweep_attrs: tuple[str, ...] = ("font", "color", "alignment", "capitalization"),
) -> list[dict]:
    """One row per (p, mode, attribute): sample quality, structure score of
    the samples against truth, and diversity.

    The swept p applies to sweep_attrs; geometric attributes keep their
    fixed default. Quality is the attribute's own metric averaged over
    samples (accuracy for categoricals, MAE for geometrics, CIEDE2000 for
    color). The top-1 structure is computed once per document and reused
    across every (p, mode) cell, which also keeps the random draws aligned
    for fair cross-p comparisons.
    """
    encoded = encode_all(model, docs)
    structures = {doc.id: predict_top1(model, doc, codebooks, encoded[doc.id])[1] for doc in docs}
    truth = [doc.label_array() for doc in docs]
    rows: list[dict] = []
    for mode in modes:
        for p in p_values:
            cfg = SamplingConfig(
                p_k={a: p for a in sweep_attrs}, mode=mode, n_samples=n_samples, seed=seed
            )
            sets: list[SampleSet] = [
                sample(model, doc, cfg, codebooks, encoded[doc.id], structure=structures[doc.id])
                for doc in docs
            ]
            quality_acc: dict[str, list] = {a: [] for a in ATTRIBUTES}
            struct_acc: dict[str, list] = {a: [] for a in ATTRIBUTES}
            raws = [doc.raw_labels for doc in docs]
            if any(r is None for r in raws):
                raws = None
            for s in range(n_samples):
                preds = [ss.samples[s] for ss in sets]
                accuracy, maes, diff, _ = _attribute_metrics_arrays(preds, truth, raws, codebooks)
                st = structure_score(preds, truth)
                for a in ATTRIBUTES:
                    if a in ACCURACY_ATTRS:
                        quality_acc[a].append(accuracy[a])
                    elif a in GEOMETRIC:
                        quality_acc[a].append(maes[a])
                    else:
                        quality_acc[a].append(diff)
                    if st.scores[a] is not None:
                        struct_acc[a].append(st.scores[a])
            per_doc_div = [diversity_score(ss) for ss in sets]
            for a in ATTRIBUTES:
                metric = "accuracy" if a in ACCURACY_ATTRS else ("mae" if a in GEOMETRIC else "ciede2000")
                rows.append(
                    {
                        "p": p,
                        "mode": mode,
                        "attribute": a,
                        "quality_metric": metric,
                        "quality": float(np.mean(quality_acc[a])),
                        "structure": float(np.mean(struct_acc[a])) if struct_acc[a] else float("nan"),
                        "diversity": 100.0 * float(np.mean([d[a] for d in per_doc_div])),
                    }
                )
    return rows
