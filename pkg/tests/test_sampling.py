"""Nucleus filter, label-linkage clusters, and the three sampling modes."""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from typogen.attributes import ATTRIBUTES, CARDINALITIES, GEOMETRIC
from typogen.corpus import GeneratorConfig, bin_documents, generate_synthetic
from typogen.docs import document_to_record
from typogen.model import ModelConfig, TypographyModel
from typogen.quantize import fit_codebooks
from typogen.sampling import (
    DEFAULT_P,
    SamplingConfig,
    SamplingError,
    StructureClusters,
    cluster_by_linkage,
    predict_top1,
    sample,
    top_p_filter,
    valid_label_counts,
)


@pytest.fixture(scope="module")
def world():
    docs = generate_synthetic(GeneratorConfig(num_documents=6, seed=11))
    cb = fit_codebooks([document_to_record(d) for d in docs], seed=0)
    docs = bin_documents(docs, cb)
    # untrained weights are fine here: logits only need to be deterministic
    model = TypographyModel(
        ModelConfig(embed_dim=16, ff_dim=32, heads=2, encoder_blocks=1,
                    decoder_blocks=1, seed=3, max_elements=12)
    )
    return docs, cb, model


@pytest.fixture(scope="module")
def rich(world):
    docs, cb, model = world
    doc = max(docs, key=lambda d: d.num_elements)
    assert doc.num_elements >= 4
    return doc, cb, model


# ---------------- top_p_filter ----------------


def test_filter_worked_example():
    out = top_p_filter(np.array([0.5, 0.3, 0.2]), 0.7)
    assert np.max(np.abs(out - np.array([0.625, 0.375, 0.0]))) <= 1e-12


def test_filter_p_one_is_identity():
    rng = np.random.default_rng(0)
    probs = rng.random(17)
    probs /= probs.sum()
    assert np.allclose(top_p_filter(probs, 1.0), probs)


def test_filter_boundary_is_inclusive():
    # cumulative mass reaches p exactly at the first entry
    out = top_p_filter(np.array([0.6, 0.4]), 0.6)
    assert np.allclose(out, [1.0, 0.0])


def test_filter_ties_prefer_lower_label():
    out = top_p_filter(np.array([0.25, 0.25, 0.25, 0.25]), 0.5)
    assert np.allclose(out, [0.5, 0.5, 0.0, 0.0])
    out = top_p_filter(np.array([0.3, 0.4, 0.3]), 0.5)
    assert np.allclose(out, [0.3 / 0.7, 0.4 / 0.7, 0.0])


@pytest.mark.parametrize(
    "probs,p",
    [
        ([0.5, 0.5], 0.0),
        ([0.5, 0.5], -0.2),
        ([0.5, 0.5], 1.0001),
        ([0.7, 0.4], 0.5),  # not normalized
        ([-0.1, 1.1], 0.5),
        ([], 0.5),
        ([[0.5, 0.5]], 0.5),
    ],
)
def test_filter_rejections(probs, p):
    with pytest.raises(SamplingError):
        top_p_filter(np.array(probs, dtype=float), p)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 40),
    st.integers(0, 10_000),
    st.floats(0.01, 1.0),
)
def test_filter_properties(size, seed, p):
    rng = np.random.default_rng(seed)
    probs = rng.random(size) + 1e-3
    probs /= probs.sum()
    out = top_p_filter(probs, p)
    kept = out > 0
    assert np.isclose(out.sum(), 1.0)
    # kept mass reached p, and the set is a prefix in probability order
    assert probs[kept].sum() >= p - 1e-9
    if not kept.all():
        assert probs[~kept].max() <= probs[kept].min() + 1e-12
    # minimality: removing the least likely kept entry drops below p
    assert probs[kept].sum() - probs[kept].min() < p + 1e-9
    assert kept[np.argmax(probs)]


# ---------------- clusters ----------------


def test_cluster_ids_follow_first_occurrence():
    clusters = cluster_by_linkage({"font": [3, 5, 3, 7], "color": [1, 1, 1, 1]})
    assert clusters.assignment["font"] == (0, 1, 0, 2)
    assert clusters.assignment["color"] == (0, 0, 0, 0)
    assert clusters.num_clusters("font") == 3
    assert clusters.members("font", 0) == (0, 2)
    assert clusters.members("font", 2) == (3,)


def test_cluster_from_label_array():
    labels = np.zeros((3, len(ATTRIBUTES)), dtype=int)
    labels[:, 0] = [9, 9, 2]
    clusters = cluster_by_linkage(labels)
    assert clusters.assignment["font"] == (0, 0, 1)
    assert set(clusters.assignment) == set(ATTRIBUTES)
    assert clusters.to_json_dict()["font"] == [0, 0, 1]


def test_empty_assignment():
    clusters = StructureClusters(assignment={"font": ()})
    assert clusters.num_clusters("font") == 0


# ---------------- config ----------------


def test_config_merges_defaults():
    cfg = SamplingConfig(p_k={"font": 0.5})
    assert cfg.p_k["font"] == 0.5
    assert cfg.p_k["color"] == 0.9
    for attr in GEOMETRIC:
        assert cfg.p_k[attr] == 0.1
    assert set(cfg.p_k) == set(ATTRIBUTES)
    assert SamplingConfig().p_k == DEFAULT_P


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "weird"},
        {"n_samples": 0},
        {"p_k": {"weird": 0.5}},
        {"p_k": {"font": 0.0}},
        {"p_k": {"font": 1.5}},
    ],
)
def test_config_rejections(kwargs):
    with pytest.raises(SamplingError):
        SamplingConfig(**kwargs)


# ---------------- counts ----------------


def test_valid_label_counts(world):
    _, cb, _ = world
    bare = valid_label_counts(None)
    assert bare == CARDINALITIES
    counts = valid_label_counts(cb)
    assert counts["font"] == 261
    assert counts["alignment"] == 3
    assert counts["color"] == len(cb.color.centroids_lab) <= 64
    for attr in GEOMETRIC:
        assert counts[attr] == len(cb[attr].centroids) <= 16


# ---------------- modes ----------------


def test_top1_mode_matches_predict(rich):
    doc, cb, model = rich
    labels, clusters = predict_top1(model, doc, cb)
    assert labels.shape == (doc.num_elements, len(ATTRIBUTES))
    ss = sample(model, doc, SamplingConfig(mode="top1", n_samples=3), cb)
    for s in ss.samples:
        assert np.array_equal(s, labels)
    assert ss.predicted.assignment == clusters.assignment


def test_masked_bins_never_predicted(rich):
    doc, cb, model = rich
    labels, _ = predict_top1(model, doc, cb)
    counts = valid_label_counts(cb)
    for k, attr in enumerate(ATTRIBUTES):
        assert labels[:, k].max() < counts[attr]


def test_sampling_is_reproducible(rich):
    doc, cb, model = rich
    cfg = SamplingConfig(mode="plain", n_samples=3, seed=5)
    a = sample(model, doc, cfg, cb)
    b = sample(model, doc, cfg, cb)
    for s, t in zip(a.samples, b.samples):
        assert np.array_equal(s, t)
    assert a.to_json() == b.to_json()


def test_seed_changes_draws(rich):
    doc, cb, model = rich
    p = {a: 0.9999 for a in ATTRIBUTES}
    a = sample(model, doc, SamplingConfig(p_k=p, mode="plain", n_samples=4, seed=0), cb)
    b = sample(model, doc, SamplingConfig(p_k=p, mode="plain", n_samples=4, seed=1), cb)
    assert any(not np.array_equal(s, t) for s, t in zip(a.samples, b.samples))


def test_per_attribute_streams_are_independent(rich):
    # changing font's p cannot disturb the other attributes' first-element
    # draws; later elements may shift through the autoregressive context
    doc, cb, model = rich
    a = sample(model, doc, SamplingConfig(p_k={"font": 0.999}, mode="plain", n_samples=4, seed=2), cb)
    b = sample(model, doc, SamplingConfig(p_k={"font": 0.2}, mode="plain", n_samples=4, seed=2), cb)
    kf = ATTRIBUTES.index("font")
    for s, t in zip(a.samples, b.samples):
        for k in range(len(ATTRIBUTES)):
            if k != kf:
                assert s[0, k] == t[0, k]


def test_tiny_p_collapses_to_top1(rich):
    doc, cb, model = rich
    labels, _ = predict_top1(model, doc, cb)
    cfg = SamplingConfig(p_k={a: 1e-9 for a in ATTRIBUTES}, mode="plain", n_samples=2, seed=9)
    ss = sample(model, doc, cfg, cb)
    for s in ss.samples:
        assert np.array_equal(s, labels)


def test_structure_preserved_copies_within_clusters(rich):
    doc, cb, model = rich
    p = {a: 0.9999 for a in ATTRIBUTES}
    ss = sample(model, doc, SamplingConfig(p_k=p, mode="structure_preserved", n_samples=5, seed=1), cb)
    predicted = ss.predicted
    assert predicted is not None
    for s in ss.samples:
        for k, attr in enumerate(ATTRIBUTES):
            ids = predicted.assignment[attr]
            for cluster in range(predicted.num_clusters(attr)):
                members = [i for i, c in enumerate(ids) if c == cluster]
                assert len({int(s[i, k]) for i in members}) == 1


def test_realized_clusters_coarsen_predicted(rich):
    doc, cb, model = rich
    p = {a: 0.9999 for a in ATTRIBUTES}
    ss = sample(model, doc, SamplingConfig(p_k=p, mode="structure_preserved", n_samples=5, seed=4), cb)
    for s, realized in zip(ss.samples, ss.clusters):
        assert realized.assignment == cluster_by_linkage(s).assignment
        for attr in ATTRIBUTES:
            pred_ids = ss.predicted.assignment[attr]
            real_ids = realized.assignment[attr]
            for i in range(len(pred_ids)):
                for j in range(i + 1, len(pred_ids)):
                    if pred_ids[i] == pred_ids[j]:
                        assert real_ids[i] == real_ids[j]


def test_plain_mode_without_locks_skips_structure(rich):
    doc, cb, model = rich
    ss = sample(model, doc, SamplingConfig(mode="plain", n_samples=1), cb)
    assert ss.predicted is None
    assert len(ss.clusters) == 1


def test_structure_override_is_honored(rich):
    doc, cb, model = rich
    T = doc.num_elements
    one_cluster = StructureClusters(assignment={a: (0,) * T for a in ATTRIBUTES})
    ss = sample(
        model, doc,
        SamplingConfig(p_k={a: 0.9999 for a in ATTRIBUTES}, mode="structure_preserved", n_samples=3, seed=7),
        cb, structure=one_cluster,
    )
    assert ss.predicted is one_cluster
    for s in ss.samples:
        for k in range(len(ATTRIBUTES)):
            assert len(np.unique(s[:, k])) == 1


@pytest.mark.parametrize("mode", ["plain", "structure_preserved", "top1"])
def test_locks_apply_in_every_mode(rich, mode):
    doc, cb, model = rich
    counts = valid_label_counts(cb)
    locks = {("font", 0): counts["font"] - 1, ("color", 0): counts["color"] - 1}
    cfg = SamplingConfig(mode=mode, n_samples=3, seed=2, locks=locks)
    ss = sample(model, doc, cfg, cb)
    assert ss.predicted is not None  # locks force a structure pass
    for (attr, cluster), label in locks.items():
        k = ATTRIBUTES.index(attr)
        members = ss.predicted.members(attr, cluster)
        assert members
        for s in ss.samples:
            for i in members:
                assert s[i, k] == label


@pytest.mark.parametrize(
    "locks",
    [
        {("weird", 0): 1},
        {("font", 999): 1},
        {("font", 0): -1},
        {("font", 0): 100_000},
    ],
)
def test_lock_rejections(rich, locks):
    doc, cb, model = rich
    with pytest.raises(SamplingError):
        sample(model, doc, SamplingConfig(mode="plain", n_samples=1, locks=locks), cb)


# ---------------- SampleSet ----------------


def test_sampleset_json_shape(rich):
    doc, cb, model = rich
    ss = sample(model, doc, SamplingConfig(mode="structure_preserved", n_samples=2, seed=0), cb)
    assert ss.n_samples == 2
    payload = json.loads(ss.to_json())
    assert payload == ss.to_json_dict()
    assert payload["doc_id"] == doc.id
    assert payload["mode"] == "structure_preserved"
    assert payload["seed"] == 0
    assert set(payload["p_k"]) == set(ATTRIBUTES)
    assert len(payload["samples"]) == 2
    assert len(payload["clusters"]) == 2
    for s in payload["samples"]:
        assert len(s) == doc.num_elements
        assert all(len(row) == len(ATTRIBUTES) for row in s)
