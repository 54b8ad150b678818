"""HTTP service: wire validation, element-order round-tripping, error mapping."""
import base64

import pytest
from fastapi.testclient import TestClient

from typogen.corpus import GeneratorConfig, bin_documents, generate_synthetic
from typogen.docs import document_to_record
from typogen.model import ModelConfig, TypographyModel
from typogen.quantize import fit_codebooks
from typogen.service import create_app, load_runtime


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    root = tmp_path_factory.mktemp("service")
    docs = generate_synthetic(GeneratorConfig(num_documents=10, seed=13))
    cb = fit_codebooks([document_to_record(d) for d in docs], seed=0)
    bin_documents(docs, cb)
    cb_path = root / "cb.json"
    cb.save(cb_path)
    model = TypographyModel(ModelConfig(embed_dim=16, ff_dim=24, heads=2,
                                        encoder_blocks=1, decoder_blocks=1, seed=4))
    ckpt = root / "model.tgn"
    model.save(ckpt, cb)
    app = create_app(runtime=load_runtime(ckpt, cb_path))
    with TestClient(app) as c:
        yield c


def payload(elements=None, **canvas_extra):
    els = elements or [
        {"text": "Grand Opening", "center_x": 200.0, "center_y": 60.0},
        {"text": "saturday march 7", "center_x": 200.0, "center_y": 150.0},
        {"text": "128 Mill Road", "center_x": 200.0, "center_y": 240.0},
    ]
    return {"document": {"canvas": {"width": 400, "height": 300, **canvas_extra},
                         "elements": els}}


# ---------------- health and meta ----------------


def test_health_reports_hashes(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert len(body["model_hash"]) == 64
    assert len(body["codebook_hash"]) == 64


def test_unloaded_app_is_503():
    bare = TestClient(create_app())
    assert bare.get("/health").status_code == 503
    r = bare.post("/predict", json=payload())
    assert r.status_code == 503
    assert r.json()["detail"] == "model not loaded"


def test_meta_shape(client):
    meta = client.get("/meta").json()
    assert len(meta["attributes"]) == 8
    assert meta["cardinalities"]["font"] == 261
    assert all(meta["valid_counts"][a] <= meta["cardinalities"][a] for a in meta["attributes"])
    assert len(meta["fonts"]) == 16
    assert len(meta["colors"]) == meta["valid_counts"]["color"]
    assert all(c.startswith("#") and len(c) == 7 for c in meta["colors"])
    assert "structure_preserved" in meta["modes"]
    assert len(meta["centroids"]["font_size"]) == meta["valid_counts"]["font_size"]


# ---------------- predict ----------------


def test_predict_shape(client):
    body = client.post("/predict", json=payload()).json()
    assert len(body["labels"]) == 3
    assert all(len(row) == 8 for row in body["labels"])
    assert set(body["clusters"]) == {
        "font", "color", "alignment", "capitalization",
        "font_size", "angle", "letter_spacing", "line_spacing"}
    assert all(len(ids) == 3 for ids in body["clusters"].values())


def test_predict_answers_in_request_order(client):
    els = payload()["document"]["elements"]
    forward = client.post("/predict", json=payload(elements=els)).json()
    backward = client.post("/predict", json=payload(elements=els[::-1])).json()
    assert backward["labels"] == forward["labels"][::-1]
    for attr in forward["clusters"]:
        assert backward["clusters"][attr] == forward["clusters"][attr][::-1]


def test_predict_accepts_background(client):
    bg = {"width": 2, "height": 2, "rgb_base64": base64.b64encode(b"\x20" * 12).decode()}
    r = client.post("/predict", json=payload(background=bg))
    assert r.status_code == 200


# ---------------- sample ----------------


def test_sample_payload(client):
    req = {**payload(), "n": 2, "seed": 3}
    body = client.post("/sample", json=req).json()
    assert len(body["samples"]) == 2
    assert all(len(s) == 3 and len(s[0]) == 8 for s in body["samples"])
    assert all(len(ids) == 3 for ids in body["clusters"].values())
    assert len(body["svgs"]) == 2
    assert all(svg.startswith("<svg") for svg in body["svgs"])
    assert "data:image/png" in body["svgs"][0]  # embed_background defaults on


def test_sample_linked_background(client):
    req = {**payload(), "embed_background": False}
    body = client.post("/sample", json=req).json()
    assert "data:image/png" not in body["svgs"][0]


def test_sample_mode_alias(client):
    req = {**payload(), "mode": "structure", "seed": 5}
    canonical = {**payload(), "mode": "structure_preserved", "seed": 5}
    assert client.post("/sample", json=req).json() == \
        client.post("/sample", json=canonical).json()


def test_sample_is_deterministic(client):
    req = {**payload(), "n": 3, "seed": 9, "p_k": {"font": 0.5}}
    assert client.post("/sample", json=req).json() == client.post("/sample", json=req).json()


def test_sample_lock_pins_cluster(client):
    req = {**payload(), "n": 4, "seed": 2,
           "locks": [{"attribute": "color", "cluster": 0, "label": 3}]}
    body = client.post("/sample", json=req).json()
    members = [i for i, c in enumerate(body["clusters"]["color"]) if c == 0]
    assert members
    for s in body["samples"]:
        for i in members:
            assert s[i][1] == 3  # color is attribute column 1


# ---------------- validation and error mapping ----------------


@pytest.mark.parametrize(
    "mutate",
    [
        lambda req: req.update(n=0),
        lambda req: req.update(n=65),
        lambda req: req["document"].update(flavor="mint"),
        lambda req: req["document"]["elements"][0].update(text=""),
        lambda req: req["document"].update(elements=[]),
    ],
)
def test_pydantic_rejections_are_400_with_loc(client, mutate):
    req = {**payload(), "n": 1}
    mutate(req)
    r = client.post("/sample", json=req)
    assert r.status_code == 400
    detail = r.json()["detail"]
    assert isinstance(detail, list)
    assert all({"loc", "msg"} <= set(err) for err in detail)


@pytest.mark.parametrize(
    "extra,fragment",
    [
        ({"locks": [{"attribute": "weight", "cluster": 0, "label": 0}]}, "attribute"),
        ({"locks": [{"attribute": "font", "cluster": 99, "label": 0}]}, "cluster"),
        ({"locks": [{"attribute": "font", "cluster": 0, "label": 100000}]}, "label"),
        ({"p_k": {"font": 1.5}}, "p"),
        ({"p_k": {"font": 0.0}}, "p"),
        ({"mode": "freestyle"}, "mode"),
    ],
)
def test_domain_rejections_are_400_strings(client, extra, fragment):
    r = client.post("/sample", json={**payload(), **extra})
    assert r.status_code == 400
    assert fragment in r.json()["detail"]


def test_bad_base64_is_400(client):
    bg = {"width": 2, "height": 2, "rgb_base64": "@@not-base64@@"}
    r = client.post("/predict", json=payload(background=bg))
    assert r.status_code == 400
    assert "base64" in r.json()["detail"]


def test_wrong_byte_count_is_400(client):
    bg = {"width": 2, "height": 2, "rgb_base64": base64.b64encode(b"\x00" * 5).decode()}
    r = client.post("/predict", json=payload(background=bg))
    assert r.status_code == 400
    assert "expected 12" in r.json()["detail"]


# ---------------- metrics and reload ----------------


def test_metrics_identity(client):
    docs = [[[0] * 8, [0] * 8], [[0] * 8, [0] * 8, [0] * 8]]
    body = client.post("/metrics", json={"pred": docs, "truth": docs}).json()
    assert all(v == 100.0 for v in body["accuracy_percent"].values())
    assert all(entry["value"] == 0.0 for entry in body["mae"].values())
    assert body["color_diff_ciede2000"] == 0.0
    assert body["documents"] == 2


def test_metrics_shape_mismatch_is_400(client):
    r = client.post("/metrics", json={"pred": [[[0] * 8]], "truth": [[[0] * 8], [[0] * 8]]})
    assert r.status_code == 400


def test_reload_swaps_snapshot(client):
    before = client.get("/health").json()
    body = client.post("/reload").json()
    assert body["status"] == "reloaded"
    assert body["model_hash"] == before["model_hash"]
    assert client.get("/health").json() == before


# ---------------- static mount ----------------


def test_static_dir_served(tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><p>ui</p>")
    app = create_app(static_dir=tmp_path)
    with TestClient(app) as c:
        r = c.get("/")
        assert r.status_code == 200
        assert "ui" in r.text
        assert c.get("/health").status_code == 503  # API routes still win
