"""HTTP service around one immutable model snapshot.

Requests carry documents in the client's element order; the model always
consumes raster order internally, and every response is permuted back, so
callers never see the reordering. Reload swaps the whole snapshot at once;
in-flight requests keep the one they started with.
"""
from __future__ import annotations

import base64
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .attributes import ALIGNMENTS, ATTRIBUTES, CAPITALIZATIONS, CARDINALITIES
from .docs import (
    CorpusError,
    DesignDocument,
    TextElement,
    document_from_record,
    raster_order,
    validate_record,
)
from .metrics import MetricsError, report_from_bins
from .model import ModelError, TypographyModel
from .quantize import CodebookSet, QuantizeError
from .raster import Raster, RasterError
from .render import DEFAULT_FONT_MAP, RenderError, render_document
from .sampling import (
    MODES,
    SamplingConfig,
    SamplingError,
    predict_top1,
    sample,
    valid_label_counts,
)

_INLINE = "<inline>"
MODE_ALIASES = {"structure": "structure_preserved"}


class ModelNotLoaded(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelRuntime:
    model: TypographyModel
    codebooks: CodebookSet
    checkpoint_path: str
    codebooks_path: str

    def hashes(self) -> dict[str, str]:
        return {
            "model_hash": self.model.params_hash(),
            "codebook_hash": self.codebooks.content_hash(),
        }


def load_runtime(checkpoint: str | Path, codebooks: str | Path) -> ModelRuntime:
    cb = CodebookSet.load(codebooks)
    model = TypographyModel.load(checkpoint, cb)
    return ModelRuntime(
        model=model, codebooks=cb, checkpoint_path=str(checkpoint), codebooks_path=str(codebooks)
    )


# ---------------- wire types ----------------


class WireBackground(BaseModel):
    model_config = ConfigDict(extra="forbid")
    width: int = Field(ge=1, le=4096)
    height: int = Field(ge=1, le=4096)
    rgb_base64: str


class WireCanvas(BaseModel):
    model_config = ConfigDict(extra="forbid")
    width: int = Field(ge=1, le=10000)
    height: int = Field(ge=1, le=10000)
    background: WireBackground | None = None


class WireElement(BaseModel):
    model_config = ConfigDict(extra="forbid")
    text: str = Field(min_length=1)
    center_x: float
    center_y: float
    box_width: float | None = Field(default=None, gt=0)
    box_height: float | None = Field(default=None, gt=0)


class WireDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")
    id: str = "draft"
    canvas: WireCanvas
    elements: list[WireElement] = Field(min_length=1, max_length=50)


class WireLock(BaseModel):
    model_config = ConfigDict(extra="forbid")
    attribute: str
    cluster: int = Field(ge=0)
    label: int = Field(ge=0)


class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: WireDocument


class SampleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document: WireDocument
    p_k: dict[str, float] = Field(default_factory=dict)
    n: int = Field(default=1, ge=1, le=64)
    mode: str = "structure_preserved"
    seed: int = 0
    locks: list[WireLock] = Field(default_factory=list)
    embed_background: bool = True


class MetricsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    pred: list[list[list[int]]]
    truth: list[list[list[int]]]


# ---------------- request assembly ----------------


def _white_raster() -> Raster:
    return Raster(width=8, height=8, pixels=b"\xff" * (8 * 8 * 3))


def _wire_to_document(wire: WireDocument, codebooks: CodebookSet) -> tuple[DesignDocument, list[int]]:
    """Validated document in raster order plus the permutation used.

    perm[j] = index in the request of the element at raster position j.
    """
    if wire.canvas.background is None:
        raster = _white_raster()
    else:
        raster = _decode_background(wire.canvas.background)
    record = {
        "id": wire.id,
        "canvas": {
            "width": wire.canvas.width,
            "height": wire.canvas.height,
            "background_path": _INLINE,
        },
        "elements": [el.model_dump(exclude_none=True) for el in wire.elements],
    }
    validate_record(record)
    doc = document_from_record(record, codebooks, Path("."), rasters={_INLINE: raster})
    elements = [
        TextElement(
            text=el.text,
            center_x=el.center_x,
            center_y=el.center_y,
            box_width=el.box_width,
            box_height=el.box_height,
        )
        for el in wire.elements
    ]
    perm = raster_order(elements)
    return doc, perm


def _unpermute(rows: list, perm: list[int]) -> list:
    out = [None] * len(rows)
    for j, orig in enumerate(perm):
        out[orig] = rows[j]
    return out


def _decode_background(bg: WireBackground) -> Raster:
    try:
        pixels = base64.b64decode(bg.rgb_base64, validate=True)
    except Exception as exc:
        raise RasterError(f"background rgb_base64 is not valid base64: {exc}") from exc
    if len(pixels) != bg.width * bg.height * 3:
        raise RasterError(
            f"background payload is {len(pixels)} bytes, "
            f"expected {bg.width * bg.height * 3} for {bg.width}x{bg.height} RGB"
        )
    return Raster(width=bg.width, height=bg.height, pixels=pixels)


# ---------------- app ----------------

_BAD_REQUEST = (
    CorpusError,
    MetricsError,
    QuantizeError,
    RasterError,
    RenderError,
    SamplingError,
)


def create_app(
    runtime: ModelRuntime | None = None,
    checkpoint: str | Path | None = None,
    codebooks: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    if runtime is None and checkpoint is not None and codebooks is not None:
        runtime = load_runtime(checkpoint, codebooks)

    app = FastAPI(title="typography suggestion service")
    app.state.runtime = runtime
    app.state.swap_lock = threading.Lock()

    def current() -> ModelRuntime:
        rt = app.state.runtime
        if rt is None:
            raise ModelNotLoaded("model not loaded")
        return rt

    @app.exception_handler(RequestValidationError)
    def on_validation(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in err["loc"]], "msg": err["msg"]} for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(ModelNotLoaded)
    def on_not_loaded(request: Request, exc: ModelNotLoaded):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.exception_handler(ModelError)
    def on_model_error(request: Request, exc: ModelError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    for klass in _BAD_REQUEST:

        @app.exception_handler(klass)
        def on_bad_request(request: Request, exc: Exception):
            return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        rt = app.state.runtime
        if rt is None:
            return JSONResponse(status_code=503, content={"detail": "model not loaded"})
        return {"status": "ok", **rt.hashes()}

    @app.get("/meta")
    def meta():
        rt = current()
        counts = valid_label_counts(rt.codebooks)
        return {
            "attributes": list(ATTRIBUTES),
            "cardinalities": CARDINALITIES,
            "valid_counts": counts,
            "alignments": list(ALIGNMENTS),
            "capitalizations": list(CAPITALIZATIONS),
            "fonts": {str(k): v for k, v in DEFAULT_FONT_MAP.items()},
            "centroids": {
                name: list(rt.codebooks[name].centroids)
                for name in ("font_size", "angle", "letter_spacing", "line_spacing")
            },
            "colors": [
                "#{:02x}{:02x}{:02x}".format(*rt.codebooks.color.decode(i))
                for i in range(counts["color"])
            ],
            "modes": list(MODES),
        }

    @app.post("/predict")
    def predict(req: PredictRequest):
        rt = current()
        doc, perm = _wire_to_document(req.document, rt.codebooks)
        labels, clusters = predict_top1(rt.model, doc, rt.codebooks)
        return {
            "labels": _unpermute(labels.tolist(), perm),
            "clusters": {
                attr: _unpermute(list(ids), perm) for attr, ids in clusters.assignment.items()
            },
        }

    @app.post("/sample")
    def sample_endpoint(req: SampleRequest):
        rt = current()
        doc, perm = _wire_to_document(req.document, rt.codebooks)
        mode = MODE_ALIASES.get(req.mode, req.mode)
        cfg = SamplingConfig(
            p_k=dict(req.p_k),
            mode=mode,
            n_samples=req.n,
            seed=req.seed,
            locks={(l.attribute, l.cluster): l.label for l in req.locks} or None,
        )
        _, predicted = predict_top1(rt.model, doc, rt.codebooks)
        ss = sample(rt.model, doc, cfg, rt.codebooks, structure=predicted)
        svgs = [
            render_document(doc, s, rt.codebooks, embed_background=req.embed_background)
            for s in ss.samples
        ]
        return {
            "samples": [_unpermute(s.tolist(), perm) for s in ss.samples],
            "clusters": {
                attr: _unpermute(list(ids), perm) for attr, ids in predicted.assignment.items()
            },
            "svgs": svgs,
        }

    @app.post("/metrics")
    def metrics_endpoint(req: MetricsRequest):
        rt = current()
        pred = [np.asarray(p, dtype=int) for p in req.pred]
        truth = [np.asarray(t, dtype=int) for t in req.truth]
        report = report_from_bins(pred, truth, rt.codebooks)
        return report.to_json_dict()

    @app.post("/reload")
    def reload_model():
        rt = current()
        fresh = load_runtime(rt.checkpoint_path, rt.codebooks_path)
        with app.state.swap_lock:
            app.state.runtime = fresh
        return {"status": "reloaded", **fresh.hashes()}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
