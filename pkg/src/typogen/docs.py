"""Document model: canvas, text elements, typographic labels, corpus IO.

Corpus files are UTF-8 JSON Lines, one document per line:

    {"id": ..., "canvas": {"width", "height", "background_path"},
     "elements": [{"text", "center_x", "center_y", "box_width"?, "box_height"?,
                   "font"?, "color_rgb"?, "alignment"?, "capitalization"?,
                   "font_size"?, "angle"?, "letter_spacing"?, "line_spacing"?}]}

Unknown fields are rejected. Typographic fields are all-or-none per element
and per document. Backgrounds are binary PPM files resolved relative to the
corpus file. Elements are re-sorted into raster-scan order on load:
ascending (top, left, original index) where top/left are the corner
coordinates with missing box extents treated as zero.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .attributes import ATTRIBUTES, CARDINALITIES, GEOMETRIC
from .quantize import CodebookSet
from .raster import Raster, read_ppm, write_ppm

MAX_ELEMENTS = 50

_CANVAS_FIELDS = {"width", "height", "background_path"}
_ELEMENT_REQUIRED = {"text", "center_x", "center_y"}
_ELEMENT_OPTIONAL = {"box_width", "box_height"}
_LABEL_FIELDS = {
    "font",
    "color_rgb",
    "alignment",
    "capitalization",
    "font_size",
    "angle",
    "letter_spacing",
    "line_spacing",
}


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class CanvasSpec:
    width: int
    height: int
    background: Raster
    background_path: str | None = None
    aspect_bin: int | None = None
    numtext_bin: int | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise CorpusError(f"canvas {self.width}x{self.height} not positive")

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True)
class TextElement:
    text: str
    center_x: float
    center_y: float
    box_width: float | None = None
    box_height: float | None = None
    left_bin: int | None = None
    top_bin: int | None = None
    line_count_bin: int | None = None
    char_count_bin: int | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise CorpusError("element text is empty")

    @property
    def line_count(self) -> int:
        return self.text.count("\n") + 1

    @property
    def char_count(self) -> int:
        return len(self.text)

    def corner(self) -> tuple[float, float]:
        """(left, top) with missing extents treated as zero."""
        bw = self.box_width or 0.0
        bh = self.box_height or 0.0
        return (self.center_x - bw / 2.0, self.center_y - bh / 2.0)


@dataclass(frozen=True)
class TypographicAttributes:
    font: int
    color: int
    alignment: int
    capitalization: int
    font_size: int
    angle: int
    letter_spacing: int
    line_spacing: int

    def __post_init__(self) -> None:
        for name in ATTRIBUTES:
            v = getattr(self, name)
            if not (0 <= v < CARDINALITIES[name]):
                raise CorpusError(f"{name} bin {v} outside [0,{CARDINALITIES[name]})")

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in ATTRIBUTES)

    @classmethod
    def from_sequence(cls, bins: Iterable[int]) -> "TypographicAttributes":
        vals = [int(b) for b in bins]
        if len(vals) != len(ATTRIBUTES):
            raise CorpusError(f"need {len(ATTRIBUTES)} bins, got {len(vals)}")
        return cls(**dict(zip(ATTRIBUTES, vals)))


@dataclass(frozen=True)
class RawTypography:
    """Original (pre-quantization) label values as stored in the corpus."""

    font: int
    color_rgb: tuple[int, int, int]
    alignment: int
    capitalization: int
    font_size: float
    angle: float
    letter_spacing: float
    line_spacing: float


@dataclass(frozen=True)
class DesignDocument:
    id: str
    canvas: CanvasSpec
    elements: tuple[TextElement, ...]
    labels: tuple[TypographicAttributes, ...] | None = None
    raw_labels: tuple[RawTypography, ...] | None = None

    def __post_init__(self) -> None:
        if not (1 <= len(self.elements) <= MAX_ELEMENTS):
            raise CorpusError(f"document {self.id!r}: T={len(self.elements)} outside [1,{MAX_ELEMENTS}]")
        if self.labels is not None and len(self.labels) != len(self.elements):
            raise CorpusError(f"document {self.id!r}: {len(self.labels)} labels for {len(self.elements)} elements")
        if self.raw_labels is not None and len(self.raw_labels) != len(self.elements):
            raise CorpusError(f"document {self.id!r}: raw label count mismatch")

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    def label_array(self) -> np.ndarray:
        if self.labels is None:
            raise CorpusError(f"document {self.id!r} has no labels")
        return np.array([lab.as_tuple() for lab in self.labels], dtype=int)


def raster_order(elements: list[TextElement]) -> list[int]:
    """Indices that sort elements into raster-scan order (total order)."""
    keyed = [(el.corner()[1], el.corner()[0], i) for i, el in enumerate(elements)]
    return [i for _, _, i in sorted(keyed)]


def _fail(doc_id: Any, field: str, msg: str) -> CorpusError:
    return CorpusError(f"record {doc_id!r}, field {field!r}: {msg}")


def _check_number(doc_id: Any, field: str, value: Any, lo: float | None = None, hi: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(doc_id, field, f"expected a number, got {type(value).__name__}")
    v = float(value)
    if not np.isfinite(v):
        raise _fail(doc_id, field, "not finite")
    if lo is not None and v < lo:
        raise _fail(doc_id, field, f"{v} < {lo}")
    if hi is not None and v > hi:
        raise _fail(doc_id, field, f"{v} > {hi}")
    return v


def _check_int(doc_id: Any, field: str, value: Any, lo: int, hi: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(doc_id, field, f"expected an integer, got {type(value).__name__}")
    if not (lo <= value < hi):
        raise _fail(doc_id, field, f"{value} outside [{lo},{hi})")
    return value


def validate_record(rec: Any) -> dict:
    """Strict schema check of one parsed JSONL record. Returns the record."""
    if not isinstance(rec, dict):
        raise CorpusError(f"record is not an object: {type(rec).__name__}")
    doc_id = rec.get("id")
    extra = set(rec) - {"id", "canvas", "elements"}
    if extra:
        raise _fail(doc_id, sorted(extra)[0], "unknown field")
    if not isinstance(doc_id, str) or not doc_id:
        raise _fail(doc_id, "id", "must be a nonempty string")

    canvas = rec.get("canvas")
    if not isinstance(canvas, dict):
        raise _fail(doc_id, "canvas", "missing or not an object")
    if set(canvas) != _CANVAS_FIELDS:
        bad = (set(canvas) ^ _CANVAS_FIELDS) or {"canvas"}
        raise _fail(doc_id, f"canvas.{sorted(bad)[0]}", "canvas fields must be exactly width/height/background_path")
    w = _check_int(doc_id, "canvas.width", canvas["width"], 1, 10**9)
    h = _check_int(doc_id, "canvas.height", canvas["height"], 1, 10**9)
    if not isinstance(canvas["background_path"], str):
        raise _fail(doc_id, "canvas.background_path", "must be a string")

    elements = rec.get("elements")
    if not isinstance(elements, list) or not (1 <= len(elements) <= MAX_ELEMENTS):
        raise _fail(doc_id, "elements", f"must be a list of 1..{MAX_ELEMENTS} elements")

    labeled = None
    for i, el in enumerate(elements):
        where = f"elements[{i}]"
        if not isinstance(el, dict):
            raise _fail(doc_id, where, "not an object")
        extra = set(el) - _ELEMENT_REQUIRED - _ELEMENT_OPTIONAL - _LABEL_FIELDS
        if extra:
            raise _fail(doc_id, f"{where}.{sorted(extra)[0]}", "unknown field")
        missing = _ELEMENT_REQUIRED - set(el)
        if missing:
            raise _fail(doc_id, f"{where}.{sorted(missing)[0]}", "required field missing")
        if not isinstance(el["text"], str) or not el["text"]:
            raise _fail(doc_id, f"{where}.text", "must be a nonempty string")
        cx = _check_number(doc_id, f"{where}.center_x", el["center_x"], 0, w)
        cy = _check_number(doc_id, f"{where}.center_y", el["center_y"], 0, h)
        del cx, cy
        for opt in _ELEMENT_OPTIONAL:
            if opt in el:
                _check_number(doc_id, f"{where}.{opt}", el[opt], 0, None)

        present = _LABEL_FIELDS & set(el)
        if present and present != _LABEL_FIELDS:
            raise _fail(doc_id, where, f"partial typographic labels: missing {sorted(_LABEL_FIELDS - present)[0]}")
        has = bool(present)
        if labeled is None:
            labeled = has
        elif labeled != has:
            raise _fail(doc_id, where, "mixed labeled and unlabeled elements")
        if has:
            _check_int(doc_id, f"{where}.font", el["font"], 0, CARDINALITIES["font"])
            _check_int(doc_id, f"{where}.alignment", el["alignment"], 0, CARDINALITIES["alignment"])
            _check_int(doc_id, f"{where}.capitalization", el["capitalization"], 0, CARDINALITIES["capitalization"])
            rgb = el["color_rgb"]
            if not (isinstance(rgb, list) and len(rgb) == 3):
                raise _fail(doc_id, f"{where}.color_rgb", "must be [r, g, b]")
            for c in rgb:
                _check_int(doc_id, f"{where}.color_rgb", c, 0, 256)
            for attr in GEOMETRIC:
                _check_number(doc_id, f"{where}.{attr}", el[attr])
    return rec


def parse_records(path: str | Path) -> list[dict]:
    """Read and schema-check every record of a JSONL corpus file."""
    path = Path(path)
    records = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {e}") from None
            rec = validate_record(rec)
            if rec["id"] in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate document id {rec['id']!r}")
            seen.add(rec["id"])
            records.append(rec)
    return records


def _element_bins(el: TextElement, canvas: CanvasSpec, codebooks: CodebookSet) -> TextElement:
    left, top = el.corner()
    return dataclasses.replace(
        el,
        left_bin=int(codebooks["left"].encode(left / canvas.width)),
        top_bin=int(codebooks["top"].encode(top / canvas.height)),
        line_count_bin=int(codebooks["line_count"].encode(float(el.line_count))),
        char_count_bin=int(codebooks["char_count"].encode(float(el.char_count))),
    )


def derive_context_bins(doc: DesignDocument, codebooks: CodebookSet) -> DesignDocument:
    """Populate every derived context bin; idempotent."""
    canvas = dataclasses.replace(
        doc.canvas,
        aspect_bin=int(codebooks["aspect"].encode(doc.canvas.aspect)),
        numtext_bin=int(codebooks["numtext"].encode(float(doc.num_elements))),
    )
    elements = tuple(_element_bins(el, canvas, codebooks) for el in doc.elements)
    return dataclasses.replace(doc, canvas=canvas, elements=elements)


def encode_raw_labels(raws: Iterable[RawTypography], codebooks: CodebookSet) -> tuple[TypographicAttributes, ...]:
    out = []
    for raw in raws:
        out.append(
            TypographicAttributes(
                font=raw.font,
                color=int(codebooks.color.encode(raw.color_rgb)),
                alignment=raw.alignment,
                capitalization=raw.capitalization,
                font_size=int(codebooks["font_size"].encode(raw.font_size)),
                angle=int(codebooks["angle"].encode(raw.angle)),
                letter_spacing=int(codebooks["letter_spacing"].encode(raw.letter_spacing)),
                line_spacing=int(codebooks["line_spacing"].encode(raw.line_spacing)),
            )
        )
    return tuple(out)


def document_from_record(
    rec: dict, codebooks: CodebookSet, base_dir: Path, rasters: dict[str, Raster] | None = None
) -> DesignDocument:
    canvas_rec = rec["canvas"]
    bg_path = canvas_rec["background_path"]
    if rasters is not None and bg_path in rasters:
        background = rasters[bg_path]
    else:
        background = read_ppm(base_dir / bg_path)
        if rasters is not None:
            rasters[bg_path] = background
    canvas = CanvasSpec(
        width=canvas_rec["width"], height=canvas_rec["height"],
        background=background, background_path=bg_path,
    )

    elements = []
    raws = []
    labeled = "font" in rec["elements"][0]
    for el in rec["elements"]:
        elements.append(
            TextElement(
                text=el["text"],
                center_x=float(el["center_x"]),
                center_y=float(el["center_y"]),
                box_width=float(el["box_width"]) if "box_width" in el else None,
                box_height=float(el["box_height"]) if "box_height" in el else None,
            )
        )
        if labeled:
            raws.append(
                RawTypography(
                    font=el["font"],
                    color_rgb=tuple(el["color_rgb"]),
                    alignment=el["alignment"],
                    capitalization=el["capitalization"],
                    font_size=float(el["font_size"]),
                    angle=float(el["angle"]),
                    letter_spacing=float(el["letter_spacing"]),
                    line_spacing=float(el["line_spacing"]),
                )
            )

    order = raster_order(elements)
    elements = [elements[i] for i in order]
    raw_labels = tuple(raws[i] for i in order) if labeled else None
    labels = encode_raw_labels(raw_labels, codebooks) if labeled else None
    doc = DesignDocument(
        id=rec["id"], canvas=canvas, elements=tuple(elements),
        labels=labels, raw_labels=raw_labels,
    )
    return derive_context_bins(doc, codebooks)


def load_documents(path: str | Path, codebooks: CodebookSet) -> list[DesignDocument]:
    """Load, validate, re-order and bin a JSONL corpus."""
    path = Path(path)
    records = parse_records(path)
    rasters: dict[str, Raster] = {}
    return [document_from_record(rec, codebooks, path.parent, rasters) for rec in records]


def _element_record(el: TextElement, raw: RawTypography | None) -> dict:
    rec: dict[str, Any] = {
        "text": el.text,
        "center_x": el.center_x,
        "center_y": el.center_y,
    }
    if el.box_width is not None:
        rec["box_width"] = el.box_width
    if el.box_height is not None:
        rec["box_height"] = el.box_height
    if raw is not None:
        rec.update(
            font=raw.font,
            color_rgb=list(raw.color_rgb),
            alignment=raw.alignment,
            capitalization=raw.capitalization,
            font_size=raw.font_size,
            angle=raw.angle,
            letter_spacing=raw.letter_spacing,
            line_spacing=raw.line_spacing,
        )
    return rec


def document_to_record(doc: DesignDocument, background_path: str | None = None) -> dict:
    """Wire/JSONL form of a document; raw typography included when present."""
    bg_path = background_path or doc.canvas.background_path or f"backgrounds/{doc.id}.ppm"
    raws = doc.raw_labels if doc.raw_labels is not None else [None] * doc.num_elements
    return {
        "id": doc.id,
        "canvas": {
            "width": doc.canvas.width,
            "height": doc.canvas.height,
            "background_path": bg_path,
        },
        "elements": [_element_record(el, raw) for el, raw in zip(doc.elements, raws)],
    }


def write_documents(docs: list[DesignDocument], path: str | Path, write_rasters: bool = True) -> None:
    """Write a corpus back to JSONL plus PPM backgrounds.

    Documents without a background_path get one under backgrounds/.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written: set[str] = set()
    lines = []
    for doc in docs:
        rec = document_to_record(doc)
        bg_path = rec["canvas"]["background_path"]
        lines.append(json.dumps(rec, ensure_ascii=False))
        if write_rasters and bg_path not in written:
            target = path.parent / bg_path
            target.parent.mkdir(parents=True, exist_ok=True)
            write_ppm(doc.canvas.background, target)
            written.add(bg_path)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
