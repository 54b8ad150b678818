"""Deterministic SVG output for a document plus one label assignment.

Every element becomes a <g> whose data attributes echo the decoded values
of all 8 attributes, so labels survive a roundtrip through the markup.
Width is estimated with a fixed 0.6 per-glyph advance; no glyph metrics.
"""
from __future__ import annotations

import base64
import struct
import zlib
from dataclasses import dataclass, field
from xml.etree import ElementTree
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .attributes import ALIGNMENTS, CAPITALIZATIONS
from .docs import DesignDocument, TypographicAttributes
from .quantize import CodebookSet, QuantizeError
from .raster import Raster

GLYPH_ADVANCE = 0.6
DEFAULT_FAMILY = "sans-serif"

# desk-scale id → family cycle; unmapped ids fall back to DEFAULT_FAMILY
DEFAULT_FONT_MAP: dict[int, str] = {
    i: fam
    for i, fam in enumerate(
        [
            "Georgia, serif",
            "Helvetica, sans-serif",
            "Courier New, monospace",
            "Times New Roman, serif",
            "Verdana, sans-serif",
            "Palatino, serif",
            "Trebuchet MS, sans-serif",
            "Lucida Console, monospace",
            "Garamond, serif",
            "Arial Black, sans-serif",
            "Book Antiqua, serif",
            "Tahoma, sans-serif",
            "Didot, serif",
            "Futura, sans-serif",
            "American Typewriter, monospace",
            "Gill Sans, sans-serif",
        ]
    )
}


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class DecodedAttributes:
    font_family: str
    color_hex: str
    alignment: str
    capitalization: str
    font_size: float
    angle: float
    letter_spacing: float
    line_spacing: float


@dataclass(frozen=True)
class RenderSpec:
    doc: DesignDocument
    labels: tuple[TypographicAttributes, ...]
    codebooks: CodebookSet
    font_map: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_FONT_MAP))
    embed_background: bool = True


def decode_attributes(lab: TypographicAttributes, codebooks: CodebookSet, font_map: dict[int, str]) -> DecodedAttributes:
    """Bins to presentation values; out-of-range bins raise."""
    if not (0 <= lab.alignment < len(ALIGNMENTS)):
        raise RenderError(f"alignment bin {lab.alignment} out of range")
    if not (0 <= lab.capitalization < len(CAPITALIZATIONS)):
        raise RenderError(f"capitalization bin {lab.capitalization} out of range")
    try:
        r, g, b = codebooks.color.decode(lab.color)
        geo = {name: codebooks[name].decode(getattr(lab, name)) for name in
               ("font_size", "angle", "letter_spacing", "line_spacing")}
    except (QuantizeError, IndexError) as exc:
        raise RenderError(str(exc)) from exc
    return DecodedAttributes(
        font_family=font_map.get(lab.font, DEFAULT_FAMILY),
        color_hex=f"#{r:02x}{g:02x}{b:02x}",
        alignment=ALIGNMENTS[lab.alignment],
        capitalization=CAPITALIZATIONS[lab.capitalization],
        font_size=float(geo["font_size"]),
        angle=float(geo["angle"]),
        letter_spacing=float(geo["letter_spacing"]),
        line_spacing=float(geo["line_spacing"]),
    )


def _png_bytes(raster: Raster) -> bytes:
    """Minimal 8-bit RGB PNG encoding (filter 0 scanlines)."""

    def chunk(tag: bytes, payload: bytes) -> bytes:
        crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
        return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)

    ihdr = struct.pack(">IIBBBBB", raster.width, raster.height, 8, 2, 0, 0, 0)
    row_len = raster.width * 3
    raw = b"".join(
        b"\x00" + raster.pixels[y * row_len : (y + 1) * row_len] for y in range(raster.height)
    )
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def _num(v: float) -> str:
    """Compact, deterministic number formatting for coordinates."""
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-0") else "0"


def render_svg(spec: RenderSpec) -> str:
    doc = spec.doc
    if len(spec.labels) != doc.num_elements:
        raise RenderError(f"{len(spec.labels)} labels for {doc.num_elements} elements")
    W, H = doc.canvas.width, doc.canvas.height
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(W)}" height="{_num(H)}" '
        f'viewBox="0 0 {_num(W)} {_num(H)}" data-generator="typogen" '
        f'data-doc-id={quoteattr(doc.id)}>'
    ]
    if spec.embed_background:
        payload = base64.b64encode(_png_bytes(doc.canvas.background)).decode("ascii")
        href = f"data:image/png;base64,{payload}"
    else:
        href = doc.canvas.background_path or ""
    if href:
        out.append(
            f'<image x="0" y="0" width="{_num(W)}" height="{_num(H)}" '
            f'preserveAspectRatio="none" href={quoteattr(href)}/>'
        )
    for el, lab in zip(doc.elements, spec.labels):
        dec = decode_attributes(lab, spec.codebooks, spec.font_map)
        text = el.text.upper() if dec.capitalization == "uppercase" else el.text
        lines = text.split("\n")
        fs, lsp = dec.font_size, dec.letter_spacing
        width = max(GLYPH_ADVANCE * fs * len(ln) + lsp * max(len(ln) - 1, 0) for ln in lines)
        if dec.alignment == "left":
            x, anchor = el.center_x - width / 2.0, "start"
        elif dec.alignment == "right":
            x, anchor = el.center_x + width / 2.0, "end"
        else:
            x, anchor = el.center_x, "middle"
        advance = fs * dec.line_spacing
        transform = (
            f' transform="rotate({_num(dec.angle)} {_num(el.center_x)} {_num(el.center_y)})"'
            if dec.angle != 0.0
            else ""
        )
        attrs = (
            f"data-font={quoteattr(dec.font_family)} "
            f'data-color="{dec.color_hex}" '
            f'data-alignment="{dec.alignment}" '
            f'data-capitalization="{dec.capitalization}" '
            f'data-font-size="{dec.font_size!r}" '
            f'data-angle="{dec.angle!r}" '
            f'data-letter-spacing="{dec.letter_spacing!r}" '
            f'data-line-spacing="{dec.line_spacing!r}"'
        )
        out.append(f"<g {attrs}{transform}>")
        for i, ln in enumerate(lines):
            y = el.center_y + (i - (len(lines) - 1) / 2.0) * advance
            out.append(
                f'<text x="{_num(x)}" y="{_num(y)}" text-anchor="{anchor}" '
                f"font-family={quoteattr(dec.font_family)} "
                f'font-size="{_num(fs)}" letter-spacing="{_num(lsp)}" '
                f'fill="{dec.color_hex}">{escape(ln)}</text>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out)


def render_document(
    doc: DesignDocument,
    labels,
    codebooks: CodebookSet,
    font_map: dict[int, str] | None = None,
    embed_background: bool = True,
) -> str:
    """Convenience wrapper accepting a (T, 8) bin array."""
    labs = tuple(
        lab if isinstance(lab, TypographicAttributes) else TypographicAttributes.from_sequence(lab)
        for lab in (labels if not isinstance(labels, np.ndarray) else labels.tolist())
    )
    return render_svg(
        RenderSpec(
            doc=doc,
            labels=labs,
            codebooks=codebooks,
            font_map=font_map if font_map is not None else dict(DEFAULT_FONT_MAP),
            embed_background=embed_background,
        )
    )


_DATA_KEYS = (
    "data-font",
    "data-color",
    "data-alignment",
    "data-capitalization",
    "data-font-size",
    "data-angle",
    "data-letter-spacing",
    "data-line-spacing",
)


def roundtrip_labels(svg_text: str) -> list[DecodedAttributes]:
    """Recover the decoded attribute values from markup produced here."""
    try:
        root = ElementTree.fromstring(svg_text)
    except ElementTree.ParseError as exc:
        raise RenderError(f"not parseable SVG: {exc}") from exc
    if root.tag != "{http://www.w3.org/2000/svg}svg" or root.get("data-generator") != "typogen":
        raise RenderError("markup was not produced by this renderer")
    out = []
    for g in root.iter("{http://www.w3.org/2000/svg}g"):
        missing = [k for k in _DATA_KEYS if g.get(k) is None]
        if missing:
            raise RenderError(f"group missing data attributes: {missing}")
        out.append(
            DecodedAttributes(
                font_family=g.get("data-font"),
                color_hex=g.get("data-color"),
                alignment=g.get("data-alignment"),
                capitalization=g.get("data-capitalization"),
                font_size=float(g.get("data-font-size")),
                angle=float(g.get("data-angle")),
                letter_spacing=float(g.get("data-letter-spacing")),
                line_spacing=float(g.get("data-line-spacing")),
            )
        )
    return out
