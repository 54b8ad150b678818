"""Synthetic designer-rule corpus and train/val/test splitting.

Documents follow small group templates (title+body, title+subtitle+body,
title+list, title+list+footer). Styling is assigned per group: the
elements of a group share all eight attribute values, except that a small
slice of elements tweaks its font or color inside the group's pool. The
font and color pools are per role and derived from a document theme
(background brightness crossed with canvas orientation), so which labels
are plausible is inferable from context while the exact pick is not.
Pools of different roles never overlap, which keeps groups within a
document on distinct fonts and distinct colors. The title uses a larger
size than anything below it, and text color comes from the palette
opposite the background's brightness side.

Group boundaries are mostly inferable from layout and text statistics
(footers sit in their own bottom band, bodies run longer than list items)
but not always: a slice of bodies is deliberately as short as an item, so
some documents admit more than one plausible grouping. That residual
uncertainty is what separates plain from structure-preserved sampling at
high p without drowning the signal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .color import lab_to_srgb, luma, srgb_to_lab
from .docs import (
    CanvasSpec,
    DesignDocument,
    RawTypography,
    TextElement,
    derive_context_bins,
    encode_raw_labels,
    raster_order,
    write_documents,
)
from .quantize import CodebookSet
from .raster import Raster


class GeneratorError(ValueError):
    pass


DEFAULT_PROFILE = {
    "title_body": 0.15,
    "title_subtitle_body": 0.25,
    "title_list": 0.35,
    "title_list_footer": 0.25,
}

_CANVAS_SIZES = [
    (600, 800),
    (800, 600),
    (800, 800),
    (1080, 1080),
    (1200, 628),
    (900, 1200),
    (1080, 1350),
    (640, 960),
]

_WORDS = (
    "aurora bistro cedar dawn ember fable grove harbor island jubilee "
    "koala lantern meadow nectar orchid prairie quartz raven sierra tundra "
    "umber velvet willow yonder zephyr atlas breeze cobalt drift echo "
    "fjord garnet horizon indigo juniper kelp lagoon mosaic nimbus opal "
    "pebble quill ripple summit thistle vista wander saffron"
).split()

_SIZES = {
    "title": (36.0, 42.0, 48.0),
    "subtitle": (24.0, 28.0),
    "body": (16.0, 18.0, 20.0),
    "item": (16.0, 18.0, 20.0),
    "footer": (12.0, 14.0),
}
_LETTER_SPACING = (0.0, 0.5, 1.0, 2.0)
_LINE_SPACING = (1.0, 1.15, 1.3, 1.5)
_DECORATIVE_ANGLES = (-8.0, -4.0, 4.0, 8.0)
_ANGLE_PROB = 0.08


def _build_palette(l_values: tuple[float, ...], chroma: float, l_bound: tuple[float, float]) -> tuple[tuple[int, int, int], ...]:
    """Hue-circle palette in Lab converted to sRGB, chroma backed off until
    the decoded lightness stays inside l_bound."""
    lo, hi = l_bound
    out = []
    for i in range(12):
        hue = np.radians(i * 30.0)
        L = l_values[i % len(l_values)]
        c = chroma
        while True:
            lab = np.array([L, c * np.cos(hue), c * np.sin(hue)])
            rgb = tuple(int(v) for v in np.clip(np.rint(lab_to_srgb(lab)), 0, 255))
            got_l = float(srgb_to_lab(np.array(rgb, dtype=float))[0])
            if lo <= got_l <= hi:
                out.append(rgb)
                break
            c *= 0.8
            if c < 1.0:
                out.append(rgb)
                break
    return tuple(out)


DARK_PALETTE = _build_palette((24.0, 30.0, 36.0), 34.0, (5.0, 40.0))
LIGHT_PALETTE = _build_palette((70.0, 76.0, 82.0), 28.0, (65.0, 96.0))


@dataclass(frozen=True)
class GeneratorConfig:
    num_documents: int
    max_elements: int = 12
    font_vocab_size: int = 16
    seed: int = 0
    structure_profile: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PROFILE))

    def __post_init__(self) -> None:
        if self.num_documents < 1:
            raise GeneratorError("num_documents must be >= 1")
        if not (1 <= self.max_elements <= 50):
            raise GeneratorError("max_elements must be in [1,50]")
        if not (2 <= self.font_vocab_size <= 261):
            raise GeneratorError("font_vocab_size must be in [2,261]")
        if self.seed < 0:
            raise GeneratorError("seed must be non-negative")
        unknown = set(self.structure_profile) - set(DEFAULT_PROFILE)
        if unknown:
            raise GeneratorError(f"unknown template {sorted(unknown)[0]!r}")
        total = sum(self.structure_profile.values())
        if total <= 0 or any(v < 0 for v in self.structure_profile.values()):
            raise GeneratorError("template probabilities must be non-negative with positive sum")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (8.0, 1.0, 1.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if any(r <= 0 for r in self.ratios):
            raise GeneratorError("split ratios must be positive")


def _phrase(rng: np.random.Generator, n_words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_words))


def _short_text(rng: np.random.Generator) -> str:
    return _phrase(rng, int(rng.integers(1, 4)))


def _body_text(rng: np.random.Generator) -> str:
    # one body in five is as short as a list item, on purpose
    if rng.random() < 0.2:
        return _short_text(rng)
    words = [str(rng.choice(_WORDS)) for _ in range(int(rng.integers(5, 13)))]
    lines = [" ".join(words[i : i + 4]) for i in range(0, len(words), 4)]
    return "\n".join(lines)


def _template_roles(name: str, rng: np.random.Generator) -> list[tuple[str, int]]:
    """(role, group id) per element."""
    if name == "title_body":
        b = int(rng.integers(2, 5))
        return [("title", 0)] + [("body", 1)] * b
    if name == "title_subtitle_body":
        b = int(rng.integers(1, 4))
        return [("title", 0), ("subtitle", 1)] + [("body", 2)] * b
    if name == "title_list":
        k = int(rng.integers(5, 12))
        return [("title", 0)] + [("item", 1)] * k
    if name == "title_list_footer":
        k = int(rng.integers(5, 11))
        return [("title", 0)] + [("item", 1)] * k + [("footer", 2)]
    raise GeneratorError(f"unknown template {name!r}")


def _band_color(rng: np.random.Generator, bright: bool) -> np.ndarray:
    lo, hi = (0.58, 0.95) if bright else (0.05, 0.42)
    while True:
        c = rng.random(3)
        if lo <= luma(c) <= hi:
            return c


def _background(rng: np.random.Generator, width: int, height: int, bright: bool) -> Raster:
    if width >= height:
        rw, rh = 64, max(1, round(64 * height / width))
    else:
        rw, rh = max(1, round(64 * width / height)), 64
    c1 = _band_color(rng, bright)
    c2 = _band_color(rng, bright)
    style = rng.choice(["flat", "gradient", "checker"])
    if style == "flat":
        arr = np.broadcast_to(c1, (rh, rw, 3)).copy()
    elif style == "gradient":
        t = np.linspace(0.0, 1.0, rh)[:, None, None]
        arr = c1 * (1 - t) + c2 * t
        arr = np.broadcast_to(arr, (rh, rw, 3)).copy()
    else:
        ys, xs = np.mgrid[0:rh, 0:rw]
        mask = ((ys // 8 + xs // 8) % 2).astype(bool)
        arr = np.where(mask[..., None], c2, c1)
    return Raster.from_array(arr)


_ROLE_ORDER = ("title", "subtitle", "body", "item", "footer")
# per-element chance of tweaking the group style; fonts deviate a little
# more than colors so the sampled-trend separation is comparable
_FONT_NOISE = 0.17
_COLOR_NOISE = 0.13


def _theme_id(bright_bg: bool, width: int, height: int) -> int:
    orient = 0 if width < height else (1 if width > height else 2)
    return (3 if bright_bg else 0) + orient


def _theme_pools(theme: int, font_vocab: int, palette_size: int) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Per-role font and color-index pools for one theme. Slices of a
    theme-seeded permutation, so roles never share a pool entry as long as
    the vocabulary is large enough to go around."""
    rng = np.random.default_rng(np.random.SeedSequence([9173, theme]))
    fperm = rng.permutation(font_vocab)
    cperm = rng.permutation(palette_size)
    fonts = {}
    colors = {}
    for r, role in enumerate(_ROLE_ORDER):
        width = min(3, font_vocab)
        fonts[role] = np.array(sorted({int(fperm[(3 * r + j) % font_vocab]) for j in range(width)}))
        cwidth = min(2, palette_size)
        colors[role] = np.array(sorted({int(cperm[(2 * r + j) % palette_size]) for j in range(cwidth)}))
    return fonts, colors


def _group_styles(
    rng: np.random.Generator,
    roles: list[tuple[str, int]],
    bright_bg: bool,
    font_pools: dict[str, np.ndarray],
    color_pools: dict[str, np.ndarray],
) -> dict[int, dict]:
    groups: dict[int, str] = {}
    for role, gid in roles:
        groups.setdefault(gid, role)
    palette = DARK_PALETTE if bright_bg else LIGHT_PALETTE
    styles = {}
    for gid, role in sorted(groups.items()):
        if role == "title":
            alignment = int(rng.choice([0, 1, 2], p=[0.1, 0.8, 0.1]))
            caps = int(rng.random() < 0.45)
        elif role == "item":
            alignment = int(rng.choice([0, 1, 2], p=[0.6, 0.3, 0.1]))
            caps = int(rng.random() < 0.15)
        else:
            alignment = int(rng.choice([0, 1, 2], p=[0.35, 0.55, 0.1]))
            caps = int(rng.random() < 0.2)
        styles[gid] = {
            "font": int(rng.choice(font_pools[role])),
            "color_rgb": palette[int(rng.choice(color_pools[role]))],
            "alignment": alignment,
            "capitalization": caps,
            "font_size": float(rng.choice(_SIZES[role])),
            "angle": float(rng.choice(_DECORATIVE_ANGLES)) if rng.random() < _ANGLE_PROB else 0.0,
            "letter_spacing": float(rng.choice(_LETTER_SPACING[:3] if role != "title" else _LETTER_SPACING[1:])),
            "line_spacing": float(rng.choice(_LINE_SPACING)),
        }
    return styles


def _element_text(role: str, rng: np.random.Generator) -> str:
    if role == "title":
        return _phrase(rng, int(rng.integers(1, 4))).title()
    if role == "body":
        return _body_text(rng)
    return _short_text(rng)


def generate_document(doc_id: str, cfg: GeneratorConfig, rng: np.random.Generator) -> DesignDocument:
    width, height = _CANVAS_SIZES[int(rng.integers(len(_CANVAS_SIZES)))]
    bright = bool(rng.random() < 0.5)
    background = _background(rng, width, height, bright)

    names = sorted(cfg.structure_profile)
    probs = np.array([cfg.structure_profile[n] for n in names], dtype=float)
    probs /= probs.sum()
    template = str(rng.choice(names, p=probs))
    roles = _template_roles(template, rng)[: cfg.max_elements]
    palette = DARK_PALETTE if bright else LIGHT_PALETTE
    font_pools, color_pools = _theme_pools(_theme_id(bright, width, height), cfg.font_vocab_size, len(palette))
    styles = _group_styles(rng, roles, bright, font_pools, color_pools)

    title_y = height * rng.uniform(0.10, 0.18)
    col_y0 = height * rng.uniform(0.28, 0.34)
    n_column = sum(1 for role, _ in roles if role not in ("title", "footer"))
    rowstep = height * rng.uniform(0.09, 0.13)
    if n_column > 1:
        # keep the column clear of the footer band
        rowstep = min(rowstep, (0.82 * height - col_y0) / (n_column - 1))

    elements = []
    raws = []
    row = 0
    for role, gid in roles:
        style = dict(styles[gid])
        fpool = font_pools[role]
        if fpool.size > 1 and rng.random() < _FONT_NOISE:
            style["font"] = int(rng.choice(fpool[fpool != style["font"]]))
        cpool = color_pools[role]
        if cpool.size > 1 and rng.random() < _COLOR_NOISE:
            alts = [palette[int(i)] for i in cpool if palette[int(i)] != style["color_rgb"]]
            if alts:
                style["color_rgb"] = alts[int(rng.integers(len(alts)))]
        text = _element_text(role, rng)
        if role == "title":
            cy = title_y
        elif role == "footer":
            cy = height * rng.uniform(0.88, 0.94)
        else:
            cy = col_y0 + row * rowstep
            row += 1
        cx = width * (0.5 + rng.uniform(-0.03, 0.03))
        lines = text.split("\n")
        box_w = min(max(len(ln) for ln in lines) * 0.6 * style["font_size"], 0.94 * width)
        box_h = len(lines) * style["font_size"] * style["line_spacing"]
        with_extents = rng.random() >= 0.1
        elements.append(
            TextElement(
                text=text,
                center_x=float(np.clip(cx, box_w / 2, width - box_w / 2)),
                center_y=float(np.clip(cy, box_h / 2, height - box_h / 2)),
                box_width=float(box_w) if with_extents else None,
                box_height=float(box_h) if with_extents else None,
            )
        )
        raws.append(RawTypography(**style))

    order = raster_order(elements)
    elements = tuple(elements[i] for i in order)
    raws = tuple(raws[i] for i in order)
    canvas = CanvasSpec(width=width, height=height, background=background,
                        background_path=f"backgrounds/{doc_id}.ppm")
    return DesignDocument(id=doc_id, canvas=canvas, elements=elements, raw_labels=raws)


def generate_synthetic(cfg: GeneratorConfig) -> list[DesignDocument]:
    docs = []
    for i in range(cfg.num_documents):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        docs.append(generate_document(f"doc{i:05d}", cfg, rng))
    return docs


def bin_documents(docs: list[DesignDocument], codebooks: CodebookSet) -> list[DesignDocument]:
    """Populate context bins and encode raw labels; raw values stay put."""
    import dataclasses

    out = []
    for doc in docs:
        if doc.raw_labels is not None:
            doc = dataclasses.replace(doc, labels=encode_raw_labels(doc.raw_labels, codebooks))
        out.append(derive_context_bins(doc, codebooks))
    return out


def write_corpus(docs: list[DesignDocument], out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "corpus.jsonl"
    write_documents(docs, path)
    return path


def split(docs: list, spec: SplitSpec) -> tuple[list, list, list]:
    """Deterministic shuffle and largest-remainder partition (ties toward
    later parts)."""
    n = len(docs)
    if n < 3:
        raise GeneratorError(f"cannot split {n} documents into 3 parts")
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    perm = rng.permutation(n)
    total = sum(spec.ratios)
    quotas = [n * r / total for r in spec.ratios]
    sizes = [int(np.floor(q)) for q in quotas]
    remainder = n - sum(sizes)
    # distribute by largest fractional part, ties to the later part
    frac = sorted(range(3), key=lambda i: (quotas[i] - sizes[i], i), reverse=True)
    for i in range(remainder):
        sizes[frac[i]] += 1
    out = []
    start = 0
    for s in sizes:
        out.append([docs[j] for j in perm[start : start + s]])
        start += s
    return tuple(out)
