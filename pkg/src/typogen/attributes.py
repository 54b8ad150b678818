"""Canonical attribute tables shared by every other module.

The eight typographic attributes are predicted per text element, in this
fixed order. Context quantities (canvas aspect, element count, positions,
text statistics) are binned but never predicted.
"""
from __future__ import annotations

ATTRIBUTES: tuple[str, ...] = (
    "font",
    "color",
    "alignment",
    "capitalization",
    "font_size",
    "angle",
    "letter_spacing",
    "line_spacing",
)

# Output-head cardinalities, one softmax per attribute.
CARDINALITIES: dict[str, int] = {
    "font": 261,
    "color": 64,
    "alignment": 3,
    "capitalization": 2,
    "font_size": 16,
    "angle": 16,
    "letter_spacing": 16,
    "line_spacing": 16,
}

# Attributes whose labels come from 1-D k-means codebooks over raw values.
GEOMETRIC: tuple[str, ...] = ("font_size", "angle", "letter_spacing", "line_spacing")

# Purely categorical attributes: raw value is already the label id.
CATEGORICAL: tuple[str, ...] = ("font", "alignment", "capitalization")

# Context quantities and their bin counts (encoder inputs only).
CONTEXT_BINS: dict[str, int] = {
    "aspect": 40,
    "numtext": 50,
    "left": 64,
    "top": 64,
    "line_count": 50,
    "char_count": 50,
}

ALIGNMENTS: tuple[str, ...] = ("left", "center", "right")
CAPITALIZATIONS: tuple[str, ...] = ("none", "uppercase")


def attribute_index(name: str) -> int:
    try:
        return ATTRIBUTES.index(name)
    except ValueError:
        raise KeyError(f"unknown attribute {name!r}") from None
