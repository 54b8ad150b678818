"""Typography suggestion engine.

Generates per-element typographic attributes (font, color, alignment,
capitalization, font size, angle, letter spacing, line spacing) for text
elements placed on a canvas, with sampling modes that trade diversity
against structural consistency.
"""

__version__ = "0.1.0"
