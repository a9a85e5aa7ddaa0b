"""Deterministic SVG rendering of scenes for galleries.

One glyph per object: shape maps to the SVG element, color to the fill,
size to the glyph scale, and material to the stroke pattern (metal solid,
rubber dashed). Output is byte-identical for equal scenes.
"""
from __future__ import annotations

from .scene import Scene, SceneObject

CELL = 40  # px per grid cell
MARGIN = 10

_FILL = {
    "gray": "#9a9a9a",
    "red": "#d43b2a",
    "blue": "#2a64d4",
    "green": "#2f9e44",
    "brown": "#8b5a2b",
    "purple": "#8a2be2",
    "cyan": "#19b5c2",
    "yellow": "#e8c51c",
}


def _glyph(obj: SceneObject) -> str:
    cx = MARGIN + obj.col * CELL + CELL / 2
    cy = MARGIN + obj.row * CELL + CELL / 2
    half = (CELL * (0.38 if obj.size == "large" else 0.24))
    fill = _FILL[obj.color]
    dash = ' stroke-dasharray="4 3"' if obj.material == "rubber" else ""
    stroke = f'stroke="#222222" stroke-width="2"{dash}'
    title = f"<title>{obj.describe()}</title>"
    if obj.shape == "cube":
        x, y, side = cx - half, cy - half, 2 * half
        return (f'<rect class="obj" x="{x:.1f}" y="{y:.1f}" width="{side:.1f}" '
                f'height="{side:.1f}" fill="{fill}" {stroke}>{title}</rect>')
    if obj.shape == "sphere":
        return (f'<circle class="obj" cx="{cx:.1f}" cy="{cy:.1f}" r="{half:.1f}" '
                f'fill="{fill}" {stroke}>{title}</circle>')
    # cylinder: upright ellipse
    return (f'<ellipse class="obj" cx="{cx:.1f}" cy="{cy:.1f}" rx="{half * 0.7:.1f}" '
            f'ry="{half:.1f}" fill="{fill}" {stroke}>{title}</ellipse>')


def render_svg(scene: Scene) -> str:
    """Render the scene grid and one glyph per object; deterministic text."""
    width = 2 * MARGIN + scene.grid_w * CELL
    height = 2 * MARGIN + scene.grid_h * CELL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#fbfbf8"/>',
    ]
    for c in range(scene.grid_w + 1):
        x = MARGIN + c * CELL
        parts.append(f'<line x1="{x}" y1="{MARGIN}" x2="{x}" '
                     f'y2="{MARGIN + scene.grid_h * CELL}" stroke="#dddddd" stroke-width="1"/>')
    for r in range(scene.grid_h + 1):
        y = MARGIN + r * CELL
        parts.append(f'<line x1="{MARGIN}" y1="{y}" x2="{MARGIN + scene.grid_w * CELL}" '
                     f'y2="{y}" stroke="#dddddd" stroke-width="1"/>')
    for obj in scene.objects:
        parts.append(_glyph(obj))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
