"""SVG and PNG renderings of overlaid DoF regions."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any
from xml.sax.saxutils import escape

from dof_regions import DofLabError, DofRegion, RegionFamily, region_area

try:
    from PIL import Image, ImageDraw, ImageFont

    HAS_PILLOW = True
except ImportError:
    HAS_PILLOW = False


CANVAS_SIZE = 480
MARGIN = 60
LEGEND_ROW = 18
BACKGROUND_COLOR = "#FFFFFF"
AXIS_COLOR = "#000000"
FAMILY_STYLES: dict[RegionFamily, tuple[str, str]] = {
    # (fill, label)
    RegionFamily.PERFECT_CSIT: ("#9ECAE1", "perfect CSIT"),
    RegionFamily.FB_DELAYED_CSIT: ("#FDAE6B", "feedback + delayed CSIT"),
    RegionFamily.DELAYED_CSIT: ("#A1D99B", "delayed CSIT"),
    RegionFamily.NO_CSIT_FIXTURE: ("#BCBDDC", "no CSIT"),
}

FONT_PATHS = [
    "/System/Library/Fonts/Helvetica.ttc",
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "C:/Windows/Fonts/arial.ttf",
]


class PlotError(DofLabError):
    """Raised when a plot cannot be produced."""


@dataclass(frozen=True)
class _Frame:
    extent: int

    @property
    def scale(self) -> float:
        return (CANVAS_SIZE - 2 * MARGIN) / self.extent

    def to_canvas(self, x: Fraction | int, y: Fraction | int) -> tuple[float, float]:
        return (
            MARGIN + float(x) * self.scale,
            CANVAS_SIZE - MARGIN - float(y) * self.scale,
        )


def _coords(point: tuple[float, float]) -> str:
    return f"{point[0]:.2f},{point[1]:.2f}"


def _ordered(regions: Sequence[DofRegion]) -> list[DofRegion]:
    if not regions:
        raise PlotError("Nothing to plot: no regions given.")
    return sorted(regions, key=lambda r: (-region_area(r), r.family.value))


def _frame(regions: Sequence[DofRegion]) -> _Frame:
    top = max((max(v) for r in regions for v in r.vertices), default=Fraction(1))
    return _Frame(extent=max(1, math.ceil(top)))


def render_svg(regions: Sequence[DofRegion], title: str = "") -> str:
    """Deterministic SVG text: largest region at the back, legend top right."""

    ordered = _ordered(regions)
    frame = _frame(ordered)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_SIZE}" '
        f'height="{CANVAS_SIZE}" viewBox="0 0 {CANVAS_SIZE} {CANVAS_SIZE}">',
        f'<rect width="{CANVAS_SIZE}" height="{CANVAS_SIZE}" fill="{BACKGROUND_COLOR}"/>',
    ]
    if title:
        lines.append(
            f'<text x="{CANVAS_SIZE / 2:.2f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{escape(title)}</text>'
        )
    for region in ordered:
        fill, _ = FAMILY_STYLES[region.family]
        points = " ".join(_coords(frame.to_canvas(*v)) for v in region.vertices)
        lines.append(
            f'<polygon points="{points}" fill="{fill}" fill-opacity="0.85" '
            f'stroke="{AXIS_COLOR}" stroke-width="1" data-family="{region.family.value}"/>'
        )

    x0, y0 = frame.to_canvas(0, 0)
    x_end, _ = frame.to_canvas(frame.extent, 0)
    _, y_end = frame.to_canvas(0, frame.extent)
    for x2, y2 in ((x_end, y0), (x0, y_end)):
        lines.append(
            f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{AXIS_COLOR}"/>'
        )
    for tick in range(frame.extent + 1):
        tx, _ = frame.to_canvas(tick, 0)
        _, ty = frame.to_canvas(0, tick)
        lines.append(
            f'<text x="{tx:.2f}" y="{y0 + 16:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick}</text>'
        )
        lines.append(
            f'<text x="{x0 - 8:.2f}" y="{ty + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick}</text>'
        )
    lines.append(
        f'<text x="{(x0 + x_end) / 2:.2f}" y="{CANVAS_SIZE - 20}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">d1</text>'
    )
    lines.append(
        f'<text x="20" y="{(y0 + y_end) / 2:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">d2</text>'
    )

    for row, region in enumerate(ordered):
        fill, label = FAMILY_STYLES[region.family]
        ly = MARGIN + row * LEGEND_ROW
        lx = CANVAS_SIZE - MARGIN - 150
        lines.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{fill}"/>')
        lines.append(
            f'<text x="{lx + 18}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{escape(label)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _resolve_font(size: int) -> Any:
    for font_path in FONT_PATHS:
        try:
            return ImageFont.truetype(font_path, size)
        except OSError:
            continue
    return ImageFont.load_default()


def render_png(regions: Sequence[DofRegion], path: Path, title: str = "") -> Path:
    """Rasterize the same picture as ``render_svg`` into a PNG file."""

    if not HAS_PILLOW:
        raise PlotError("Pillow is required for PNG output.")
    ordered = _ordered(regions)
    frame = _frame(ordered)
    image = Image.new("RGB", (CANVAS_SIZE, CANVAS_SIZE), BACKGROUND_COLOR)
    draw = ImageDraw.Draw(image)
    font = _resolve_font(11)

    for region in ordered:
        fill, _ = FAMILY_STYLES[region.family]
        draw.polygon([frame.to_canvas(*v) for v in region.vertices], fill=fill, outline=AXIS_COLOR)

    origin = frame.to_canvas(0, 0)
    draw.line([origin, frame.to_canvas(frame.extent, 0)], fill=AXIS_COLOR)
    draw.line([origin, frame.to_canvas(0, frame.extent)], fill=AXIS_COLOR)
    for tick in range(frame.extent + 1):
        tx, _ = frame.to_canvas(tick, 0)
        _, ty = frame.to_canvas(0, tick)
        draw.text((tx - 3, origin[1] + 4), str(tick), font=font, fill=AXIS_COLOR)
        draw.text((origin[0] - 16, ty - 6), str(tick), font=font, fill=AXIS_COLOR)
    draw.text((CANVAS_SIZE / 2, CANVAS_SIZE - 28), "d1", font=font, fill=AXIS_COLOR)
    draw.text((12, CANVAS_SIZE / 2), "d2", font=font, fill=AXIS_COLOR)
    if title:
        draw.text((MARGIN, 16), title, font=_resolve_font(14), fill=AXIS_COLOR)

    for row, region in enumerate(ordered):
        fill, label = FAMILY_STYLES[region.family]
        ly = MARGIN + row * LEGEND_ROW
        lx = CANVAS_SIZE - MARGIN - 150
        draw.rectangle([lx, ly - 10, lx + 12, ly + 2], fill=fill)
        draw.text((lx + 18, ly - 10), label, font=font, fill=AXIS_COLOR)

    path.parent.mkdir(parents=True, exist_ok=True)
    image.save(path, format="PNG")
    return path
