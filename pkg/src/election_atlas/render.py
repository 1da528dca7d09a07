"""Deterministic SVG choropleth rendering with per-party colors.

Output is standalone SVG 1.1 text: one path per region filled with the
winning party's color, plus an alphabetical legend. Rendering is a pure
function of its inputs, so repeated renders are byte-identical and maps
diff cleanly in tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .geometry import FeatureSet, bbox_union
from .join import JoinedRegion

# Fixed categorical cycle; party brand colors arrive via overrides.
COLOR_CYCLE = (
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c",
    "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
    "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f",
    "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
)

NEUTRAL_FILL = "#d4d4d4"

_HEX_RE = re.compile(r"^#[0-9a-fA-F]{6}$")

_MIN_SIZE = 64
_MARGIN_FRACTION = 0.02
_LEGEND_ROW = 22
_LEGEND_PAD = 10
_SWATCH = 14


class RenderError(Exception):
    pass


class EmptyInput(RenderError):
    pass


class DuplicateOverrideColor(RenderError):
    pass


@dataclass(frozen=True)
class Palette:
    assignments: dict[str, str]
    overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        colors = list(self.assignments.values())
        if len(set(colors)) != len(colors):
            raise ValueError("palette assigns the same color to two parties")
        for color in colors:
            if not _HEX_RE.match(color):
                raise ValueError(f"not a #RRGGBB color: {color!r}")

    def color_for(self, party: str) -> str:
        return self.assignments[party]


def _lighten(color: str, step: int) -> str:
    """Shift toward white; used when the 20-color cycle wraps."""
    amount = min(0.85, 0.3 * step)
    channels = [int(color[i:i + 2], 16) for i in (1, 3, 5)]
    shifted = [round(c + (255 - c) * amount) for c in channels]
    return "#" + "".join(f"{c:02x}" for c in shifted)


def _probe_free_color(start: str, used: set[str]) -> str:
    # Deterministic fallback when a lightened color collides with an
    # override: walk the 24-bit space with a fixed odd stride.
    value = int(start[1:], 16)
    for _ in range(1 << 24):
        value = (value + 0x010307) % (1 << 24)
        candidate = f"#{value:06x}"
        if candidate not in used:
            return candidate
    raise RenderError("color space exhausted")


def assign_party_colors(parties: list[str], overrides: dict[str, str] | None = None) -> Palette:
    """Assign distinct colors to parties, deterministically.

    Input order is canonicalized to case-insensitive alphabetical, so any
    presentation order of the same parties yields the same palette.
    Overrides win; remaining parties take cycle colors in canonical
    order, wrapping with a lightness shift past 20.
    """
    overrides = dict(overrides or {})
    canonical = sorted(set(parties), key=lambda p: (p.casefold(), p))
    if not canonical:
        raise EmptyInput("no parties to color")

    for party, color in overrides.items():
        if not _HEX_RE.match(color):
            raise RenderError(f"override for {party!r} is not #RRGGBB: {color!r}")
    normalized = {party: color.lower() for party, color in overrides.items()}
    override_colors = [c for p, c in normalized.items() if p in set(canonical)]
    if len(set(override_colors)) != len(override_colors):
        raise DuplicateOverrideColor(f"override colors collide: {sorted(override_colors)}")

    assignments: dict[str, str] = {}
    used = set(override_colors)
    cycle_index = 0
    for party in canonical:
        if party in normalized:
            assignments[party] = normalized[party]
            continue
        base = COLOR_CYCLE[cycle_index % len(COLOR_CYCLE)]
        wrap = cycle_index // len(COLOR_CYCLE)
        color = _lighten(base, wrap) if wrap else base
        if color in used:
            color = _probe_free_color(color, used)
        assignments[party] = color
        used.add(color)
        cycle_index += 1
    return Palette(assignments=assignments, overrides=normalized)


# --------------------------------------------------------------------------
# SVG assembly

def _fmt(value: float) -> str:
    return f"{value:.2f}"


class _MapTransform:
    """Affine geo-to-screen transform: uniform scale, y flipped."""

    def __init__(self, bbox, width: int, height: int):
        xmin, ymin, xmax, ymax = bbox
        span_x = max(xmax - xmin, 1e-12)
        span_y = max(ymax - ymin, 1e-12)
        mx = span_x * _MARGIN_FRACTION
        my = span_y * _MARGIN_FRACTION
        self.x0 = xmin - mx
        self.y1 = ymax + my
        scale = min(width / (span_x + 2 * mx), height / (span_y + 2 * my))
        self.scale = scale
        # center the map inside the canvas
        self.ox = (width - (span_x + 2 * mx) * scale) / 2
        self.oy = (height - (span_y + 2 * my) * scale) / 2

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return ((x - self.x0) * self.scale + self.ox,
                (self.y1 - y) * self.scale + self.oy)


def _path_d(feature, transform: _MapTransform) -> str:
    parts = []
    for ring in feature.rings:
        screen = [transform.apply(x, y) for x, y in ring.points[:-1]]
        coords = " L ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in screen)
        parts.append(f"M {coords} Z")
    return " ".join(parts)


def _data_attrs(region_id: int, name: str, extra: dict) -> str:
    attrs = [f"data-region-id={quoteattr(str(region_id))}",
             f"data-name={quoteattr(name)}"]
    for key, value in extra.items():
        if value is not None:
            attrs.append(f"data-{key}={quoteattr(str(value))}")
    return " ".join(attrs)


def _svg_document(width: int, height: int, body: list[str]) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        *body,
        "</svg>",
        "",
    ]
    return "\n".join(lines)


def render_choropleth(regions: list[JoinedRegion], palette: Palette,
                      width_px: int = 960, height_px: int = 720) -> str:
    """Render joined regions as a choropleth with a legend.

    The legend band is appended below the map, so the document is taller
    than height_px by one row per distinct winning party.
    """
    if not regions:
        raise EmptyInput("no regions to render")
    _check_size(width_px, height_px)

    ordered = sorted(regions, key=lambda r: r.feature.region_id)
    bbox = bbox_union([r.feature.bbox for r in ordered])
    transform = _MapTransform(bbox, width_px, height_px)

    body = []
    for region in ordered:
        fill = palette.color_for(region.winner_party)
        attrs = _data_attrs(region.feature.region_id, region.feature.region_name, {
            "party": region.winner_party,
            "votes": region.votes,
            "seats": region.seats,
        })
        body.append(
            f'<path class="region" d="{_path_d(region.feature, transform)}" '
            f'fill="{fill}" fill-rule="evenodd" stroke="#333333" '
            f'stroke-width="0.5" {attrs}/>')

    parties = sorted({r.winner_party for r in ordered},
                     key=lambda p: (p.casefold(), p))
    legend_height = _LEGEND_PAD * 2 + _LEGEND_ROW * len(parties)
    body.append(f'<g class="legend" transform="translate({_LEGEND_PAD},{height_px + _LEGEND_PAD})">')
    for i, party in enumerate(parties):
        y = i * _LEGEND_ROW
        body.append(f'<rect x="0" y="{y}" width="{_SWATCH}" height="{_SWATCH}" '
                    f'fill="{palette.color_for(party)}" stroke="#333333"/>')
        body.append(f'<text x="{_SWATCH + 6}" y="{y + _SWATCH - 3}" '
                    f'font-family="sans-serif" font-size="12">{escape(party)}</text>')
    body.append("</g>")
    return _svg_document(width_px, height_px + legend_height, body)


def render_basemap(fs: FeatureSet, width_px: int = 960, height_px: int = 720) -> str:
    """Render regions without result data: all neutral gray, no legend."""
    if not len(fs):
        raise EmptyInput("no features to render")
    _check_size(width_px, height_px)

    ordered = sorted(fs, key=lambda f: f.region_id)
    bbox = bbox_union([f.bbox for f in ordered])
    transform = _MapTransform(bbox, width_px, height_px)
    body = []
    for feature in ordered:
        attrs = _data_attrs(feature.region_id, feature.region_name, {})
        body.append(
            f'<path class="region" d="{_path_d(feature, transform)}" '
            f'fill="{NEUTRAL_FILL}" fill-rule="evenodd" stroke="#333333" '
            f'stroke-width="0.5" {attrs}/>')
    return _svg_document(width_px, height_px, body)


def _check_size(width_px: int, height_px: int) -> None:
    if width_px < _MIN_SIZE or height_px < _MIN_SIZE:
        raise RenderError(f"canvas too small: {width_px}x{height_px} (min {_MIN_SIZE})")
