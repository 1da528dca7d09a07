"""Shapefile geometry: binary .shp/.dbf parsing, simplification, GeoJSON.

The .shp reader implements the public ESRI layout for Polygon (type 5)
records: a 100-byte mixed-endian header, then per-record big-endian
record headers framing little-endian geometry. Attributes come from the
paired xBase .dbf table; only Character and Numeric fields are read,
which is all the pipeline needs for ids and names. Coordinates pass
through unprojected.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

from .models import RegionLevel

SHAPE_POLYGON = 5
_FILE_CODE = 9994
_VERSION = 1000

# Guard against absurd counts before allocating; a fuzzed length field
# must fail cleanly, not exhaust memory.
_MAX_RECORD_POINTS = 10_000_000


class GeometryError(Exception):
    pass


class BadMagic(GeometryError):
    pass


class UnsupportedShapeType(GeometryError):
    def __init__(self, shape_type: int):
        super().__init__(f"unsupported shape type {shape_type} (only Polygon/5)")
        self.shape_type = shape_type


class RecordCountMismatch(GeometryError):
    def __init__(self, shp_count: int, dbf_count: int):
        super().__init__(f".shp has {shp_count} records, .dbf has {dbf_count}")


class FieldNotFound(GeometryError):
    def __init__(self, name: str, available: list[str]):
        super().__init__(f"field {name!r} not in dbf (have {available})")
        self.name = name


class MalformedShapefile(GeometryError):
    pass


class JsonMalformed(GeometryError):
    pass


class MissingIdProperty(GeometryError):
    pass


BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class Ring:
    """A closed ring of (x, y) points; first equals last, length >= 4."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 4:
            raise ValueError(f"ring needs >= 4 points (with closure), got {len(self.points)}")
        if self.points[0] != self.points[-1]:
            raise ValueError("ring is not closed")

    def bbox(self) -> BBox:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return (min(xs), min(ys), max(xs), max(ys))


def bbox_union(boxes: list[BBox]) -> BBox:
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


@dataclass(frozen=True)
class RegionFeature:
    """One region: numeric id, name, rings (first outer, rest holes)."""

    region_id: int
    region_name: str
    rings: tuple[Ring, ...]
    bbox: BBox

    def __post_init__(self) -> None:
        if self.region_id <= 0:
            raise ValueError(f"region_id must be positive, got {self.region_id}")
        if not self.rings:
            raise ValueError("feature needs at least one ring")
        xmin, ymin, xmax, ymax = self.bbox
        for ring in self.rings:
            for x, y in ring.points:
                if not (xmin <= x <= xmax and ymin <= y <= ymax):
                    raise ValueError(f"point ({x}, {y}) outside bbox {self.bbox}")

    @classmethod
    def from_rings(cls, region_id: int, region_name: str,
                   rings: tuple[Ring, ...] | list[Ring]) -> "RegionFeature":
        rings = tuple(rings)
        return cls(region_id=region_id, region_name=region_name, rings=rings,
                   bbox=bbox_union([r.bbox() for r in rings]))


@dataclass(frozen=True)
class FeatureSet:
    features: tuple[RegionFeature, ...]
    level: RegionLevel

    def __post_init__(self) -> None:
        seen = set()
        for feature in self.features:
            if feature.region_id in seen:
                raise ValueError(f"duplicate region_id {feature.region_id}")
            seen.add(feature.region_id)

    def __iter__(self):
        return iter(self.features)

    def __len__(self) -> int:
        return len(self.features)

    def ids(self) -> set[int]:
        return {f.region_id for f in self.features}


# --------------------------------------------------------------------------
# .shp / .dbf parsing

class _Cursor:
    """Bounds-checked reader over bytes; short reads raise MalformedShapefile."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise MalformedShapefile(
                f"truncated: wanted {n} bytes at offset {self.pos}, "
                f"file has {len(self.data)}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def remaining(self) -> int:
        return len(self.data) - self.pos


def _parse_shp(shp: bytes) -> list[tuple[BBox, list[list[tuple[float, float]]]]]:
    cur = _Cursor(shp)
    (file_code,) = cur.unpack(">i")
    if file_code != _FILE_CODE:
        raise BadMagic(f"file code {file_code}, expected {_FILE_CODE}")
    cur.take(20)  # unused
    cur.unpack(">i")  # file length; record framing is authoritative below
    (version,) = cur.unpack("<i")
    if version != _VERSION:
        raise BadMagic(f"version {version}, expected {_VERSION}")
    (shape_type,) = cur.unpack("<i")
    if shape_type != SHAPE_POLYGON:
        raise UnsupportedShapeType(shape_type)
    cur.take(64)  # file bbox + z/m ranges

    records = []
    while cur.remaining() > 0:
        _, content_words = cur.unpack(">ii")
        if content_words < 2:
            raise MalformedShapefile(f"record content of {content_words} words")
        body = _Cursor(cur.take(content_words * 2))
        (rec_type,) = body.unpack("<i")
        if rec_type != SHAPE_POLYGON:
            raise UnsupportedShapeType(rec_type)
        xmin, ymin, xmax, ymax = body.unpack("<4d")
        n_parts, n_points = body.unpack("<ii")
        if not (1 <= n_parts <= _MAX_RECORD_POINTS and 0 <= n_points <= _MAX_RECORD_POINTS):
            raise MalformedShapefile(f"implausible counts: {n_parts} parts, {n_points} points")
        if body.remaining() < n_parts * 4 + n_points * 16:
            raise MalformedShapefile("record shorter than its part/point counts")
        parts = list(body.unpack(f"<{n_parts}i"))
        flat = body.unpack(f"<{2 * n_points}d")
        points = [(flat[2 * i], flat[2 * i + 1]) for i in range(n_points)]

        prev = -1
        for start in parts:
            if start <= prev or start >= n_points:
                raise MalformedShapefile(f"bad part index {start} of {n_points} points")
            prev = start
        if parts[0] != 0:
            raise MalformedShapefile(f"first part index {parts[0]}, expected 0")

        rings = []
        bounds = parts + [n_points]
        for i in range(n_parts):
            rings.append(points[bounds[i]:bounds[i + 1]])
        _verify_bbox((xmin, ymin, xmax, ymax), points)
        records.append(((xmin, ymin, xmax, ymax), rings))
    return records


def _verify_bbox(bbox: BBox, points: list[tuple[float, float]]) -> None:
    xmin, ymin, xmax, ymax = bbox
    if any(map(math.isnan, bbox)):
        raise MalformedShapefile("NaN in record bbox")
    for x, y in points:
        if math.isnan(x) or math.isnan(y):
            raise MalformedShapefile("NaN coordinate")
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            raise MalformedShapefile(
                f"point ({x}, {y}) outside declared bbox {bbox}")


def _parse_dbf(dbf: bytes) -> tuple[list[tuple[str, str]], list[dict[str, str]]]:
    """Returns (fields as (name, type), records as name->text)."""
    cur = _Cursor(dbf)
    cur.take(4)  # version byte + last-update date; not validated
    (n_records,) = cur.unpack("<I")
    (header_size, record_size) = cur.unpack("<HH")
    cur.take(20)

    if header_size < 33 or (header_size - 33) % 32 != 0:
        raise MalformedShapefile(f"bad dbf header size {header_size}")
    n_fields = (header_size - 33) // 32
    fields: list[tuple[str, str, int]] = []
    for _ in range(n_fields):
        desc = cur.take(32)
        raw_name = desc[:11].split(b"\x00", 1)[0]
        name = raw_name.decode("utf-8", errors="replace").strip()
        ftype = chr(desc[11])
        length = desc[16]
        if ftype not in ("C", "N"):
            raise MalformedShapefile(f"unsupported dbf field type {ftype!r} for {name!r}")
        fields.append((name, ftype, length))
    if cur.take(1) != b"\r":
        raise MalformedShapefile("dbf field descriptors not terminated by 0x0D")
    if record_size != 1 + sum(length for _, _, length in fields):
        raise MalformedShapefile("dbf record size does not match field lengths")
    if n_records > _MAX_RECORD_POINTS:
        raise MalformedShapefile(f"implausible dbf record count {n_records}")

    records = []
    for _ in range(n_records):
        raw = _Cursor(cur.take(record_size))
        raw.take(1)  # deletion flag; writer never deletes
        record = {}
        for name, _, length in fields:
            record[name] = raw.take(length).decode("utf-8", errors="replace").strip()
        records.append(record)
    return [(name, ftype) for name, ftype, _ in fields], records


def parse_shapefile(shp: bytes, dbf: bytes, id_field: str, name_field: str,
                    level: RegionLevel = RegionLevel.PROVINCE) -> FeatureSet:
    """Parse paired .shp/.dbf bytes into a FeatureSet.

    The record-header bbox is verified against the actual points, ring
    part indices are honored, and the dbf record count must match the
    shape count. Any corruption surfaces as a GeometryError subclass.
    """
    shapes = _parse_shp(shp)
    fields, records = _parse_dbf(dbf)
    if len(records) != len(shapes):
        raise RecordCountMismatch(len(shapes), len(records))
    field_names = [name for name, _ in fields]
    if id_field not in field_names:
        raise FieldNotFound(id_field, field_names)
    if name_field not in field_names:
        raise FieldNotFound(name_field, field_names)

    features = []
    for (bbox, raw_rings), attrs in zip(shapes, records):
        try:
            region_id = int(attrs[id_field])
        except ValueError:
            raise MalformedShapefile(
                f"non-integer {id_field} value {attrs[id_field]!r}") from None
        try:
            rings = tuple(Ring(tuple(points)) for points in raw_rings)
            feature = RegionFeature(region_id=region_id,
                                    region_name=attrs[name_field],
                                    rings=rings, bbox=bbox)
        except ValueError as exc:
            raise MalformedShapefile(str(exc)) from exc
        features.append(feature)
    try:
        return FeatureSet(features=tuple(features), level=level)
    except ValueError as exc:
        raise MalformedShapefile(str(exc)) from exc


# --------------------------------------------------------------------------
# Simplification

def _triangle_area(a, b, c) -> float:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) / 2.0


def _simplify_ring(ring: Ring, retain: float) -> Ring:
    # Work on the distinct vertices; the closure point is re-added at the
    # end. All vertices are candidates, treated cyclically.
    pts = list(ring.points[:-1])
    target = max(3, math.ceil(retain * len(pts)))
    while len(pts) > target:
        n = len(pts)
        best_index = 0
        best_area = math.inf
        for i in range(n):
            area = _triangle_area(pts[i - 1], pts[i], pts[(i + 1) % n])
            if area < best_area:  # strict: ties keep the lowest index
                best_area = area
                best_index = i
        pts.pop(best_index)
    return Ring(tuple(pts) + (pts[0],))


def simplify(fs: FeatureSet, retain: float) -> FeatureSet:
    """Visvalingam-Whyatt effective-area simplification, per ring.

    Repeatedly removes the vertex whose triangle with its current
    neighbours has minimal area, until ceil(retain * vertex_count)
    distinct vertices remain (never fewer than 3). retain=1.0 is the
    identity. Adjacent features are simplified independently, so shared
    borders may develop small seams.
    """
    if not (0.0 < retain <= 1.0):
        raise ValueError(f"retain must be in (0, 1], got {retain}")
    if retain == 1.0:
        return fs
    features = []
    for feature in fs:
        rings = tuple(_simplify_ring(ring, retain) for ring in feature.rings)
        features.append(RegionFeature.from_rings(feature.region_id,
                                                 feature.region_name, rings))
    return FeatureSet(features=tuple(features), level=fs.level)


# --------------------------------------------------------------------------
# GeoJSON conversion (RFC 7946)

_ID_PROPERTY = {RegionLevel.PROVINCE: "PRUID", RegionLevel.CENSUS_DIVISION: "CDUID"}
_NAME_PROPERTY = {RegionLevel.PROVINCE: "PRNAME", RegionLevel.CENSUS_DIVISION: "CDNAME"}


def _round6(value: float) -> float:
    return round(value, 6)


def to_geojson(fs: FeatureSet) -> str:
    """Serialize as a FeatureCollection; coordinates at 6 decimal places."""
    id_key = _ID_PROPERTY[fs.level]
    name_key = _NAME_PROPERTY[fs.level]
    features = []
    for feature in fs:
        coordinates = [[[_round6(x), _round6(y)] for x, y in ring.points]
                       for ring in feature.rings]
        features.append({
            "type": "Feature",
            "bbox": [_round6(v) for v in feature.bbox],
            "properties": {id_key: str(feature.region_id),
                           name_key: feature.region_name},
            "geometry": {"type": "Polygon", "coordinates": coordinates},
        })
    collection = {"type": "FeatureCollection", "features": features}
    return json.dumps(collection, ensure_ascii=False)


def from_geojson(text: str) -> FeatureSet:
    """Parse a FeatureCollection whose features carry PRUID or CDUID.

    MultiPolygon geometries are accepted; their rings are flattened in
    order (rendering uses the even-odd rule, so outer/hole distinction
    survives flattening).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonMalformed(str(exc)) from exc
    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise JsonMalformed("not a FeatureCollection")
    raw_features = data.get("features")
    if not isinstance(raw_features, list):
        raise JsonMalformed("features is not a list")

    level: RegionLevel | None = None
    features = []
    for raw in raw_features:
        if not isinstance(raw, dict):
            raise JsonMalformed("feature is not an object")
        properties = raw.get("properties") or {}
        feature_level, region_id = _feature_identity(properties)
        if level is None:
            level = feature_level
        elif level is not feature_level:
            raise JsonMalformed("mixed PRUID/CDUID features in one collection")
        name = properties.get(_NAME_PROPERTY[feature_level]) or properties.get("name") or ""

        geometry = raw.get("geometry") or {}
        rings = _geometry_rings(geometry)
        raw_bbox = raw.get("bbox")
        try:
            ring_objs = tuple(Ring(tuple((float(x), float(y)) for x, y in ring))
                              for ring in rings)
            if isinstance(raw_bbox, list) and len(raw_bbox) == 4:
                bbox = tuple(float(v) for v in raw_bbox)
                feature = RegionFeature(region_id=region_id, region_name=str(name),
                                        rings=ring_objs, bbox=bbox)
            else:
                feature = RegionFeature.from_rings(region_id, str(name), ring_objs)
        except (TypeError, ValueError) as exc:
            raise JsonMalformed(f"feature {region_id}: {exc}") from exc
        features.append(feature)

    if level is None:
        raise JsonMalformed("empty FeatureCollection")
    try:
        return FeatureSet(features=tuple(features), level=level)
    except ValueError as exc:
        raise JsonMalformed(str(exc)) from exc


def _feature_identity(properties: dict) -> tuple[RegionLevel, int]:
    for level, key in _ID_PROPERTY.items():
        if key in properties:
            try:
                return level, int(properties[key])
            except (TypeError, ValueError):
                raise MissingIdProperty(
                    f"{key} value {properties[key]!r} is not an integer") from None
    raise MissingIdProperty(f"feature properties lack PRUID/CDUID: "
                            f"{sorted(map(str, properties))}")


def _geometry_rings(geometry: dict) -> list:
    gtype = geometry.get("type")
    coordinates = geometry.get("coordinates")
    if not isinstance(coordinates, list):
        raise JsonMalformed("geometry has no coordinate list")
    if gtype == "Polygon":
        return coordinates
    if gtype == "MultiPolygon":
        return [ring for polygon in coordinates for ring in polygon]
    raise JsonMalformed(f"unsupported geometry type {gtype!r}")
