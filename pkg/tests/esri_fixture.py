"""Independent shapefile fixture writer.

Assembles .shp/.dbf bytes directly from the published ESRI/xBase layout:
big-endian file code and record headers, little-endian version, shape
type and geometry, fixed-width dbf records. Deliberately shares no code
with the parser under test; this is the oracle side of the round trip.
"""

from __future__ import annotations

import struct

Point = tuple[float, float]
Rings = list[list[Point]]  # closed rings: first point repeated at the end


def write_shp(polygons: list[Rings]) -> bytes:
    records = bytearray()
    all_points: list[Point] = []
    for number, rings in enumerate(polygons, start=1):
        points = [p for ring in rings for p in ring]
        all_points.extend(points)
        parts = []
        offset = 0
        for ring in rings:
            parts.append(offset)
            offset += len(ring)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]

        content = struct.pack("<i", 5)  # Polygon
        content += struct.pack("<4d", min(xs), min(ys), max(xs), max(ys))
        content += struct.pack("<ii", len(parts), len(points))
        content += struct.pack(f"<{len(parts)}i", *parts)
        for x, y in points:
            content += struct.pack("<dd", x, y)
        assert len(content) % 2 == 0
        records += struct.pack(">ii", number, len(content) // 2)
        records += content

    if all_points:
        xs = [p[0] for p in all_points]
        ys = [p[1] for p in all_points]
        file_box = (min(xs), min(ys), max(xs), max(ys))
    else:
        file_box = (0.0, 0.0, 0.0, 0.0)

    header = struct.pack(">i", 9994)              # file code, big-endian
    header += b"\x00" * 20                        # unused
    header += struct.pack(">i", (100 + len(records)) // 2)  # length in words
    header += struct.pack("<i", 1000)             # version, little-endian
    header += struct.pack("<i", 5)                # shape type Polygon
    header += struct.pack("<4d", *file_box)
    header += struct.pack("<4d", 0.0, 0.0, 0.0, 0.0)  # z/m ranges
    assert len(header) == 100
    return bytes(header) + bytes(records)


FieldSpec = tuple[str, str, int]  # (name, 'C' or 'N', byte width)


def write_dbf(fields: list[FieldSpec], records: list[dict]) -> bytes:
    record_size = 1 + sum(width for _, _, width in fields)
    header_size = 32 + 32 * len(fields) + 1

    out = bytearray()
    out += bytes([0x03, 95, 7, 26])               # version + last-update date
    out += struct.pack("<I", len(records))
    out += struct.pack("<HH", header_size, record_size)
    out += b"\x00" * 20

    for name, ftype, width in fields:
        descriptor = name.encode("ascii").ljust(11, b"\x00")
        descriptor += ftype.encode("ascii")
        descriptor += b"\x00" * 4
        descriptor += bytes([width, 0])
        descriptor += b"\x00" * 14
        assert len(descriptor) == 32
        out += descriptor
    out += b"\r"

    for record in records:
        out += b" "  # not deleted
        for name, ftype, width in fields:
            raw = str(record[name]).encode("utf-8")
            if len(raw) > width:
                raise ValueError(f"{name} value too wide: {record[name]!r}")
            out += raw.rjust(width) if ftype == "N" else raw.ljust(width)
    out += b"\x1a"
    return bytes(out)


def square_ring(x: float, y: float, size: float = 1.0) -> list[Point]:
    return [(x, y), (x + size, y), (x + size, y + size), (x, y + size), (x, y)]


def synthetic_shapefile(entries: list[tuple[int, str]],
                        id_field: str = "PRUID",
                        name_field: str = "PRNAME") -> tuple[bytes, bytes]:
    """One unit square per (region_id, name), laid out on a grid."""
    polygons = []
    records = []
    for i, (region_id, name) in enumerate(entries):
        x = float((i % 5) * 2)
        y = float((i // 5) * 2)
        polygons.append([square_ring(x, y)])
        records.append({id_field: region_id, name_field: name})
    shp = write_shp(polygons)
    dbf = write_dbf([(id_field, "N", 9), (name_field, "C", 60)], records)
    return shp, dbf
