"""CSV persistence for election rows and the catalog that indexes them.

Files are named ``<election-type>_<year>.csv`` with an ``_cd`` suffix for
census-division-level tables. The CSV schema below is the pipeline's
canonical interchange format: UTF-8, RFC 4180 quoting, absent numeric
fields as empty strings (unknown is not zero).
"""

from __future__ import annotations

import csv
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .models import ElectionResultRow, ElectionType, RegionLevel

logger = logging.getLogger(__name__)

CSV_HEADER = ["region_id", "region_name", "party", "votes", "vote_share_pct",
              "seats", "seat_share_pct", "candidates", "is_winner"]

_FILENAME_RE = re.compile(r"^(federal|provincial)_(\d{4})(_cd)?\.csv$")


class DatastoreError(Exception):
    pass


class RefusedEmpty(DatastoreError):
    pass


class HeaderMismatch(DatastoreError):
    pass


class RowParseError(DatastoreError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateElection(DatastoreError):
    pass


def election_csv_name(election_type: ElectionType, year: int,
                      region_level: RegionLevel) -> str:
    suffix = "_cd" if region_level is RegionLevel.CENSUS_DIVISION else ""
    return f"{election_type.value}_{year}{suffix}.csv"


def _format_optional(value) -> str:
    return "" if value is None else str(value)


def write_election_csv(rows: list[ElectionResultRow], election_type: ElectionType,
                       year: int, region_level: RegionLevel, root: str | Path,
                       allow_empty: bool = False) -> Path:
    """Write rows in input order; returns the file path.

    The file is written to a temp name and atomically renamed into place
    so concurrent readers never observe a partial file.
    """
    if not rows and not allow_empty:
        raise RefusedEmpty("refusing to write an empty election without allow_empty")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    path = root / election_csv_name(election_type, year, region_level)

    fd, tmp_name = tempfile.mkstemp(dir=root, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for row in rows:
                writer.writerow([
                    row.region_id,
                    row.region_name,
                    row.party,
                    _format_optional(row.votes),
                    _format_optional(row.vote_share_pct),
                    _format_optional(row.seats),
                    _format_optional(row.seat_share_pct),
                    _format_optional(row.candidates),
                    "true" if row.is_winner else "false",
                ])
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def _parse_optional_int(cell: str, line: int, field: str) -> int | None:
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        raise RowParseError(line, f"bad {field}: {cell!r}") from None


def _parse_optional_float(cell: str, line: int, field: str) -> float | None:
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise RowParseError(line, f"bad {field}: {cell!r}") from None


def read_election_csv(path: str | Path) -> list[ElectionResultRow]:
    """Inverse of write_election_csv: read(write(rows)) == rows."""
    rows: list[ElectionResultRow] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch(f"{path}: empty file") from None
        if header != CSV_HEADER:
            raise HeaderMismatch(f"{path}: header {header!r} != {CSV_HEADER!r}")
        for cells in reader:
            line = reader.line_num
            if len(cells) != len(CSV_HEADER):
                raise RowParseError(line, f"expected {len(CSV_HEADER)} fields, got {len(cells)}")
            flag = cells[8]
            if flag not in ("true", "false"):
                raise RowParseError(line, f"bad is_winner: {flag!r}")
            try:
                row = ElectionResultRow(
                    region_id=int(cells[0]),
                    region_name=cells[1],
                    party=cells[2],
                    votes=_parse_optional_int(cells[3], line, "votes"),
                    vote_share_pct=_parse_optional_float(cells[4], line, "vote_share_pct"),
                    seats=_parse_optional_int(cells[5], line, "seats"),
                    seat_share_pct=_parse_optional_float(cells[6], line, "seat_share_pct"),
                    candidates=_parse_optional_int(cells[7], line, "candidates"),
                    is_winner=flag == "true",
                )
            except ValueError as exc:
                raise RowParseError(line, str(exc)) from None
            rows.append(row)
    return rows


@dataclass(frozen=True)
class CatalogEntry:
    election_type: ElectionType
    year: int
    region_level: RegionLevel
    path: Path
    row_count: int


@dataclass(frozen=True)
class ElectionCatalog:
    entries: tuple[CatalogEntry, ...]

    def __post_init__(self) -> None:
        seen: dict[tuple, Path] = {}
        for entry in self.entries:
            key = (entry.election_type, entry.year, entry.region_level)
            if key in seen:
                raise DuplicateElection(
                    f"duplicate election {key}: {seen[key]} and {entry.path}")
            seen[key] = entry.path

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def find(self, election_type: ElectionType, year: int,
             region_level: RegionLevel | None = None) -> list[CatalogEntry]:
        matches = [e for e in self.entries
                   if e.election_type is election_type and e.year == year]
        if region_level is not None:
            matches = [e for e in matches if e.region_level is region_level]
        return matches

    def of_type(self, election_type: ElectionType) -> list[CatalogEntry]:
        return [e for e in self.entries if e.election_type is election_type]


def build_catalog(root: str | Path) -> ElectionCatalog:
    """Index every conventionally-named CSV under root (recursively).

    Non-matching files are skipped with a warning; every matched file is
    parsed so a catalog entry implies a readable file.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatastoreError(f"not a directory: {root}")
    entries = []
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        if path.suffix in (".tmp", ".lock"):
            continue
        m = _FILENAME_RE.match(path.name)
        if not m:
            logger.warning("ignoring non-catalog file: %s", path)
            continue
        rows = read_election_csv(path)
        entries.append(CatalogEntry(
            election_type=ElectionType(m.group(1)),
            year=int(m.group(2)),
            region_level=RegionLevel.CENSUS_DIVISION if m.group(3) else RegionLevel.PROVINCE,
            path=path,
            row_count=len(rows),
        ))
    entries.sort(key=lambda e: (e.election_type.value, e.year, e.region_level.value))
    return ElectionCatalog(entries=tuple(entries))
