"""Fetch election result pages and parse their tables into typed rows.

Pages are retrieved through a pluggable transport so the same code path
serves live HTTP, recorded fixture files, and scripted test doubles.
Dynamic data endpoints are replayed as direct URLs returning HTML or JSON
fragments; a JSON fragment is mapped onto a table via a key-to-column map
from the site config.
"""

from __future__ import annotations

import json
import logging
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable

import yaml

from .models import ElectionResultRow, ElectionType, RegionLevel, TableKind

logger = logging.getLogger(__name__)


class IngestError(Exception):
    """Base class for scraping and parsing failures."""


class NoTableFound(IngestError):
    def __init__(self, selector: str):
        super().__init__(f"no table matched selector {selector!r}")
        self.selector = selector


class MalformedDocument(IngestError):
    pass


class MissingKeyColumn(IngestError):
    pass


class BadRegionId(IngestError):
    def __init__(self, row_index: int, cell: str):
        super().__init__(f"row {row_index}: cannot parse region id from {cell!r}")
        self.row_index = row_index


class TransportError(IngestError):
    """Non-timeout transport failure; never retried."""


class TransportTimeout(IngestError):
    """The transport gave up waiting; triggers a retry."""


class RetriesExhausted(IngestError):
    def __init__(self, url: str, attempts: int):
        super().__init__(f"{url}: no response after {attempts} attempts")
        self.url = url
        self.attempts = attempts


class ScrapeError(IngestError):
    """Fetch or parse failure annotated with the URL that caused it."""

    def __init__(self, url: str, cause: Exception):
        super().__init__(f"{url}: {cause}")
        self.url = url


@dataclass(frozen=True)
class FetchPolicy:
    """Retry schedule: attempt k waits min(base + (k-1)*increment, max) seconds.

    The effective timeout is recomputed from the attempt number, so it
    falls back to the base value for every new URL.
    """

    base_timeout: float = 5.0
    timeout_increment: float = 5.0
    max_timeout: float = 30.0
    max_attempts: int = 5
    politeness_delay: float = 0.5

    def __post_init__(self) -> None:
        if self.base_timeout <= 0 or self.timeout_increment <= 0 or self.max_timeout <= 0:
            raise ValueError("timeouts must be positive")
        if self.politeness_delay <= 0:
            raise ValueError("politeness_delay must be positive")
        if self.base_timeout > self.max_timeout:
            raise ValueError("base_timeout must not exceed max_timeout")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    def timeout_for_attempt(self, attempt: int) -> float:
        """Timeout for 1-based attempt number."""
        if attempt < 1:
            raise ValueError("attempts are 1-based")
        return min(self.base_timeout + (attempt - 1) * self.timeout_increment,
                   self.max_timeout)


@dataclass(frozen=True)
class RawTable:
    kind: TableKind
    header: list[str]
    rows: list[list[str]]
    source_url: str = ""

    def __post_init__(self) -> None:
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, header has {width}")


# --------------------------------------------------------------------------
# HTML table extraction

_SELECTOR_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9]*)?(?:([.#])([\w-]+))?$")


def _parse_selector(selector: str) -> tuple[str, str | None, str | None]:
    """Split 'table.cls' / 'table#id' / 'table' into (element, class, id)."""
    m = _SELECTOR_RE.match(selector.strip())
    if not m:
        raise ValueError(f"unsupported selector: {selector!r}")
    element = (m.group(1) or "table").lower()
    cls = ident = None
    if m.group(2) == ".":
        cls = m.group(3)
    elif m.group(2) == "#":
        ident = m.group(3)
    return element, cls, ident


class _OpenTable:
    __slots__ = ("attrs", "rows", "row", "cell", "cell_tags")

    def __init__(self, attrs: dict[str, str]):
        self.attrs = attrs
        self.rows: list[tuple[list[str], bool]] = []  # (cells, all_th)
        self.row: list[str] | None = None
        self.cell: list[str] | None = None
        self.cell_tags: list[str] = []

    def end_cell(self) -> None:
        if self.cell is not None and self.row is not None:
            self.row.append(" ".join("".join(self.cell).split()))
        self.cell = None

    def end_row(self) -> None:
        self.end_cell()
        if self.row is not None:
            all_th = bool(self.cell_tags) and all(t == "th" for t in self.cell_tags)
            self.rows.append((self.row, all_th))
        self.row = None
        self.cell_tags = []


class _TableCollector(HTMLParser):
    """Collects every <table> in document order; tolerant of tag soup."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tables: list[_OpenTable] = []
        self._stack: list[_OpenTable] = []

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag == "table":
            table = _OpenTable({k.lower(): (v or "") for k, v in attrs})
            self._stack.append(table)
            return
        if not self._stack:
            return
        top = self._stack[-1]
        if tag == "tr":
            top.end_row()
            top.row = []
        elif tag in ("td", "th"):
            if top.row is None:
                top.row = []
            top.end_cell()
            top.cell = []
            top.cell_tags.append(tag)

    def handle_endtag(self, tag):
        tag = tag.lower()
        if not self._stack:
            return
        top = self._stack[-1]
        if tag == "table":
            top.end_row()
            self.tables.append(self._stack.pop())
        elif tag == "tr":
            top.end_row()
        elif tag in ("td", "th"):
            top.end_cell()

    def handle_data(self, data):
        if self._stack and self._stack[-1].cell is not None:
            self._stack[-1].cell.append(data)

    def finish(self) -> list[_OpenTable]:
        # Unclosed tables are still usable; flush them in open order.
        while self._stack:
            top = self._stack.pop()
            top.end_row()
            self.tables.append(top)
        return self.tables


def _matches(table: _OpenTable, cls: str | None, ident: str | None) -> bool:
    if cls is not None:
        return cls in table.attrs.get("class", "").split()
    if ident is not None:
        return table.attrs.get("id") == ident
    return True


def parse_results_table(document: str | bytes, kind: TableKind,
                        selector: str = "table", source_url: str = "") -> RawTable:
    """Extract the first table matching ``selector`` as a RawTable.

    The header row (a leading all-<th> row, else the first row) is split
    from the data rows. Ragged data rows are padded or truncated to the
    header width with a warning rather than rejected; scraped markup is
    routinely ragged.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8", errors="replace")
    element, cls, ident = _parse_selector(selector)
    if element != "table":
        raise ValueError("only table selectors are supported")

    collector = _TableCollector()
    try:
        collector.feed(document)
        collector.close()
        tables = collector.finish()
    except Exception as exc:  # tokenizer gave up; surface as a declared error
        raise MalformedDocument(str(exc)) from exc

    for table in tables:
        if not _matches(table, cls, ident):
            continue
        rows = [cells for cells, _ in table.rows]
        if not rows:
            return RawTable(kind=kind, header=[], rows=[], source_url=source_url)
        header = rows[0]
        body = []
        for i, row in enumerate(rows[1:]):
            if len(row) < len(header):
                logger.warning("%s: row %d padded from %d to %d cells",
                               source_url or "<document>", i, len(row), len(header))
                row = row + [""] * (len(header) - len(row))
            elif len(row) > len(header):
                logger.warning("%s: row %d truncated from %d to %d cells",
                               source_url or "<document>", i, len(row), len(header))
                row = row[: len(header)]
            body.append(row)
        return RawTable(kind=kind, header=header, rows=body, source_url=source_url)
    raise NoTableFound(selector)


# --------------------------------------------------------------------------
# Row extraction

_ID_HEADERS = {"pruid", "cduid", "prid", "region_id", "regionid", "id"}
_NAME_HEADERS = {"province", "district", "region", "name", "prname", "cdname",
                 "region_name", "census division", "census_division"}
_COLUMN_HEADERS = {
    "votes": {"votes", "vote", "votes won", "number of votes"},
    "vote_share_pct": {"vote %", "vote share", "vote_share_pct", "% votes",
                       "vote share %", "votes %", "vote percentage"},
    "seats": {"seats", "seat", "seats won", "number of seats"},
    "seat_share_pct": {"seat %", "seat share", "seat_share_pct", "% seats",
                       "seat share %", "seats %", "seat percentage"},
    "candidates": {"candidates", "candidate", "number of candidates",
                   "# candidates"},
}
_WINNER_HEADERS = {"winner", "elected", "won", "is_winner"}
_TRUTHY_WINNER = {"1", "y", "yes", "true", "won", "winner", "elected", "x", "*"}

_SEPARATORS_RE = re.compile(r"[,\s  ]")


def _parse_int(cell: str) -> int | None:
    text = _SEPARATORS_RE.sub("", cell)
    if not text:
        return None
    try:
        return int(text)
    except ValueError:
        return None


def _parse_share(cell: str) -> float | None:
    text = _SEPARATORS_RE.sub("", cell).rstrip("%")
    if not text:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if 0.0 <= value <= 100.0 else None


def _header_index(header: list[str]) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, name in enumerate(header):
        key = " ".join(name.split()).lower()
        if key in _ID_HEADERS and "region_id" not in index:
            index["region_id"] = i
        elif key in _NAME_HEADERS and "region_name" not in index:
            index["region_name"] = i
        elif key == "party" and "party" not in index:
            index["party"] = i
        elif key in _WINNER_HEADERS and "is_winner" not in index:
            index["is_winner"] = i
        else:
            for field_name, names in _COLUMN_HEADERS.items():
                if key in names and field_name not in index:
                    index[field_name] = i
    return index


def rows_from_table(table: RawTable) -> list[ElectionResultRow]:
    """Convert a parsed table to typed rows.

    Numeric cells tolerate thousands separators; optional cells that do
    not parse become absent. A region id that does not parse is an error
    because the id is the join key downstream.
    """
    if table.kind is TableKind.PARTY_SUMMARY:
        raise ValueError("party summary tables carry no per-region rows")
    index = _header_index(table.header)
    if "region_id" not in index:
        raise MissingKeyColumn(f"no numeric-ID column in header {table.header!r}")
    if "party" not in index:
        raise MissingKeyColumn(f"no party column in header {table.header!r}")

    rows: list[ElectionResultRow] = []
    for i, cells in enumerate(table.rows):
        id_cell = cells[index["region_id"]]
        region_id = _parse_int(id_cell)
        if region_id is None or region_id <= 0:
            raise BadRegionId(i, id_cell)
        name = cells[index["region_name"]].strip() if "region_name" in index else ""
        party = cells[index["party"]].strip()
        if not party:
            raise ValueError(f"row {i}: empty party cell")

        def opt_int(field_name: str) -> int | None:
            if field_name not in index:
                return None
            value = _parse_int(cells[index[field_name]])
            return value if value is None or value >= 0 else None

        def opt_share(field_name: str) -> float | None:
            if field_name not in index:
                return None
            return _parse_share(cells[index[field_name]])

        winner = False
        if "is_winner" in index:
            winner = cells[index["is_winner"]].strip().lower() in _TRUTHY_WINNER

        rows.append(ElectionResultRow(
            region_id=region_id,
            region_name=name,
            party=party,
            votes=opt_int("votes"),
            vote_share_pct=opt_share("vote_share_pct"),
            seats=opt_int("seats"),
            seat_share_pct=opt_share("seat_share_pct"),
            candidates=opt_int("candidates"),
            is_winner=winner,
        ))
    return rows


# --------------------------------------------------------------------------
# Transports and retrying

Transport = Callable[[str, float], str]


class UrlTransport:
    """Live HTTP transport; timeouts map to TransportTimeout."""

    is_live = True

    def __call__(self, url: str, timeout: float) -> str:
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                charset = resp.headers.get_content_charset() or "utf-8"
                return resp.read().decode(charset, errors="replace")
        except TimeoutError as exc:
            raise TransportTimeout(str(exc)) from exc
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, TimeoutError):
                raise TransportTimeout(str(exc)) from exc
            raise TransportError(str(exc)) from exc
        except OSError as exc:
            raise TransportError(str(exc)) from exc


def url_slug(url: str) -> str:
    """Filesystem-safe name for a URL, used to locate fixture files."""
    stripped = re.sub(r"^[a-z+]+://", "", url.strip())
    return re.sub(r"[^A-Za-z0-9]+", "_", stripped).strip("_")


class FixtureTransport:
    """Replays recorded responses from a directory keyed by URL slug.

    Looks for ``<slug>``, ``<slug>.html`` or ``<slug>.json`` under the
    root. Never sleeps, never times out.
    """

    is_live = False

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def __call__(self, url: str, timeout: float) -> str:
        slug = url_slug(url)
        for name in (slug, f"{slug}.html", f"{slug}.json"):
            path = self.root / name
            if path.is_file():
                return path.read_text(encoding="utf-8")
        raise TransportError(f"no fixture for {url} (looked for {slug}[.html|.json]) "
                             f"under {self.root}")


def fetch_with_retry(url: str, policy: FetchPolicy, fetcher: Transport) -> str:
    """Fetch ``url``, retrying timeouts on the policy's widening schedule.

    Attempt k uses min(base + (k-1)*increment, max) as its timeout. Only
    timeouts are retried; any other transport failure propagates at once.
    """
    for attempt in range(1, policy.max_attempts + 1):
        timeout = policy.timeout_for_attempt(attempt)
        try:
            return fetcher(url, timeout)
        except TransportTimeout:
            logger.warning("%s: timeout on attempt %d/%d (%.1fs)",
                           url, attempt, policy.max_attempts, timeout)
    raise RetriesExhausted(url, policy.max_attempts)


# --------------------------------------------------------------------------
# Site configuration and election scraping

@dataclass(frozen=True)
class PageSpec:
    url: str
    kind: TableKind
    format: str = "html"  # "html" or "json"
    json_columns: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ElectionSource:
    election_type: ElectionType
    year: int
    level: RegionLevel
    pages: tuple[PageSpec, ...]


@dataclass
class SiteConfig:
    """Parsed site config: per-kind table selectors and per-election pages."""

    selectors: dict[TableKind, str]
    elections: list[ElectionSource]

    DEFAULT_SELECTOR = "table"

    @classmethod
    def load(cls, path: str | Path) -> "SiteConfig":
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "SiteConfig":
        selectors: dict[TableKind, str] = {}
        for key, entry in (data.get("tables") or {}).items():
            kind = _table_kind(key)
            selectors[kind] = entry["selector"] if isinstance(entry, dict) else str(entry)
        elections = []
        for entry in data.get("elections") or []:
            pages = []
            for page in entry.get("pages") or []:
                pages.append(PageSpec(
                    url=page["url"],
                    kind=_table_kind(page.get("kind", "province")),
                    format=page.get("format", "html"),
                    json_columns=dict(page.get("json_columns") or {}),
                ))
            elections.append(ElectionSource(
                election_type=ElectionType.parse(entry["type"]),
                year=int(entry["year"]),
                level=RegionLevel.parse(entry.get("level", "province")),
                pages=tuple(pages),
            ))
        return cls(selectors=selectors, elections=elections)

    def selector_for(self, kind: TableKind) -> str:
        return self.selectors.get(kind, self.DEFAULT_SELECTOR)

    def source_for(self, election_type: ElectionType, year: int) -> ElectionSource | None:
        for source in self.elections:
            if source.election_type is election_type and source.year == year:
                return source
        return None


def _table_kind(key: str) -> TableKind:
    aliases = {
        "province": TableKind.PROVINCE_LEVEL,
        "province_level": TableKind.PROVINCE_LEVEL,
        "district": TableKind.DISTRICT_LEVEL,
        "district_level": TableKind.DISTRICT_LEVEL,
        "party_summary": TableKind.PARTY_SUMMARY,
    }
    normalized = key.strip().lower()
    if normalized not in aliases:
        raise ValueError(f"unknown table kind: {key!r}")
    return aliases[normalized]


def table_from_json(payload: str, kind: TableKind, json_columns: dict[str, str],
                    source_url: str = "") -> RawTable:
    """Map a JSON fragment (list of objects) onto a RawTable.

    ``json_columns`` maps JSON keys to column names; column order follows
    the mapping's order. Payloads wrapped as {"rows": [...]} or
    {"data": [...]} are unwrapped.
    """
    if not json_columns:
        raise ValueError("a JSON page needs a json_columns mapping")
    try:
        data = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"bad JSON fragment: {exc}") from exc
    if isinstance(data, dict):
        for wrapper in ("rows", "data"):
            if isinstance(data.get(wrapper), list):
                data = data[wrapper]
                break
    if not isinstance(data, list):
        raise MalformedDocument("JSON fragment is not a list of records")

    header = list(json_columns.values())
    rows = []
    for record in data:
        if not isinstance(record, dict):
            raise MalformedDocument("JSON record is not an object")
        rows.append([_json_cell(record.get(key)) for key in json_columns])
    return RawTable(kind=kind, header=header, rows=rows, source_url=source_url)


def _json_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def scrape_election(election_type: ElectionType, year: int, source: SiteConfig,
                    policy: FetchPolicy, fetcher: Transport,
                    sleep: Callable[[float], None] = time.sleep) -> list[ElectionResultRow]:
    """Fetch and parse every configured page for one election, in page order.

    Consecutive requests through a live transport are separated by the
    policy's politeness delay; replayed fixtures skip the delay.
    """
    if not (1867 <= year <= time.gmtime().tm_year):
        raise ValueError(f"year out of range: {year}")
    election = source.source_for(election_type, year)
    if election is None or not election.pages:
        return []

    live = bool(getattr(fetcher, "is_live", False))
    rows: list[ElectionResultRow] = []
    for i, page in enumerate(election.pages):
        if live and i > 0:
            sleep(policy.politeness_delay)
        try:
            body = fetch_with_retry(page.url, policy, fetcher)
            if page.format == "json":
                table = table_from_json(body, page.kind, page.json_columns, page.url)
            else:
                table = parse_results_table(body, page.kind,
                                            source.selector_for(page.kind), page.url)
            rows.extend(rows_from_table(table))
        except ScrapeError:
            raise
        except Exception as exc:
            raise ScrapeError(page.url, exc) from exc
    return rows
