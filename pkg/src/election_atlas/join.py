"""Merge election rows with geometry on numeric region ids.

Region names are never used as join keys; scraped names carry dates,
bilingual alternates and stray whitespace, and a name-keyed join silently
drops regions and shreds the rendered map. Names are normalized here only
to make diagnostics readable.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import yaml

from .geometry import FeatureSet, RegionFeature
from .models import ElectionResultRow, RegionLevel

logger = logging.getLogger(__name__)


class JoinError(Exception):
    pass


class LevelMismatch(JoinError):
    pass


class StrictJoinFailure(JoinError):
    def __init__(self, report: "JoinReport"):
        super().__init__(
            f"unmatched ids: geometry-only {report.unmatched_geometry_ids}, "
            f"results-only {report.unmatched_result_ids}")
        self.report = report


@dataclass(frozen=True)
class JoinedRegion:
    feature: RegionFeature
    winner_party: str
    votes: int | None = None
    vote_share_pct: float | None = None
    seats: int | None = None
    seat_share_pct: float | None = None
    candidates: int | None = None

    def __post_init__(self) -> None:
        if not self.winner_party:
            raise ValueError("winner_party must be non-empty")


@dataclass(frozen=True)
class JoinReport:
    matched: int
    unmatched_geometry_ids: tuple[int, ...]
    unmatched_result_ids: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "unmatched_geometry_ids": list(self.unmatched_geometry_ids),
            "unmatched_result_ids": list(self.unmatched_result_ids),
        }

    def to_text(self) -> str:
        """Same structured-text format as the config files, for CI logs."""
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


_DATE_SUFFIX_RE = re.compile(r"\s*\([^()]*\)\s*$")


def normalize_region_name(name: str) -> str:
    """Diagnostic-only normalization; never a join key.

    Trims and collapses whitespace, drops a trailing parenthesized
    suffix such as an election date, and keeps only the first of a
    slash-separated bilingual pair.
    """
    cleaned = " ".join(name.split())
    cleaned = _DATE_SUFFIX_RE.sub("", cleaned)
    cleaned = cleaned.split("/", 1)[0]
    return cleaned.strip()


def winning_row(rows: list[ElectionResultRow]) -> ElectionResultRow:
    """Pick the winning row: is_winner, then seats, then votes, then name.

    Absent seats or votes lose to any present value. The alphabetical
    tiebreak is a declared convention to keep renders reproducible; it is
    logged because it means the data did not determine a winner.
    """
    if not rows:
        raise JoinError("no rows to derive a winner from")
    candidates = [r for r in rows if r.is_winner] or rows

    def best_by(rows_in, key):
        present = [r for r in rows_in if key(r) is not None]
        if not present:
            return rows_in
        top = max(key(r) for r in present)
        return [r for r in present if key(r) == top]

    candidates = best_by(candidates, lambda r: r.seats)
    candidates = best_by(candidates, lambda r: r.votes)
    if len(candidates) > 1:
        winner = min(candidates, key=lambda r: r.party)
        logger.warning("region %d: tie between %s; picking %r alphabetically",
                       winner.region_id, sorted(r.party for r in candidates),
                       winner.party)
        return winner
    return candidates[0]


def winning_rows_by_region(rows: list[ElectionResultRow]) -> dict[int, ElectionResultRow]:
    by_region: dict[int, list[ElectionResultRow]] = {}
    for row in rows:
        by_region.setdefault(row.region_id, []).append(row)
    return {region_id: winning_row(group) for region_id, group in by_region.items()}


def merge_results_with_geometry(
    rows: list[ElectionResultRow],
    fs: FeatureSet,
    strict: bool = False,
    level: RegionLevel | None = None,
) -> tuple[list[JoinedRegion], JoinReport]:
    """Attach each feature's winning row, joining on region_id only.

    Returns joined regions in feature order plus a report of ids present
    on only one side. With strict=True any unmatched id is an error,
    which is what keeps a missing polygon from shredding the map.
    """
    if level is not None and level is not fs.level:
        raise LevelMismatch(f"rows are {level.value}, geometry is {fs.level.value}")

    winners = winning_rows_by_region(rows)
    joined: list[JoinedRegion] = []
    unmatched_geometry: list[int] = []
    for feature in fs:
        row = winners.get(feature.region_id)
        if row is None:
            unmatched_geometry.append(feature.region_id)
            continue
        joined.append(JoinedRegion(
            feature=feature,
            winner_party=row.party,
            votes=row.votes,
            vote_share_pct=row.vote_share_pct,
            seats=row.seats,
            seat_share_pct=row.seat_share_pct,
            candidates=row.candidates,
        ))
    unmatched_results = sorted(set(winners) - fs.ids())

    report = JoinReport(
        matched=len(joined),
        unmatched_geometry_ids=tuple(sorted(unmatched_geometry)),
        unmatched_result_ids=tuple(unmatched_results),
    )
    if strict and (report.unmatched_geometry_ids or report.unmatched_result_ids):
        raise StrictJoinFailure(report)
    if report.unmatched_geometry_ids:
        names = {f.region_id: normalize_region_name(f.region_name) for f in fs}
        logger.warning("no results for regions: %s",
                       {i: names[i] for i in report.unmatched_geometry_ids})
    return joined, report
