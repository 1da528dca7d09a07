"""Trend analytics over the election catalog.

Covers the chart data behind the exploration UI: per-election party
summaries, the candidate-count trend with a least-squares prediction,
the winner heat-map, and per-party metric series with fitted trend
lines. Everything is a pure computation over an immutable catalog
snapshot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import fsum
from typing import Callable

from .datastore import CatalogEntry, ElectionCatalog, read_election_csv
from .join import winning_rows_by_region
from .models import ElectionResultRow, ElectionType, RegionLevel


class AnalyticsError(Exception):
    pass


class TooFewPoints(AnalyticsError):
    pass


class DegenerateX(AnalyticsError):
    pass


class InsufficientData(AnalyticsError):
    pass


class Metric(enum.Enum):
    SEATS_WON = "seats"
    SEAT_SHARE_PCT = "seat_share"
    VOTE_SHARE_PCT = "vote_share"
    CANDIDATES = "candidates"

    @classmethod
    def parse(cls, text: str) -> "Metric":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown metric: {text!r}") from None


@dataclass(frozen=True)
class TrendModel:
    slope: float
    intercept: float
    n: int
    mean_y: float
    median_y: float
    r2: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "mean": self.mean_y, "median": self.median_y}


def fit_ols(points: list[tuple[float, float]]) -> TrendModel:
    """Least-squares line fit, plus mean/median/r-squared of the y values.

    x values are centered on their mean before the slope is computed;
    with raw calendar years near 2000 the uncentered normal equations
    cancel catastrophically.
    """
    n = len(points)
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    if min(xs) == max(xs):
        raise DegenerateX("all x values are equal")

    x_mean = fsum(xs) / n
    y_mean = fsum(ys) / n
    sxx = fsum((x - x_mean) ** 2 for x in xs)
    sxy = fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    ss_res = fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = fsum((y - y_mean) ** 2 for y in ys)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    ordered = sorted(ys)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0

    return TrendModel(slope=slope, intercept=intercept, n=n,
                      mean_y=y_mean, median_y=median, r2=r2)


def predict(model: TrendModel, x: float) -> float:
    return model.intercept + model.slope * x


# --------------------------------------------------------------------------
# Catalog access

RowLoader = Callable[[CatalogEntry], list[ElectionResultRow]]


def _default_loader(entry: CatalogEntry) -> list[ElectionResultRow]:
    return read_election_csv(entry.path)


def preferred_entries(catalog: ElectionCatalog, election_type: ElectionType) -> list[CatalogEntry]:
    """One entry per year, preferring census-division tables when both
    levels were scraped; district rows are the finer-grained source."""
    by_year: dict[int, CatalogEntry] = {}
    for entry in catalog.of_type(election_type):
        current = by_year.get(entry.year)
        if current is None or (current.region_level is RegionLevel.PROVINCE
                               and entry.region_level is RegionLevel.CENSUS_DIVISION):
            by_year[entry.year] = entry
    return [by_year[year] for year in sorted(by_year)]


# --------------------------------------------------------------------------
# Per-election summary

@dataclass(frozen=True)
class PartySummary:
    party: str
    votes: int | None
    vote_share_pct: float | None
    seats: int | None
    seat_share_pct: float | None

    def to_dict(self) -> dict:
        return {"party": self.party, "votes": self.votes,
                "vote_share_pct": self.vote_share_pct, "seats": self.seats,
                "seat_share_pct": self.seat_share_pct}


def election_summary(rows: list[ElectionResultRow]) -> list[PartySummary]:
    """Aggregate one election's rows by party.

    Seats fall back to the count of regions the party won when the table
    carries no seat column; shares are recomputed from vote and seat
    totals when absent. Sorted by seats, then votes, then party name.
    """
    if not rows:
        raise AnalyticsError("no rows to summarize")
    parties = sorted({r.party for r in rows})
    has_seats = any(r.seats is not None for r in rows)

    regions_won: dict[str, int] = {p: 0 for p in parties}
    for winner in winning_rows_by_region(rows).values():
        regions_won[winner.party] += 1

    def total(party: str, key) -> int | None:
        values = [key(r) for r in rows if r.party == party and key(r) is not None]
        return sum(values) if values else None

    seats_by_party: dict[str, int | None] = {}
    votes_by_party: dict[str, int | None] = {}
    for party in parties:
        seats_by_party[party] = (total(party, lambda r: r.seats) if has_seats
                                 else regions_won[party])
        votes_by_party[party] = total(party, lambda r: r.votes)

    total_votes = sum(v for v in votes_by_party.values() if v is not None)
    total_seats = sum(s for s in seats_by_party.values() if s is not None)

    summaries = []
    for party in parties:
        votes = votes_by_party[party]
        seats = seats_by_party[party]
        vote_share = _share(votes, total_votes)
        if vote_share is None:
            vote_share = _single_given_share(rows, party, lambda r: r.vote_share_pct)
        seat_share = _share(seats, total_seats)
        if seat_share is None:
            seat_share = _single_given_share(rows, party, lambda r: r.seat_share_pct)
        summaries.append(PartySummary(party=party, votes=votes,
                                      vote_share_pct=vote_share, seats=seats,
                                      seat_share_pct=seat_share))
    summaries.sort(key=lambda s: (-(s.seats if s.seats is not None else -1),
                                  -(s.votes if s.votes is not None else -1),
                                  s.party))
    return summaries


def _share(value: int | None, total: int) -> float | None:
    if value is None or total <= 0:
        return None
    return 100.0 * value / total


def _single_given_share(rows, party, key) -> float | None:
    given = [key(r) for r in rows if r.party == party and key(r) is not None]
    return given[0] if len(given) == 1 else None


# --------------------------------------------------------------------------
# Candidate-count trend

@dataclass(frozen=True)
class TrendPoint:
    year: int
    value: float
    estimated: bool = False


@dataclass(frozen=True)
class CandidateTrend:
    series: tuple[TrendPoint, ...]
    model: TrendModel

    def to_dict(self) -> dict:
        return {
            "series": [[p.year, p.value] for p in self.series],
            "estimated_years": [p.year for p in self.series if p.estimated],
            "model": self.model.to_dict(),
        }


def _candidate_total(rows: list[ElectionResultRow]) -> tuple[int, bool]:
    """Sum candidate counts; rows without one count as a single candidate
    per distinct (party, region), flagged as estimated."""
    counted = sum(r.candidates for r in rows if r.candidates is not None)
    missing = {(r.party, r.region_id) for r in rows if r.candidates is None}
    return counted + len(missing), bool(missing)


def candidate_trend(catalog: ElectionCatalog, election_type: ElectionType,
                    loader: RowLoader = _default_loader) -> CandidateTrend:
    """Total candidates per election of one type, with a fitted trend."""
    entries = preferred_entries(catalog, election_type)
    if len(entries) < 2:
        raise InsufficientData(
            f"need >= 2 {election_type.value} elections, have {len(entries)}")
    series = []
    for entry in entries:
        rows = loader(entry)
        if not rows:
            raise InsufficientData(f"{entry.path}: no rows")
        total, estimated = _candidate_total(rows)
        series.append(TrendPoint(year=entry.year, value=float(total),
                                 estimated=estimated))
    model = fit_ols([(p.year, p.value) for p in series])
    return CandidateTrend(series=tuple(series), model=model)


# --------------------------------------------------------------------------
# Winner heat-map

@dataclass(frozen=True)
class WinnerMatrix:
    parties: tuple[str, ...]
    years: tuple[int, ...]
    wins: tuple[tuple[int, ...], ...]  # wins[party_index][year_index] in {0, 1}

    def to_dict(self) -> dict:
        return {"parties": list(self.parties), "years": list(self.years),
                "wins": [list(row) for row in self.wins]}


def national_winner(rows: list[ElectionResultRow]) -> str:
    """The election's overall winner: most seats, ties by votes then name."""
    summary = election_summary(rows)
    return summary[0].party


def winner_heatmap(catalog: ElectionCatalog, election_type: ElectionType,
                   loader: RowLoader = _default_loader) -> WinnerMatrix:
    """Binary party-by-year win matrix; each year column sums to one.

    Rows appear only for parties with at least one win, ordered by total
    wins descending with alphabetical ties.
    """
    entries = preferred_entries(catalog, election_type)
    if not entries:
        raise InsufficientData(f"no {election_type.value} elections in catalog")
    winners: dict[int, str] = {}
    for entry in entries:
        rows = loader(entry)
        if not rows:
            raise InsufficientData(f"{entry.path}: no rows, winner underivable")
        winners[entry.year] = national_winner(rows)

    years = tuple(sorted(winners))
    win_counts: dict[str, int] = {}
    for party in winners.values():
        win_counts[party] = win_counts.get(party, 0) + 1
    parties = tuple(sorted(win_counts, key=lambda p: (-win_counts[p], p)))
    wins = tuple(
        tuple(1 if winners[year] == party else 0 for year in years)
        for party in parties
    )
    return WinnerMatrix(parties=parties, years=years, wins=wins)


# --------------------------------------------------------------------------
# Per-party metric series

@dataclass(frozen=True)
class PartySeries:
    party: str
    points: tuple[tuple[int, float], ...]  # (year, value), years strictly increasing
    metric: Metric

    def __post_init__(self) -> None:
        years = [year for year, _ in self.points]
        if years != sorted(set(years)):
            raise ValueError("series years must be strictly increasing")


@dataclass(frozen=True)
class PartyTrend:
    series: PartySeries
    model: TrendModel | None

    def to_dict(self) -> dict:
        return {
            "party": self.series.party,
            "points": [[year, value] for year, value in self.series.points],
            "model": self.model.to_dict() if self.model else None,
        }


def _metric_value(summary: PartySummary, rows_for_party: list[ElectionResultRow],
                  metric: Metric) -> float | None:
    if metric is Metric.SEATS_WON:
        return float(summary.seats) if summary.seats is not None else None
    if metric is Metric.SEAT_SHARE_PCT:
        return summary.seat_share_pct
    if metric is Metric.VOTE_SHARE_PCT:
        return summary.vote_share_pct
    total, _ = _candidate_total(rows_for_party)
    return float(total)


def party_metric_series(catalog: ElectionCatalog, election_type: ElectionType,
                        metric: Metric,
                        loader: RowLoader = _default_loader) -> list[PartyTrend]:
    """One series per party across elections of a type, with trend lines.

    Parties seen in at least two elections carry a fitted model; a party
    seen once is listed without one.
    """
    entries = preferred_entries(catalog, election_type)
    if len(entries) < 2:
        raise InsufficientData(
            f"need >= 2 {election_type.value} elections, have {len(entries)}")

    per_party: dict[str, list[tuple[int, float]]] = {}
    for entry in entries:
        rows = loader(entry)
        if not rows:
            continue
        summaries = {s.party: s for s in election_summary(rows)}
        for party, summary in summaries.items():
            value = _metric_value(summary, [r for r in rows if r.party == party],
                                  metric)
            if value is not None:
                per_party.setdefault(party, []).append((entry.year, value))

    trends = []
    for party in sorted(per_party, key=lambda p: (p.casefold(), p)):
        points = tuple(sorted(per_party[party]))
        series = PartySeries(party=party, points=points, metric=metric)
        model = fit_ols([(float(y), v) for y, v in points]) if len(points) >= 2 else None
        trends.append(PartyTrend(series=series, model=model))
    return trends
