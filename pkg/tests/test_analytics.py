from __future__ import annotations

import math
import random
from math import fsum
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from election_atlas.analytics import (
    DegenerateX,
    InsufficientData,
    Metric,
    TooFewPoints,
    candidate_trend,
    election_summary,
    fit_ols,
    national_winner,
    party_metric_series,
    predict,
    preferred_entries,
    winner_heatmap,
)
from election_atlas.datastore import CatalogEntry, ElectionCatalog
from election_atlas.models import ElectionResultRow, ElectionType, RegionLevel


def normal_equations_oracle(points):
    """Independent 2x2 normal-equations solve on the raw (uncentered) sums."""
    n = len(points)
    sx = fsum(x for x, _ in points)
    sy = fsum(y for _, y in points)
    sxx = fsum(x * x for x, _ in points)
    sxy = fsum(x * y for x, y in points)
    denominator = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / denominator
    intercept = (sy - slope * sx) / n
    return slope, intercept


def row(region_id=1, name="Region", party="A", **kw) -> ElectionResultRow:
    return ElectionResultRow(region_id=region_id, region_name=name, party=party, **kw)


def memory_catalog(elections: dict[int, list[ElectionResultRow]],
                   election_type=ElectionType.FEDERAL,
                   level=RegionLevel.PROVINCE):
    entries = tuple(
        CatalogEntry(election_type, year, level,
                     Path(f"{election_type.value}_{year}.csv"), len(rows))
        for year, rows in sorted(elections.items())
    )
    catalog = ElectionCatalog(entries)
    return catalog, lambda entry: elections[entry.year]


# --------------------------------------------------------------------------
# fit_ols / predict

def test_exact_line_through_origin():
    model = fit_ols([(0, 0), (1, 1), (2, 2)])
    assert model.slope == pytest.approx(1.0)
    assert model.intercept == pytest.approx(0.0)
    assert model.r2 == 1.0


def test_exact_line_with_intercept():
    model = fit_ols([(0, 1), (1, 3), (2, 5)])
    assert model.slope == pytest.approx(2.0)
    assert model.intercept == pytest.approx(1.0)
    assert model.r2 == 1.0


def test_mean_and_median():
    model = fit_ols([(0, 1), (1, 2), (2, 10)])
    assert model.mean_y == pytest.approx(13 / 3)
    assert model.median_y == 2
    even = fit_ols([(0, 1), (1, 2), (2, 3), (3, 10)])
    assert even.median_y == pytest.approx(2.5)  # mean of the two middles
    assert even.n == 4


def test_flat_data_r2_is_one():
    model = fit_ols([(0, 5), (1, 5), (2, 5)])
    assert model.slope == pytest.approx(0.0)
    assert model.r2 == 1.0


def test_degenerate_x():
    with pytest.raises(DegenerateX):
        fit_ols([(3, 1), (3, 2)])


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        fit_ols([(0, 0)])


def test_matches_normal_equations_oracle():
    rng = random.Random(1867)
    for _ in range(50):
        n = rng.randint(2, 200)
        slope_true = rng.uniform(-5, 5)
        intercept_true = rng.uniform(-100, 100)
        xs = sorted(rng.uniform(0, 2000) for _ in range(n))
        if xs[0] == xs[-1]:
            continue
        points = [(x, slope_true * x + intercept_true + rng.gauss(0, 3)) for x in xs]
        model = fit_ols(points)
        oracle_slope, oracle_intercept = normal_equations_oracle(points)
        assert abs(model.slope - oracle_slope) <= 1e-9 * max(1.0, abs(oracle_slope))
        assert abs(model.intercept - oracle_intercept) <= 1e-9 * max(1.0, abs(oracle_intercept))


def test_residual_orthogonality():
    rng = random.Random(1963)
    for _ in range(25):
        n = rng.randint(3, 120)
        points = [(rng.uniform(1867, 2021), rng.uniform(0, 3000)) for _ in range(n)]
        if len({x for x, _ in points}) < 2:
            continue
        model = fit_ols(points)
        residuals = [y - predict(model, x) for x, y in points]
        y_scale = max(1.0, fsum(abs(y) for _, y in points))
        xy_scale = max(1.0, fsum(abs(x * y) for x, y in points))
        assert abs(fsum(residuals)) <= 1e-8 * y_scale
        assert abs(fsum(r * x for r, (x, _) in zip(residuals, points))) <= 1e-8 * xy_scale


def test_shift_invariance_of_predictions():
    rng = random.Random(2019)
    points = [(1867 + i * 4, rng.uniform(100, 900)) for i in range(40)]
    shifted = [(x - 1867, y) for x, y in points]
    model = fit_ols(points)
    model_shifted = fit_ols(shifted)
    for x, _ in points:
        a = predict(model, x)
        b = predict(model_shifted, x - 1867)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_predict_identity_line():
    model = fit_ols([(0, 0), (1, 1)])
    assert predict(model, 7) == pytest.approx(7.0)


def test_predict_two_point_hand_calculation():
    model = fit_ols([(2011, 280), (2015, 300)])
    assert predict(model, 2019) == pytest.approx(320.0)


def test_model_json_shape():
    payload = fit_ols([(0, 1), (1, 3), (2, 5)]).to_dict()
    assert set(payload) == {"slope", "intercept", "r2", "mean", "median"}


# --------------------------------------------------------------------------
# election_summary

def test_shares_recomputed_from_votes():
    rows = [row(1, party="A", votes=60), row(2, party="B", votes=40)]
    summary = election_summary(rows)
    by_party = {s.party: s for s in summary}
    assert by_party["A"].vote_share_pct == pytest.approx(60.0)
    assert by_party["B"].vote_share_pct == pytest.approx(40.0)


def test_provincial_set_yields_single_seat_entries(provincial_rows):
    summary = election_summary(provincial_rows)
    assert len(summary) == 13
    assert all(s.seats == 1 for s in summary)
    assert all(s.seat_share_pct == pytest.approx(100 / 13) for s in summary)


def test_recomputed_shares_agree_with_given():
    rows = [row(1, party="A", votes=600, vote_share_pct=60.0),
            row(2, party="B", votes=400, vote_share_pct=40.0)]
    for s in election_summary(rows):
        given = next(r.vote_share_pct for r in rows if r.party == s.party)
        assert abs(s.vote_share_pct - given) < 0.1


def test_summary_sort_order():
    rows = [row(1, party="C", seats=2, votes=50),
            row(2, party="A", seats=2, votes=50),
            row(3, party="B", seats=5, votes=10)]
    assert [s.party for s in election_summary(rows)] == ["B", "A", "C"]


@settings(max_examples=100, deadline=None)
@given(votes=st.lists(st.integers(min_value=1, max_value=10**6), min_size=1,
                      max_size=12))
def test_recomputed_shares_sum_to_100(votes):
    rows = [row(i + 1, party=f"P{i:02d}", votes=v) for i, v in enumerate(votes)]
    total_share = sum(s.vote_share_pct for s in election_summary(rows))
    assert abs(total_share - 100.0) <= 0.5


def test_summary_aggregates_rows_per_party():
    rows = [row(1, party="A", votes=10, seats=1),
            row(2, party="A", votes=20, seats=0),
            row(3, party="B", votes=30, seats=1)]
    by_party = {s.party: s for s in election_summary(rows)}
    assert by_party["A"].votes == 30
    assert by_party["A"].seats == 1
    assert by_party["B"].votes == 30


# --------------------------------------------------------------------------
# candidate_trend

def test_two_election_trend_hand_slope():
    catalog, loader = memory_catalog({
        1867: [row(i, party=f"P{i}", candidates=5) for i in (1, 2)],
        1872: [row(i, party=f"P{i}", candidates=6) for i in (1, 2)],
    })
    trend = candidate_trend(catalog, ElectionType.FEDERAL, loader)
    assert [(p.year, p.value) for p in trend.series] == [(1867, 10.0), (1872, 12.0)]
    assert trend.model.slope == pytest.approx(0.4)
    assert not any(p.estimated for p in trend.series)


def test_single_election_insufficient():
    catalog, loader = memory_catalog({1867: [row(1, candidates=5)]})
    with pytest.raises(InsufficientData):
        candidate_trend(catalog, ElectionType.FEDERAL, loader)


def test_missing_candidate_cells_flagged_estimated():
    catalog, loader = memory_catalog({
        1867: [row(1, party="A", candidates=4), row(2, party="B", candidates=6)],
        1872: [row(1, party="A"), row(2, party="B")],  # no candidate column
    })
    trend = candidate_trend(catalog, ElectionType.FEDERAL, loader)
    by_year = {p.year: p for p in trend.series}
    assert by_year[1867].estimated is False
    assert by_year[1872].estimated is True
    assert by_year[1872].value == 2.0  # one distinct (party, region) row each


# --------------------------------------------------------------------------
# winner heat-map

def three_election_catalog():
    def election(winner: str):
        parties = ["A", "B"]
        return [row(i + 1, party=p, seats=(5 if p == winner else 1))
                for i, p in enumerate(parties)]

    return memory_catalog({1867: election("A"), 1872: election("B"),
                           1874: election("A")})


def test_heatmap_rows_and_order():
    catalog, loader = three_election_catalog()
    matrix = winner_heatmap(catalog, ElectionType.FEDERAL, loader)
    assert matrix.years == (1867, 1872, 1874)
    assert matrix.parties == ("A", "B")  # A has 2 wins
    assert matrix.wins == ((1, 0, 1), (0, 1, 0))


def test_heatmap_tie_order_alphabetical():
    catalog, loader = memory_catalog({
        1867: [row(1, party="Zebra", seats=5), row(2, party="Aardvark", seats=1)],
        1872: [row(1, party="Zebra", seats=1), row(2, party="Aardvark", seats=5)],
    })
    matrix = winner_heatmap(catalog, ElectionType.FEDERAL, loader)
    assert matrix.parties == ("Aardvark", "Zebra")


@settings(max_examples=100, deadline=None)
@given(winners=st.lists(st.sampled_from(["A", "B", "C", "D"]), min_size=1, max_size=12))
def test_heatmap_columns_sum_to_one(winners):
    elections = {}
    for i, winner in enumerate(winners):
        year = 1867 + 4 * i
        parties = ["A", "B", "C", "D"]
        elections[year] = [row(j + 1, party=p, seats=(9 if p == winner else 1))
                           for j, p in enumerate(parties)]
    catalog, loader = memory_catalog(elections)
    matrix = winner_heatmap(catalog, ElectionType.FEDERAL, loader)
    for column in range(len(matrix.years)):
        assert sum(matrix.wins[r][column] for r in range(len(matrix.parties))) == 1
    win_counts = [sum(matrix.wins[r]) for r in range(len(matrix.parties))]
    assert win_counts == sorted(win_counts, reverse=True)


def test_national_winner_most_seats():
    rows = [row(1, party="A", seats=3), row(2, party="B", seats=5)]
    assert national_winner(rows) == "B"


# --------------------------------------------------------------------------
# party metric series

def declining_share_catalog():
    elections = {}
    for year, share in [(2011, 50.0), (2015, 40.0), (2019, 30.0)]:
        elections[year] = [
            row(1, party="Fading", vote_share_pct=share),
            row(2, party="Rising", vote_share_pct=100.0 - share),
        ]
    return memory_catalog(elections)


def test_declining_party_has_negative_slope():
    catalog, loader = declining_share_catalog()
    trends = party_metric_series(catalog, ElectionType.FEDERAL,
                                 Metric.VOTE_SHARE_PCT, loader)
    by_party = {t.series.party: t for t in trends}
    assert by_party["Fading"].model.slope < 0
    assert by_party["Rising"].model.slope > 0


def test_single_appearance_has_no_model():
    catalog, loader = memory_catalog({
        1867: [row(1, party="A", seats=1), row(2, party="OneHit", seats=1)],
        1872: [row(1, party="A", seats=2)],
    })
    trends = party_metric_series(catalog, ElectionType.FEDERAL,
                                 Metric.SEATS_WON, loader)
    by_party = {t.series.party: t for t in trends}
    assert by_party["OneHit"].model is None
    assert len(by_party["OneHit"].series.points) == 1
    assert by_party["A"].model is not None


def test_models_equal_independent_fits():
    catalog, loader = declining_share_catalog()
    trends = party_metric_series(catalog, ElectionType.FEDERAL,
                                 Metric.VOTE_SHARE_PCT, loader)
    for trend in trends:
        expected = fit_ols([(float(y), v) for y, v in trend.series.points])
        assert trend.model == expected


def test_series_years_strictly_increasing():
    catalog, loader = declining_share_catalog()
    for trend in party_metric_series(catalog, ElectionType.FEDERAL,
                                     Metric.VOTE_SHARE_PCT, loader):
        years = [year for year, _ in trend.series.points]
        assert years == sorted(set(years))


def test_metric_parse():
    assert Metric.parse("seats") is Metric.SEATS_WON
    assert Metric.parse("candidates") is Metric.CANDIDATES
    with pytest.raises(ValueError):
        Metric.parse("popularity")


# --------------------------------------------------------------------------
# level preference

def test_preferred_entries_take_census_division():
    province = CatalogEntry(ElectionType.FEDERAL, 1963, RegionLevel.PROVINCE,
                            Path("federal_1963.csv"), 10)
    division = CatalogEntry(ElectionType.FEDERAL, 1963, RegionLevel.CENSUS_DIVISION,
                            Path("federal_1963_cd.csv"), 200)
    other = CatalogEntry(ElectionType.FEDERAL, 1968, RegionLevel.PROVINCE,
                         Path("federal_1968.csv"), 10)
    catalog = ElectionCatalog((province, division, other))
    chosen = preferred_entries(catalog, ElectionType.FEDERAL)
    assert [(e.year, e.region_level) for e in chosen] == [
        (1963, RegionLevel.CENSUS_DIVISION), (1968, RegionLevel.PROVINCE)]
