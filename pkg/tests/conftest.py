from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from election_atlas.geometry import FeatureSet, RegionFeature, Ring
from election_atlas.models import ElectionResultRow, RegionLevel

from esri_fixture import square_ring

# The latest provincial/territorial winners, keyed by PRUID. Region names
# carry the election-date suffix exactly as the source site prints them.
PROVINCIAL_LATEST = [
    (48, "Alberta (Apr 16, '19)", "United Conservative Party"),
    (59, "British Columbia (May 9, '17)", "British Columbia Liberal Party"),
    (46, "Manitoba (Apr 19, '16)", "Progressive Conservative Party of Manitoba"),
    (13, "New Brunswick (Sep 24, '18)", "Progressive Conservative Party of New Brunswick"),
    (10, "Newfoundland and Labrador (May 16, '19)", "Liberal Party of Newfoundland and Labrador"),
    (12, "Nova Scotia (May 30, '17)", "Nova Scotia Liberal Party"),
    (62, "Nunavut (Oct 30, '17)", "Nunavut Independent"),
    (61, "Northwest Territories (Oct 3, '11)", "Sans Nom/ No Name"),
    (35, "Ontario (Jun 7, '18)", "Progressive Conservative Party of Ontario"),
    (11, "Prince Edward Island (Apr 23, '19)", "Progressive Conservative Party of Prince Edward Island"),
    (24, "Quebec (Oct 1, '18)", "Coalition Avenir Québec - L'équipe François Legault"),
    (47, "Saskatchewan (Apr 4, '16)", "Saskatchewan Party"),
    (60, "Yukon (Oct 1, '11)", "Yukon Party"),
]

PROVINCE_BARE_NAMES = {
    48: "Alberta", 59: "British Columbia", 46: "Manitoba", 13: "New Brunswick",
    10: "Newfoundland and Labrador", 12: "Nova Scotia", 62: "Nunavut",
    61: "Northwest Territories", 35: "Ontario", 11: "Prince Edward Island",
    24: "Quebec", 47: "Saskatchewan", 60: "Yukon",
}


def build_results_page(rows, table_class: str = "results") -> str:
    body = "\n".join(
        f"<tr><td>{region_id}</td><td>{name}</td><td>{party}</td></tr>"
        for region_id, name, party in rows
    )
    return f"""<!DOCTYPE html>
<html><head><title>Latest results</title></head>
<body>
<table class="nav"><tr><td>menu</td></tr></table>
<table class="{table_class}">
<tr><th>PRUID</th><th>Province</th><th>Party</th></tr>
{body}
</table>
</body></html>"""


@pytest.fixture
def provincial_page() -> str:
    return build_results_page(PROVINCIAL_LATEST)


@pytest.fixture
def provincial_rows() -> list[ElectionResultRow]:
    return [
        ElectionResultRow(region_id=region_id, region_name=name, party=party)
        for region_id, name, party in PROVINCIAL_LATEST
    ]


def make_province_features(ids_and_names=None) -> FeatureSet:
    if ids_and_names is None:
        ids_and_names = sorted(PROVINCE_BARE_NAMES.items())
    features = []
    for i, (region_id, name) in enumerate(ids_and_names):
        ring = Ring(tuple(square_ring(float((i % 5) * 2), float((i // 5) * 2))))
        features.append(RegionFeature.from_rings(region_id, name, (ring,)))
    return FeatureSet(features=tuple(features), level=RegionLevel.PROVINCE)


@pytest.fixture
def province_features() -> FeatureSet:
    return make_province_features()
