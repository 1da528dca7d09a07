from __future__ import annotations

import json
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor

import pytest
import yaml

from election_atlas.datastore import write_election_csv
from election_atlas.geometry import to_geojson
from election_atlas.models import ElectionResultRow, ElectionType, RegionLevel
from election_atlas.service import ElectionService, ServiceConfig, StartupValidationError

from conftest import PROVINCIAL_LATEST, make_province_features

SVG_NS = "{http://www.w3.org/2000/svg}"


def federal_rows(candidates_by_party: dict[str, int],
                 seats_by_party: dict[str, int]) -> list[ElectionResultRow]:
    rows = []
    for region_id, region in [(35, "Ontario"), (24, "Quebec")]:
        for party in sorted(candidates_by_party):
            rows.append(ElectionResultRow(
                region_id=region_id, region_name=region, party=party,
                votes=1000 + region_id + len(party),
                seats=seats_by_party[party],
                candidates=candidates_by_party[party],
            ))
    return rows


def build_service_tree(root):
    data = root / "data"
    provincial = [ElectionResultRow(region_id=i, region_name=n, party=p)
                  for i, n, p in PROVINCIAL_LATEST]
    write_election_csv(provincial, ElectionType.PROVINCIAL, 2019,
                       RegionLevel.PROVINCE, data)
    write_election_csv(federal_rows({"Liberal": 2, "Conservative": 3},
                                    {"Liberal": 1, "Conservative": 3}),
                       ElectionType.FEDERAL, 1867, RegionLevel.PROVINCE, data)
    write_election_csv(federal_rows({"Liberal": 3, "Conservative": 3},
                                    {"Liberal": 1, "Conservative": 4}),
                       ElectionType.FEDERAL, 1872, RegionLevel.PROVINCE, data)
    write_election_csv(federal_rows({"Liberal": 4, "Conservative": 3},
                                    {"Liberal": 5, "Conservative": 1}),
                       ElectionType.FEDERAL, 1874, RegionLevel.PROVINCE, data)

    geo = root / "geo"
    geo.mkdir()
    (geo / "provinces.geojson").write_text(to_geojson(make_province_features()),
                                           encoding="utf-8")
    config_path = root / "svc.cfg"
    config_path.write_text(yaml.safe_dump({
        "data_root": "data",
        "geometry": {"province": "geo/provinces.geojson"},
        "bind": "127.0.0.1:0",
    }), encoding="utf-8")
    return config_path


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc")
    config_path = build_service_tree(root)
    svc = ElectionService(ServiceConfig.load(config_path))
    host, port = svc.start()
    try:
        yield f"http://{host}:{port}", svc, root
    finally:
        svc.stop()


def get(url: str, headers: dict | None = None):
    request = urllib.request.Request(url, headers=headers or {})
    try:
        with urllib.request.urlopen(request, timeout=10) as response:
            return response.status, dict(response.headers), response.read()
    except urllib.error.HTTPError as error:
        return error.code, dict(error.headers), error.read()


def post(url: str):
    request = urllib.request.Request(url, method="POST", data=b"")
    with urllib.request.urlopen(request, timeout=10) as response:
        return response.status, response.read()


# --------------------------------------------------------------------------

def test_elections_index(service):
    base, _, _ = service
    status, headers, body = get(f"{base}/api/elections")
    assert status == 200
    assert headers["Content-Type"].startswith("application/json")
    catalog = json.loads(body)
    assert len(catalog) == 4
    assert {(e["type"], e["year"]) for e in catalog} == {
        ("federal", 1867), ("federal", 1872), ("federal", 1874), ("provincial", 2019)}
    assert all(set(e) == {"type", "year", "level", "file", "row_count"}
               for e in catalog)


def test_results_endpoint_sorted_by_seats(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/elections/federal/1872/results")
    assert status == 200
    summary = json.loads(body)
    assert [s["party"] for s in summary] == ["Conservative", "Liberal"]
    seats = [s["seats"] for s in summary]
    assert seats == sorted(seats, reverse=True)


def test_provincial_results(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/elections/provincial/2019/results")
    assert status == 200
    summary = json.loads(body)
    assert len(summary) == 13
    assert all(s["seats"] == 1 for s in summary)


def test_unknown_election_is_404_with_error_body(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/elections/federal/1850/results")
    assert status == 404
    assert json.loads(body) == {"error": "not_found"}


def test_map_has_thirteen_paths_and_legend(service):
    base, _, _ = service
    status, headers, body = get(f"{base}/api/maps/provincial/2019.svg")
    assert status == 200
    assert headers["Content-Type"].startswith("image/svg+xml")
    root = ET.fromstring(body)
    paths = list(root.iter(f"{SVG_NS}path"))
    assert len(paths) == 13
    legend_texts = [el.text for el in root.iter(f"{SVG_NS}text")]
    assert len(legend_texts) == 13


def test_map_retain_parameter(service):
    base, _, _ = service
    status, _, full = get(f"{base}/api/maps/provincial/2019.svg")
    status2, _, simplified = get(f"{base}/api/maps/provincial/2019.svg?retain=0.5")
    assert status == status2 == 200
    # squares already at the 3-vertex floor keep their shape; bodies still
    # render the same number of regions
    assert len(list(ET.fromstring(simplified).iter(f"{SVG_NS}path"))) == 13


def test_map_bad_retain_is_400(service):
    base, _, _ = service
    for query in ("retain=0", "retain=1.5", "retain=abc"):
        status, _, body = get(f"{base}/api/maps/provincial/2019.svg?{query}")
        assert status == 400
        assert json.loads(body)["error"] == "bad_request"


def test_map_unknown_year_404(service):
    base, _, _ = service
    status, _, _ = get(f"{base}/api/maps/provincial/1800.svg")
    assert status == 404


def test_candidate_trend_endpoint(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/analytics/candidates/trend"
                          f"?type=federal&predict=2019")
    assert status == 200
    payload = json.loads(body)
    assert set(payload) == {"series", "estimated_years", "model", "prediction"}
    assert payload["series"] == [[1867, 10.0], [1872, 12.0], [1874, 14.0]]
    model = payload["model"]
    assert set(model) == {"slope", "intercept", "r2", "mean", "median"}
    assert payload["prediction"] == pytest.approx(
        model["intercept"] + model["slope"] * 2019)


def test_heatmap_endpoint_columns_sum_to_one(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/analytics/heatmap?type=federal")
    assert status == 200
    matrix = json.loads(body)
    assert matrix["years"] == [1867, 1872, 1874]
    assert matrix["parties"] == ["Conservative", "Liberal"]
    for column in range(len(matrix["years"])):
        assert sum(row[column] for row in matrix["wins"]) == 1


def test_series_endpoint(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/analytics/series?type=federal&metric=seats")
    assert status == 200
    payload = json.loads(body)
    assert payload["metric"] == "seats"
    parties = {s["party"] for s in payload["series"]}
    assert parties == {"Conservative", "Liberal"}
    for series in payload["series"]:
        assert len(series["points"]) == 3
        assert series["model"] is not None


def test_series_bad_metric_is_400(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/analytics/series?type=federal&metric=vibes")
    assert status == 400


def test_unknown_route_404(service):
    base, _, _ = service
    status, _, body = get(f"{base}/api/nope")
    assert status == 404
    assert json.loads(body) == {"error": "not_found"}


def test_concurrent_identical_gets_are_byte_identical(service):
    base, _, _ = service
    urls = [f"{base}/api/maps/provincial/2019.svg",
            f"{base}/api/analytics/candidates/trend?type=federal&predict=2019"]
    for url in urls:
        with ThreadPoolExecutor(max_workers=64) as pool:
            bodies = list(pool.map(lambda _: get(url)[2], range(64)))
        assert len(set(bodies)) == 1


def test_etag_and_conditional_get(service):
    base, svc, _ = service
    status, headers, _ = get(f"{base}/api/elections")
    etag = headers["ETag"]
    assert etag == f'"v{svc.snapshot.version}"'
    status304, _, body = get(f"{base}/api/elections", headers={"If-None-Match": etag})
    assert status304 == 304
    assert body == b""


def test_reload_swaps_snapshot(service):
    base, svc, root = service
    before = svc.snapshot.version
    write_election_csv(federal_rows({"Liberal": 9, "Conservative": 9},
                                    {"Liberal": 2, "Conservative": 2}),
                       ElectionType.FEDERAL, 1878, RegionLevel.PROVINCE,
                       root / "data")
    status, body = post(f"{base}/api/reload")
    assert status == 200
    assert json.loads(body)["version"] == before + 1
    _, _, listing = get(f"{base}/api/elections")
    years = {(e["type"], e["year"]) for e in json.loads(listing)}
    assert ("federal", 1878) in years


def test_startup_validation_missing_paths(tmp_path):
    config = ServiceConfig(data_root=tmp_path / "nope", geometry_paths={},
                           bind_address=("127.0.0.1", 0))
    with pytest.raises(StartupValidationError):
        ElectionService(config)


def test_config_rejects_bad_bind(tmp_path):
    bad = tmp_path / "svc.cfg"
    bad.write_text("bind: nonsense\ndata_root: .\n", encoding="utf-8")
    with pytest.raises(Exception):
        ServiceConfig.load(bad)
