"""HTTP API over the catalog, maps and analytics.

Handlers read from an immutable snapshot assembled at startup; POST
/api/reload rebuilds it and swaps the reference atomically, so the whole
read path runs lock-free and identical requests against one snapshot
return byte-identical bodies.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import yaml

from . import analytics, render
from .datastore import ElectionCatalog, build_catalog, read_election_csv
from .geometry import FeatureSet, from_geojson, simplify
from .join import merge_results_with_geometry
from .models import ElectionResultRow, ElectionType, RegionLevel

logger = logging.getLogger(__name__)


class ServiceError(Exception):
    pass


class BindError(ServiceError):
    pass


class StartupValidationError(ServiceError):
    def __init__(self, path: Path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path


@dataclass(frozen=True)
class ServiceConfig:
    data_root: Path
    geometry_paths: dict[RegionLevel, Path]
    bind_address: tuple[str, int] = ("127.0.0.1", 8080)
    palette_overrides: Path | None = None

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        base = path.parent

        def resolve(p: str) -> Path:
            candidate = Path(p)
            return candidate if candidate.is_absolute() else base / candidate

        geometry = {RegionLevel.parse(level): resolve(geo_path)
                    for level, geo_path in (data.get("geometry") or {}).items()}
        bind = str(data.get("bind", "127.0.0.1:8080"))
        host, _, port_text = bind.rpartition(":")
        if not host or not port_text.isdigit():
            raise ServiceError(f"bad bind address: {bind!r}")
        overrides = data.get("palette_overrides")
        return cls(
            data_root=resolve(str(data.get("data_root", "."))),
            geometry_paths=geometry,
            bind_address=(host, int(port_text)),
            palette_overrides=resolve(overrides) if overrides else None,
        )

    def validate(self) -> None:
        if not self.data_root.is_dir():
            raise StartupValidationError(self.data_root, "data root is not a directory")
        for level, path in self.geometry_paths.items():
            if not path.is_file():
                raise StartupValidationError(path, f"{level.value} geometry missing")
        if self.palette_overrides and not self.palette_overrides.is_file():
            raise StartupValidationError(self.palette_overrides, "palette overrides missing")


@dataclass(frozen=True)
class Snapshot:
    """Everything a request needs, loaded once and never mutated."""

    version: int
    catalog: ElectionCatalog
    results: dict[tuple[str, int, RegionLevel], tuple[ElectionResultRow, ...]]
    geometry: dict[RegionLevel, FeatureSet]
    palette_overrides: dict[str, str] = field(default_factory=dict)

    @classmethod
    def build(cls, config: ServiceConfig, version: int = 1) -> "Snapshot":
        config.validate()
        catalog = build_catalog(config.data_root)
        results = {}
        for entry in catalog:
            key = (entry.election_type.value, entry.year, entry.region_level)
            results[key] = tuple(read_election_csv(entry.path))
        geometry = {}
        for level, path in config.geometry_paths.items():
            fs = from_geojson(path.read_text(encoding="utf-8"))
            if fs.level is not level:
                raise StartupValidationError(
                    path, f"declared {level.value} but features carry {fs.level.value} ids")
            geometry[level] = fs
        overrides = {}
        if config.palette_overrides:
            loaded = yaml.safe_load(config.palette_overrides.read_text(encoding="utf-8"))
            overrides = {str(k): str(v) for k, v in (loaded or {}).items()}
        return cls(version=version, catalog=catalog, results=results,
                   geometry=geometry, palette_overrides=overrides)

    def rows_for(self, election_type: ElectionType, year: int,
                 level: RegionLevel) -> tuple[ElectionResultRow, ...] | None:
        return self.results.get((election_type.value, year, level))

    def preferred_rows(self, election_type: ElectionType,
                       year: int) -> tuple[ElectionResultRow, ...] | None:
        for level in (RegionLevel.CENSUS_DIVISION, RegionLevel.PROVINCE):
            rows = self.rows_for(election_type, year, level)
            if rows is not None:
                return rows
        return None

    def loader(self) -> analytics.RowLoader:
        def load(entry):
            key = (entry.election_type.value, entry.year, entry.region_level)
            return list(self.results[key])
        return load


# --------------------------------------------------------------------------
# Responses and handler helpers

@dataclass(frozen=True)
class Response:
    status: int
    body: bytes
    content_type: str = "application/json; charset=utf-8"


def _json_response(payload, status: int = 200) -> Response:
    body = json.dumps(payload, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")).encode("utf-8")
    return Response(status=status, body=body)


def _not_found() -> Response:
    return _json_response({"error": "not_found"}, status=404)


def _bad_request(detail: str) -> Response:
    return _json_response({"error": "bad_request", "detail": detail}, status=400)


def _parse_election_type(text: str) -> ElectionType | None:
    try:
        return ElectionType.parse(text)
    except ValueError:
        return None


def _catalog_payload(snapshot: Snapshot) -> list[dict]:
    return [
        {"type": e.election_type.value, "year": e.year,
         "level": e.region_level.value, "file": e.path.name,
         "row_count": e.row_count}
        for e in snapshot.catalog
    ]


def handle_elections(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    return _json_response(_catalog_payload(snapshot))


def handle_results(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    election_type = _parse_election_type(match.group("type"))
    if election_type is None:
        return _bad_request(f"unknown election type {match.group('type')!r}")
    year = int(match.group("year"))
    rows = snapshot.preferred_rows(election_type, year)
    if rows is None:
        return _not_found()
    summary = analytics.election_summary(list(rows))
    return _json_response([s.to_dict() for s in summary])


def handle_map(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    election_type = _parse_election_type(match.group("type"))
    if election_type is None:
        return _bad_request(f"unknown election type {match.group('type')!r}")
    year = int(match.group("year"))

    retain = 1.0
    if "retain" in query:
        try:
            retain = float(query["retain"][0])
        except ValueError:
            return _bad_request("retain must be a number")
        if not (0.0 < retain <= 1.0):
            return _bad_request("retain must be in (0, 1]")

    level: RegionLevel | None = None
    if "level" in query:
        try:
            level = RegionLevel.parse(query["level"][0])
        except ValueError:
            return _bad_request(f"unknown level {query['level'][0]!r}")

    candidates = [level] if level else [RegionLevel.PROVINCE, RegionLevel.CENSUS_DIVISION]
    for candidate in candidates:
        rows = snapshot.rows_for(election_type, year, candidate)
        geometry = snapshot.geometry.get(candidate)
        if rows is None or geometry is None:
            continue
        if retain < 1.0:
            geometry = simplify(geometry, retain)
        joined, report = merge_results_with_geometry(list(rows), geometry, strict=False)
        if not joined:
            continue
        if report.unmatched_geometry_ids or report.unmatched_result_ids:
            logger.warning("map %s/%d: join report %s", election_type.value, year,
                           report.to_dict())
        palette = render.assign_party_colors([r.winner_party for r in joined],
                                             snapshot.palette_overrides)
        svg = render.render_choropleth(joined, palette)
        return Response(status=200, body=svg.encode("utf-8"),
                        content_type="image/svg+xml; charset=utf-8")
    return _not_found()


def handle_candidate_trend(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    election_type = _parse_election_type(query.get("type", ["federal"])[0])
    if election_type is None:
        return _bad_request("unknown election type")
    try:
        trend = analytics.candidate_trend(snapshot.catalog, election_type,
                                          snapshot.loader())
    except analytics.InsufficientData as exc:
        return _bad_request(str(exc))
    payload = trend.to_dict()
    payload["prediction"] = None
    if "predict" in query:
        try:
            at_year = float(query["predict"][0])
        except ValueError:
            return _bad_request("predict must be a year")
        payload["prediction"] = analytics.predict(trend.model, at_year)
    return _json_response(payload)


def handle_heatmap(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    election_type = _parse_election_type(query.get("type", ["federal"])[0])
    if election_type is None:
        return _bad_request("unknown election type")
    try:
        matrix = analytics.winner_heatmap(snapshot.catalog, election_type,
                                          snapshot.loader())
    except analytics.InsufficientData as exc:
        return _bad_request(str(exc))
    return _json_response(matrix.to_dict())


def handle_series(snapshot: Snapshot, match: re.Match, query: dict) -> Response:
    election_type = _parse_election_type(query.get("type", ["federal"])[0])
    if election_type is None:
        return _bad_request("unknown election type")
    try:
        metric = analytics.Metric.parse(query.get("metric", ["seats"])[0])
    except ValueError as exc:
        return _bad_request(str(exc))
    try:
        trends = analytics.party_metric_series(snapshot.catalog, election_type,
                                               metric, snapshot.loader())
    except analytics.InsufficientData as exc:
        return _bad_request(str(exc))
    return _json_response({"metric": metric.value,
                           "series": [t.to_dict() for t in trends]})


_ROUTES = [
    ("GET", re.compile(r"^/api/elections$"), handle_elections),
    ("GET", re.compile(r"^/api/elections/(?P<type>[^/]+)/(?P<year>\d{4})/results$"),
     handle_results),
    ("GET", re.compile(r"^/api/maps/(?P<type>[^/]+)/(?P<year>\d{4})\.svg$"), handle_map),
    ("GET", re.compile(r"^/api/analytics/candidates/trend$"), handle_candidate_trend),
    ("GET", re.compile(r"^/api/analytics/heatmap$"), handle_heatmap),
    ("GET", re.compile(r"^/api/analytics/series$"), handle_series),
]


class ElectionService:
    """Owns the snapshot and the HTTP server; reload swaps atomically."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._snapshot = Snapshot.build(config, version=1)
        self._reload_lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def reload(self) -> Snapshot:
        with self._reload_lock:
            fresh = Snapshot.build(self.config, version=self._snapshot.version + 1)
            self._snapshot = fresh  # atomic reference swap
            return fresh

    def dispatch(self, method: str, path: str, query: dict) -> Response:
        if method == "POST" and path == "/api/reload":
            try:
                fresh = self.reload()
            except Exception as exc:
                logger.exception("reload failed")
                return _json_response({"error": "reload_failed", "detail": str(exc)},
                                      status=500)
            return _json_response({"version": fresh.version})

        snapshot = self._snapshot  # one read; the whole request sees one version
        for route_method, pattern, handler in _ROUTES:
            match = pattern.match(path)
            if not match:
                continue
            if method != route_method:
                return _json_response({"error": "method_not_allowed"}, status=405)
            try:
                response = handler(snapshot, match, query)
            except Exception:
                logger.exception("handler error for %s", path)
                return _json_response({"error": "internal"}, status=500)
            return response
        return _not_found()

    # -- server lifecycle ---------------------------------------------------

    def start(self) -> tuple[str, int]:
        """Bind and serve in a daemon thread; returns the bound address."""
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def _run(self, method: str) -> None:
                parsed = urlparse(self.path)
                snapshot_version = service.snapshot.version
                response = service.dispatch(method, parsed.path,
                                            parse_qs(parsed.query))
                etag = f'"v{snapshot_version}"'
                if (response.status == 200
                        and self.headers.get("If-None-Match") == etag):
                    self.send_response(304)
                    self.send_header("ETag", etag)
                    self.send_header("Content-Length", "0")
                    self.end_headers()
                    return
                self.send_response(response.status)
                self.send_header("Content-Type", response.content_type)
                self.send_header("Content-Length", str(len(response.body)))
                self.send_header("ETag", etag)
                self.send_header("Cache-Control", "no-cache")
                self.end_headers()
                self.wfile.write(response.body)

            def do_GET(self):
                self._run("GET")

            def do_POST(self):
                self._run("POST")

            def log_message(self, fmt, *args):
                logger.debug("%s - %s", self.address_string(), fmt % args)

        host, port = self.config.bind_address
        try:
            self._server = ThreadingHTTPServer((host, port), Handler)
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
        self._server.daemon_threads = True
        thread = threading.Thread(target=self._server.serve_forever,
                                  name="election-atlas-http", daemon=True)
        thread.start()
        return self._server.server_address[0], self._server.server_address[1]

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None


def serve(config: ServiceConfig) -> None:
    """Start the service and block until interrupted."""
    service = ElectionService(config)
    host, port = service.start()
    logger.info("serving on http://%s:%d (catalog: %d elections)",
                host, port, len(service.snapshot.catalog))
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
