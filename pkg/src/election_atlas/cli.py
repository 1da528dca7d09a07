"""Command-line entry points: scrape, convert, simplify, render, serve."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import yaml

from . import render as render_mod
from .datastore import build_catalog, read_election_csv, write_election_csv
from .geometry import from_geojson, parse_shapefile, simplify, to_geojson
from .ingest import FetchPolicy, FixtureTransport, SiteConfig, UrlTransport, scrape_election
from .join import merge_results_with_geometry
from .models import ElectionType, RegionLevel
from .service import ServiceConfig, serve

CONFIG_ENV_VAR = "ELECTION_ATLAS_CONFIG"


def _cmd_scrape(args) -> int:
    config = SiteConfig.load(args.config)
    election_type = ElectionType.parse(args.type)
    source = config.source_for(election_type, args.year)
    if source is None:
        print(f"no pages configured for {args.type} {args.year}", file=sys.stderr)
        return 2
    fetcher = FixtureTransport(args.fixtures) if args.fixtures else UrlTransport()
    rows = scrape_election(election_type, args.year, config, FetchPolicy(), fetcher)
    path = write_election_csv(rows, election_type, args.year, source.level,
                              args.out, allow_empty=args.allow_empty)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_convert(args) -> int:
    level = RegionLevel.parse(args.level) if args.level else (
        RegionLevel.CENSUS_DIVISION if args.id.upper() == "CDUID" else RegionLevel.PROVINCE)
    fs = parse_shapefile(Path(args.shp).read_bytes(), Path(args.dbf).read_bytes(),
                         id_field=args.id, name_field=args.name, level=level)
    Path(args.out).write_text(to_geojson(fs), encoding="utf-8")
    print(f"wrote {len(fs)} features to {args.out}")
    return 0


def _cmd_simplify(args) -> int:
    fs = from_geojson(Path(args.input).read_text(encoding="utf-8"))
    simplified = simplify(fs, args.retain)
    Path(args.output).write_text(to_geojson(simplified), encoding="utf-8")
    before = sum(len(r.points) for f in fs for r in f.rings)
    after = sum(len(r.points) for f in simplified for r in f.rings)
    print(f"{before} -> {after} vertices ({len(fs)} features)")
    return 0


def _cmd_render(args) -> int:
    csv_path = Path(args.data) / f"{args.election}.csv"
    if not csv_path.is_file():
        catalog = build_catalog(args.data)
        known = ", ".join(e.path.stem for e in catalog) or "<none>"
        print(f"{csv_path} not found; known elections: {known}", file=sys.stderr)
        return 2
    rows = read_election_csv(csv_path)
    fs = from_geojson(Path(args.geom).read_text(encoding="utf-8"))
    joined, report = merge_results_with_geometry(rows, fs, strict=args.strict)
    overrides = {}
    if args.overrides:
        overrides = yaml.safe_load(Path(args.overrides).read_text(encoding="utf-8")) or {}
    palette = render_mod.assign_party_colors([r.winner_party for r in joined], overrides)
    svg = render_mod.render_choropleth(joined, palette, args.width, args.height)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"rendered {report.matched} regions to {args.out}")
    if report.unmatched_geometry_ids or report.unmatched_result_ids:
        print(f"join report: {report.to_dict()}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    config_path = os.environ.get(CONFIG_ENV_VAR) or args.config
    if not config_path:
        print(f"pass --config or set {CONFIG_ENV_VAR}", file=sys.stderr)
        return 2
    serve(ServiceConfig.load(config_path))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="election-atlas")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scrape", help="fetch one election and store it as CSV")
    p.add_argument("--type", required=True, choices=["federal", "provincial"])
    p.add_argument("--year", required=True, type=int)
    p.add_argument("--config", required=True, help="site config (YAML)")
    p.add_argument("--fixtures", help="replay recorded pages from this directory")
    p.add_argument("--out", required=True, help="CSV output directory")
    p.add_argument("--allow-empty", action="store_true")
    p.set_defaults(fn=_cmd_scrape)

    p = sub.add_parser("convert", help="convert .shp/.dbf to GeoJSON")
    p.add_argument("shp")
    p.add_argument("dbf")
    p.add_argument("--id", required=True, help="dbf id field, e.g. PRUID")
    p.add_argument("--name", required=True, help="dbf name field, e.g. PRNAME")
    p.add_argument("--level", help="province or cd (default: inferred from --id)")
    p.add_argument("out")
    p.set_defaults(fn=_cmd_convert)

    p = sub.add_parser("simplify", help="simplify GeoJSON polygons")
    p.add_argument("--retain", type=float, required=True,
                   help="fraction of vertices to keep, in (0, 1]")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(fn=_cmd_simplify)

    p = sub.add_parser("render", help="render a stored election as an SVG map")
    p.add_argument("--election", required=True, help="catalog name, e.g. provincial_2019")
    p.add_argument("--geom", required=True, help="GeoJSON geometry file")
    p.add_argument("--data", default=".", help="directory of election CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--overrides", help="YAML file pinning party colors")
    p.add_argument("--strict", action="store_true",
                   help="fail when results and geometry ids do not line up")
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--config", help=f"service config (YAML); ${CONFIG_ENV_VAR} overrides")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
