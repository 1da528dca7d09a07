"""Canadian election data pipeline: scrape, store, map, analyze, serve."""

__version__ = "0.1.0"
