"""Core domain types shared across the pipeline."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ElectionType(enum.Enum):
    FEDERAL = "federal"
    PROVINCIAL = "provincial"

    @classmethod
    def parse(cls, text: str) -> "ElectionType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown election type: {text!r}") from None


class RegionLevel(enum.Enum):
    PROVINCE = "province"
    CENSUS_DIVISION = "census_division"

    @classmethod
    def parse(cls, text: str) -> "RegionLevel":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "province": cls.PROVINCE,
            "pr": cls.PROVINCE,
            "census_division": cls.CENSUS_DIVISION,
            "cd": cls.CENSUS_DIVISION,
        }
        if key not in aliases:
            raise ValueError(f"unknown region level: {text!r}")
        return aliases[key]


class TableKind(enum.Enum):
    PROVINCE_LEVEL = "province"
    DISTRICT_LEVEL = "district"
    PARTY_SUMMARY = "party_summary"


@dataclass(frozen=True)
class ElectionResultRow:
    """One party's outcome in one region for one election.

    region_id is the numeric PRUID (provinces) or CDUID (census divisions);
    it is the only key later joins are allowed to use. Optional numeric
    fields are None when the source table did not carry them, which is
    distinct from a genuine zero.
    """

    region_id: int
    region_name: str
    party: str
    votes: int | None = None
    vote_share_pct: float | None = None
    seats: int | None = None
    seat_share_pct: float | None = None
    candidates: int | None = None
    is_winner: bool = False

    def __post_init__(self) -> None:
        if self.region_id <= 0:
            raise ValueError(f"region_id must be positive, got {self.region_id}")
        if not self.party:
            raise ValueError("party must be non-empty")
        for label, share in (("vote_share_pct", self.vote_share_pct),
                             ("seat_share_pct", self.seat_share_pct)):
            if share is not None and not (0.0 <= share <= 100.0):
                raise ValueError(f"{label} out of [0, 100]: {share}")
        for label, count in (("votes", self.votes), ("seats", self.seats),
                             ("candidates", self.candidates)):
            if count is not None and count < 0:
                raise ValueError(f"{label} must be non-negative: {count}")
