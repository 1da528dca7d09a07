/** Payload shapes of the backend API, one interface per endpoint. */

export type ElectionType = "federal" | "provincial";

export interface CatalogEntry {
  type: ElectionType;
  year: number;
  level: string;
  file: string;
  row_count: number;
}

export interface PartySummary {
  party: string;
  votes: number | null;
  vote_share_pct: number | null;
  seats: number | null;
  seat_share_pct: number | null;
}

export interface TrendModel {
  slope: number;
  intercept: number;
  r2: number;
  mean: number;
  median: number;
}

export interface CandidateTrend {
  series: [number, number][];
  estimated_years: number[];
  model: TrendModel;
  prediction: number | null;
}

export interface WinnerMatrix {
  parties: string[];
  years: number[];
  wins: number[][];
}

export interface PartySeriesEntry {
  party: string;
  points: [number, number][];
  model: TrendModel | null;
}

export interface PartySeriesPayload {
  metric: string;
  series: PartySeriesEntry[];
}
