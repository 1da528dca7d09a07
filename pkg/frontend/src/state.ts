/**
 * View state and its URL-query-parameter encoding.
 *
 * The rendered page is a pure function of this state plus the cached API
 * payloads, and the state lives in the URL, so views are shareable and
 * back/forward restore them.
 */

import type { ElectionType } from "./types.js";

export type MetricKey = "seats" | "seat_share" | "vote_share" | "candidates" | "winners";

export type ChartStyle = "vbar" | "hbar" | "pie" | "donut" | "line" | "scatter" | "heatmap";

export interface ViewState {
  type: ElectionType;
  year: number;
  metric: MetricKey;
  style: ChartStyle;
  /** Year to extrapolate the candidate trend to; only used by "candidates". */
  predict: number | null;
}

export const METRICS: { key: MetricKey; label: string }[] = [
  { key: "seats", label: "Seats won" },
  { key: "seat_share", label: "Seat share %" },
  { key: "vote_share", label: "Vote share %" },
  { key: "candidates", label: "Candidates over time" },
  { key: "winners", label: "Winner history" },
];

const SUMMARY_STYLES: ChartStyle[] = ["vbar", "hbar", "pie", "donut"];
const TREND_STYLES: ChartStyle[] = ["line", "scatter"];

/** Which chart styles can draw a metric; heat-map only fits the winner matrix. */
export function validStylesFor(metric: MetricKey): ChartStyle[] {
  switch (metric) {
    case "candidates":
      return TREND_STYLES;
    case "winners":
      return ["heatmap"];
    default:
      return SUMMARY_STYLES;
  }
}

export const DEFAULT_STATE: ViewState = {
  type: "provincial",
  year: 2019,
  metric: "seats",
  style: "vbar",
  predict: null,
};

/** Coerce the style to one that can draw the metric. */
export function normalizeState(state: ViewState): ViewState {
  const styles = validStylesFor(state.metric);
  if (styles.includes(state.style)) {
    return state;
  }
  return { ...state, style: styles[0] };
}

export function parseViewState(search: string, fallback: ViewState = DEFAULT_STATE): ViewState {
  const params = new URLSearchParams(search);
  const type = params.get("type");
  const year = Number(params.get("year"));
  const metric = params.get("metric");
  const style = params.get("style");
  const predict = Number(params.get("predict"));
  const metricKeys = METRICS.map((m) => m.key);
  return normalizeState({
    type: type === "federal" || type === "provincial" ? type : fallback.type,
    year: Number.isInteger(year) && year > 0 ? year : fallback.year,
    metric: metricKeys.includes(metric as MetricKey) ? (metric as MetricKey) : fallback.metric,
    style: (style ?? fallback.style) as ChartStyle,
    predict: Number.isInteger(predict) && predict > 0 ? predict : fallback.predict,
  });
}

export function serializeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("type", state.type);
  params.set("year", String(state.year));
  params.set("metric", state.metric);
  params.set("style", state.style);
  if (state.predict !== null) {
    params.set("predict", String(state.predict));
  }
  return params.toString();
}
