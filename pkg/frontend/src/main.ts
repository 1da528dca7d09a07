/**
 * App shell: selector wiring, view loading, URL-backed state.
 *
 * A view render fetches through the ApiClient cache, so re-rendering the
 * same selection with a different chart style issues no network requests.
 * Fetch failures land in a visible banner; the panes keep their previous
 * content instead of going blank.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  donutChart,
  heatmapChart,
  horizontalBarChart,
  lineChart,
  pieChart,
  scatterChart,
  verticalBarChart,
  type ChartEntry,
  type TrendChartData,
} from "./charts.js";
import {
  DEFAULT_STATE,
  METRICS,
  normalizeState,
  parseViewState,
  serializeViewState,
  validStylesFor,
  type ChartStyle,
  type MetricKey,
  type ViewState,
} from "./state.js";
import { attachHover, createTooltip } from "./tooltip.js";
import type { CatalogEntry, PartySummary } from "./types.js";

export interface AppElements {
  typeSelect: HTMLSelectElement;
  yearSelect: HTMLSelectElement;
  metricSelect: HTMLSelectElement;
  styleSelect: HTMLSelectElement;
  predictInput: HTMLInputElement;
  mapPane: HTMLElement;
  chartPane: HTMLElement;
  banner: HTMLElement;
}

function summaryEntries(summary: PartySummary[], metric: MetricKey): ChartEntry[] {
  const pick = (row: PartySummary): number | null => {
    switch (metric) {
      case "seats":
        return row.seats;
      case "seat_share":
        return row.seat_share_pct;
      case "vote_share":
        return row.vote_share_pct;
      default:
        return null;
    }
  };
  return summary
    .map((row) => ({ label: row.party, value: pick(row) }))
    .filter((entry): entry is ChartEntry => entry.value !== null);
}

function renderSummaryChart(entries: ChartEntry[], style: ChartStyle): string {
  switch (style) {
    case "hbar":
      return horizontalBarChart(entries);
    case "pie":
      return pieChart(entries);
    case "donut":
      return donutChart(entries);
    default:
      return verticalBarChart(entries);
  }
}

export class App {
  state: ViewState;
  private catalog: CatalogEntry[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly el: AppElements,
    private readonly win: Pick<Window, "history" | "location" | "addEventListener">,
  ) {
    this.state = parseViewState(win.location.search, DEFAULT_STATE);
  }

  async start(): Promise<void> {
    try {
      this.catalog = await this.api.catalog();
    } catch (error) {
      this.showError(error);
      return;
    }
    if (!this.catalog.some((e) => e.type === this.state.type && e.year === this.state.year)) {
      const first = this.catalog[this.catalog.length - 1];
      if (first) {
        this.state = normalizeState({ ...this.state, type: first.type, year: first.year });
      }
    }
    this.populateSelectors();
    this.wireEvents();
    await this.render();
  }

  private populateSelectors(): void {
    const types = [...new Set(this.catalog.map((entry) => entry.type))].sort();
    this.el.typeSelect.innerHTML = types
      .map((t) => `<option value="${t}">${t}</option>`)
      .join("");
    this.el.metricSelect.innerHTML = METRICS
      .map((m) => `<option value="${m.key}">${m.label}</option>`)
      .join("");
    this.syncSelectors();
  }

  private syncSelectors(): void {
    const years = this.catalog
      .filter((entry) => entry.type === this.state.type)
      .map((entry) => entry.year);
    const uniqueYears = [...new Set(years)].sort((a, b) => b - a);
    this.el.yearSelect.innerHTML = uniqueYears
      .map((y) => `<option value="${y}">${y}</option>`)
      .join("");
    if (!uniqueYears.includes(this.state.year) && uniqueYears.length > 0) {
      this.state = { ...this.state, year: uniqueYears[0] };
    }
    this.el.styleSelect.innerHTML = validStylesFor(this.state.metric)
      .map((s) => `<option value="${s}">${s}</option>`)
      .join("");
    this.el.typeSelect.value = this.state.type;
    this.el.yearSelect.value = String(this.state.year);
    this.el.metricSelect.value = this.state.metric;
    this.el.styleSelect.value = this.state.style;
    this.el.predictInput.value = this.state.predict === null ? "" : String(this.state.predict);
    this.el.predictInput.style.display =
      this.state.metric === "candidates" ? "" : "none";
  }

  private wireEvents(): void {
    this.el.typeSelect.addEventListener("change", () => {
      void this.update({ type: this.el.typeSelect.value as ViewState["type"] });
    });
    this.el.yearSelect.addEventListener("change", () => {
      void this.update({ year: Number(this.el.yearSelect.value) });
    });
    this.el.metricSelect.addEventListener("change", () => {
      void this.update({ metric: this.el.metricSelect.value as MetricKey });
    });
    this.el.styleSelect.addEventListener("change", () => {
      void this.update({ style: this.el.styleSelect.value as ChartStyle });
    });
    this.el.predictInput.addEventListener("change", () => {
      const year = Number(this.el.predictInput.value);
      void this.update({ predict: Number.isInteger(year) && year > 0 ? year : null });
    });
    this.win.addEventListener("popstate", () => {
      this.state = parseViewState(this.win.location.search, this.state);
      this.syncSelectors();
      void this.render();
    });
  }

  async update(patch: Partial<ViewState>): Promise<void> {
    this.state = normalizeState({ ...this.state, ...patch });
    this.syncSelectors();
    this.win.history.pushState(null, "", `?${serializeViewState(this.state)}`);
    await this.render();
  }

  async render(): Promise<void> {
    this.clearError();
    try {
      const [mapSvg, chartSvg] = await Promise.all([
        this.api.mapSvg(this.state.type, this.state.year),
        this.chartFor(this.state),
      ]);
      this.el.mapPane.innerHTML = mapSvg;
      this.el.chartPane.innerHTML = chartSvg;
    } catch (error) {
      this.showError(error);
    }
  }

  private async chartFor(state: ViewState): Promise<string> {
    if (state.metric === "candidates") {
      const trend = await this.api.candidateTrend(state.type, state.predict);
      const data: TrendChartData = {
        points: trend.series,
        model: trend.model,
        prediction:
          state.predict !== null && trend.prediction !== null
            ? { year: state.predict, value: trend.prediction }
            : null,
        estimatedYears: trend.estimated_years,
      };
      return state.style === "scatter" ? scatterChart(data) : lineChart(data);
    }
    if (state.metric === "winners") {
      return heatmapChart(await this.api.heatmap(state.type));
    }
    const summary = await this.api.summary(state.type, state.year);
    return renderSummaryChart(summaryEntries(summary, state.metric), state.style);
  }

  private showError(error: unknown): void {
    const text =
      error instanceof ApiError
        ? `request failed (${error.status}): ${error.url}`
        : `request failed: ${String(error)}`;
    this.el.banner.textContent = text;
    this.el.banner.style.display = "block";
  }

  private clearError(): void {
    this.el.banner.textContent = "";
    this.el.banner.style.display = "none";
  }
}

export function bootstrap(doc: Document, win: Window, baseUrl = ""): App {
  const byId = <T extends HTMLElement>(id: string): T => {
    const element = doc.getElementById(id);
    if (!element) {
      throw new Error(`missing #${id}`);
    }
    return element as T;
  };
  const elements: AppElements = {
    typeSelect: byId<HTMLSelectElement>("type-select"),
    yearSelect: byId<HTMLSelectElement>("year-select"),
    metricSelect: byId<HTMLSelectElement>("metric-select"),
    styleSelect: byId<HTMLSelectElement>("style-select"),
    predictInput: byId<HTMLInputElement>("predict-input"),
    mapPane: byId("map-pane"),
    chartPane: byId("chart-pane"),
    banner: byId("error-banner"),
  };
  const app = new App(new ApiClient(baseUrl), elements, win);
  const tooltip = createTooltip(doc.body);
  attachHover(elements.mapPane, tooltip);
  attachHover(elements.chartPane, tooltip);
  void app.start();
  return app;
}
