/**
 * Chart rendering as pure SVG strings.
 *
 * Every mark carries the number it encodes in data-* attributes, so (a)
 * hover tooltips read values straight off the DOM and (b) tests can
 * check that all styles of the same data agree on the same numbers.
 */

import type { TrendModel, WinnerMatrix } from "./types.js";

export interface ChartEntry {
  label: string;
  value: number;
}

export interface TrendChartData {
  points: [number, number][];
  model: TrendModel | null;
  prediction: { year: number; value: number } | null;
  estimatedYears: number[];
}

const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = 40;

const CYCLE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
  "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7",
  "#dbdb8d", "#9edae5",
];

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(value: number): string {
  return value.toFixed(2).replace(/\.00$/, "");
}

function svgDocument(body: string[], width = WIDTH, height = HEIGHT): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `width="${width}" height="${height}" role="img">`,
    ...body,
    "</svg>",
  ].join("\n");
}

function color(index: number): string {
  return CYCLE[index % CYCLE.length];
}

// ---------------------------------------------------------------------------
// bar charts

export function verticalBarChart(entries: ChartEntry[]): string {
  const peak = Math.max(...entries.map((entry) => entry.value), 0) || 1;
  const plotWidth = WIDTH - 2 * MARGIN;
  const plotHeight = HEIGHT - 2 * MARGIN;
  const slot = plotWidth / Math.max(entries.length, 1);
  const body: string[] = [];
  entries.forEach((entry, index) => {
    const barHeight = (entry.value / peak) * plotHeight;
    const x = MARGIN + index * slot + slot * 0.1;
    const y = HEIGHT - MARGIN - barHeight;
    body.push(
      `<rect class="mark" x="${fmt(x)}" y="${fmt(y)}" width="${fmt(slot * 0.8)}" ` +
        `height="${fmt(barHeight)}" fill="${color(index)}" ` +
        `data-label="${esc(entry.label)}" data-value="${entry.value}"/>`,
    );
  });
  body.push(`<line x1="${MARGIN}" y1="${HEIGHT - MARGIN}" x2="${WIDTH - MARGIN}" ` +
    `y2="${HEIGHT - MARGIN}" stroke="#333"/>`);
  return svgDocument(body);
}

export function horizontalBarChart(entries: ChartEntry[]): string {
  const peak = Math.max(...entries.map((entry) => entry.value), 0) || 1;
  const plotWidth = WIDTH - 2 * MARGIN - 120; // room for labels
  const slot = (HEIGHT - 2 * MARGIN) / Math.max(entries.length, 1);
  const body: string[] = [];
  entries.forEach((entry, index) => {
    const barWidth = (entry.value / peak) * plotWidth;
    const y = MARGIN + index * slot + slot * 0.1;
    body.push(
      `<rect class="mark" x="${MARGIN + 120}" y="${fmt(y)}" width="${fmt(barWidth)}" ` +
        `height="${fmt(slot * 0.8)}" fill="${color(index)}" ` +
        `data-label="${esc(entry.label)}" data-value="${entry.value}"/>`,
    );
    body.push(
      `<text x="${MARGIN + 112}" y="${fmt(y + slot * 0.55)}" text-anchor="end" ` +
        `font-size="11" font-family="sans-serif">${esc(entry.label.slice(0, 22))}</text>`,
    );
  });
  return svgDocument(body);
}

// ---------------------------------------------------------------------------
// pie and donut

function wedgePath(cx: number, cy: number, r: number, a0: number, a1: number): string {
  const x0 = cx + r * Math.cos(a0);
  const y0 = cy + r * Math.sin(a0);
  const x1 = cx + r * Math.cos(a1);
  const y1 = cy + r * Math.sin(a1);
  const largeArc = a1 - a0 > Math.PI ? 1 : 0;
  return `M ${fmt(cx)},${fmt(cy)} L ${fmt(x0)},${fmt(y0)} ` +
    `A ${fmt(r)} ${fmt(r)} 0 ${largeArc} 1 ${fmt(x1)},${fmt(y1)} Z`;
}

export function pieChart(entries: ChartEntry[], donut = false): string {
  const total = entries.reduce((sum, entry) => sum + entry.value, 0);
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const r = Math.min(WIDTH, HEIGHT) / 2 - MARGIN;
  const body: string[] = [];
  if (total > 0) {
    let angle = -Math.PI / 2;
    entries.forEach((entry, index) => {
      const fraction = entry.value / total;
      if (fraction <= 0) {
        return;
      }
      const attrs = `fill="${color(index)}" data-label="${esc(entry.label)}" ` +
        `data-value="${entry.value}"`;
      if (fraction >= 0.999999) {
        body.push(`<circle class="mark" cx="${cx}" cy="${cy}" r="${r}" ${attrs}/>`);
      } else {
        const next = angle + fraction * 2 * Math.PI;
        body.push(`<path class="mark" d="${wedgePath(cx, cy, r, angle, next)}" ${attrs}/>`);
        angle = next;
      }
    });
  }
  if (donut) {
    body.push(`<circle class="donut-hole" cx="${cx}" cy="${cy}" r="${fmt(r * 0.55)}" ` +
      `fill="#ffffff"/>`);
  }
  return svgDocument(body);
}

export function donutChart(entries: ChartEntry[]): string {
  return pieChart(entries, true);
}

// ---------------------------------------------------------------------------
// line and scatter

interface Scale {
  x: (value: number) => number;
  y: (value: number) => number;
}

function trendScale(data: TrendChartData): Scale {
  const xs = data.points.map(([year]) => year);
  const ys = data.points.map(([, value]) => value);
  if (data.prediction) {
    xs.push(data.prediction.year);
    ys.push(data.prediction.value);
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = Math.max(...ys, 0);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax || 1;
  return {
    x: (value) => MARGIN + ((value - xMin) / xSpan) * (WIDTH - 2 * MARGIN),
    y: (value) => HEIGHT - MARGIN - (value / ySpan) * (HEIGHT - 2 * MARGIN),
  };
}

function trendMarks(data: TrendChartData, scale: Scale, withLine: boolean): string[] {
  const body: string[] = [];
  if (withLine && data.points.length > 1) {
    const path = data.points
      .map(([year, value]) => `${fmt(scale.x(year))},${fmt(scale.y(value))}`)
      .join(" ");
    body.push(`<polyline points="${path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>`);
  }
  if (data.model && data.points.length > 1) {
    const years = data.points.map(([year]) => year);
    const from = Math.min(...years);
    const to = data.prediction ? data.prediction.year : Math.max(...years);
    const at = (year: number) => data.model!.intercept + data.model!.slope * year;
    body.push(
      `<line class="fit-line" x1="${fmt(scale.x(from))}" y1="${fmt(scale.y(at(from)))}" ` +
        `x2="${fmt(scale.x(to))}" y2="${fmt(scale.y(at(to)))}" ` +
        `stroke="#d62728" stroke-dasharray="6 3" stroke-width="1.5" ` +
        `data-slope="${data.model.slope}" data-intercept="${data.model.intercept}"/>`,
    );
  }
  for (const [year, value] of data.points) {
    const estimated = data.estimatedYears.includes(year);
    body.push(
      `<circle class="mark" cx="${fmt(scale.x(year))}" cy="${fmt(scale.y(value))}" r="4" ` +
        `fill="${estimated ? "#ff7f0e" : "#1f77b4"}" data-year="${year}" ` +
        `data-value="${value}"${estimated ? ' data-estimated="1"' : ""}/>`,
    );
  }
  if (data.prediction) {
    body.push(
      `<circle class="prediction" cx="${fmt(scale.x(data.prediction.year))}" ` +
        `cy="${fmt(scale.y(data.prediction.value))}" r="6" fill="none" ` +
        `stroke="#d62728" stroke-width="2" data-year="${data.prediction.year}" ` +
        `data-predicted="${data.prediction.value}"/>`,
    );
  }
  return body;
}

export function lineChart(data: TrendChartData): string {
  if (data.points.length === 0) {
    return svgDocument([]);
  }
  const scale = trendScale(data);
  return svgDocument(trendMarks(data, scale, true));
}

export function scatterChart(data: TrendChartData): string {
  if (data.points.length === 0) {
    return svgDocument([]);
  }
  const scale = trendScale(data);
  return svgDocument(trendMarks(data, scale, false));
}

// ---------------------------------------------------------------------------
// winner heat-map

export function heatmapChart(matrix: WinnerMatrix): string {
  const labelWidth = 170;
  const cellWidth = Math.max(
    18,
    Math.min(48, (WIDTH - labelWidth - MARGIN) / Math.max(matrix.years.length, 1)),
  );
  const cellHeight = 26;
  const height = MARGIN + matrix.parties.length * cellHeight + MARGIN;
  const body: string[] = [];
  matrix.parties.forEach((party, row) => {
    const y = MARGIN + row * cellHeight;
    body.push(
      `<text x="${labelWidth - 8}" y="${y + cellHeight * 0.7}" text-anchor="end" ` +
        `font-size="11" font-family="sans-serif">${esc(party.slice(0, 26))}</text>`,
    );
    matrix.years.forEach((year, column) => {
      const win = matrix.wins[row][column];
      body.push(
        `<rect class="mark cell" x="${fmt(labelWidth + column * cellWidth)}" y="${y}" ` +
          `width="${fmt(cellWidth - 2)}" height="${cellHeight - 2}" ` +
          `fill="${win ? "#d62728" : "#f0f0f0"}" stroke="#ffffff" ` +
          `data-party="${esc(party)}" data-year="${year}" data-win="${win}"/>`,
      );
    });
  });
  matrix.years.forEach((year, column) => {
    if (column % Math.ceil(matrix.years.length / 16) === 0) {
      body.push(
        `<text x="${fmt(labelWidth + column * cellWidth + cellWidth / 2 - 1)}" ` +
          `y="${MARGIN - 8}" text-anchor="middle" font-size="10" ` +
          `font-family="sans-serif">${year}</text>`,
      );
    }
  });
  return svgDocument(body, WIDTH, Math.max(height, 120));
}
