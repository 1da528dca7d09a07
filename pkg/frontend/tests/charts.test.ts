import { describe, expect, it } from "vitest";

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
} from "../src/charts.js";

const ENTRIES: ChartEntry[] = [
  { label: "Liberal", value: 98 },
  { label: "Conservative", value: 78 },
  { label: "New Democratic Party", value: 21 },
  { label: "Social Credit", value: 24 },
];

function parse(svg: string): Document {
  return new DOMParser().parseFromString(svg, "image/svg+xml");
}

function markValues(svg: string): number[] {
  const doc = parse(svg);
  return [...doc.querySelectorAll(".mark")].map((el) =>
    Number(el.getAttribute("data-value")),
  );
}

const sum = (values: number[]): number => values.reduce((a, b) => a + b, 0);

describe("every chart style encodes the same numbers", () => {
  it("pie slices sum to bar heights", () => {
    const total = sum(ENTRIES.map((entry) => entry.value));
    for (const svg of [
      verticalBarChart(ENTRIES),
      horizontalBarChart(ENTRIES),
      pieChart(ENTRIES),
      donutChart(ENTRIES),
    ]) {
      expect(sum(markValues(svg))).toBe(total);
    }
  });

  it("labels survive in every style", () => {
    for (const svg of [verticalBarChart(ENTRIES), pieChart(ENTRIES)]) {
      const labels = [...parse(svg).querySelectorAll(".mark")].map((el) =>
        el.getAttribute("data-label"),
      );
      expect(labels).toEqual(ENTRIES.map((entry) => entry.label));
    }
  });
});

describe("bar charts", () => {
  it("renders one bar per entry above a baseline", () => {
    const doc = parse(verticalBarChart(ENTRIES));
    expect(doc.querySelectorAll("rect.mark").length).toBe(4);
    expect(doc.querySelectorAll("line").length).toBe(1);
  });

  it("horizontal bars carry visible party labels", () => {
    const doc = parse(horizontalBarChart(ENTRIES));
    const text = [...doc.querySelectorAll("text")].map((el) => el.textContent);
    expect(text).toContain("Liberal");
  });
});

describe("pie and donut", () => {
  it("a single entry renders as a full circle", () => {
    const doc = parse(pieChart([{ label: "Only", value: 5 }]));
    expect(doc.querySelectorAll("circle.mark").length).toBe(1);
  });

  it("donut differs from pie only by the hole", () => {
    const pie = pieChart(ENTRIES);
    const donut = donutChart(ENTRIES);
    expect(parse(donut).querySelectorAll(".donut-hole").length).toBe(1);
    expect(parse(pie).querySelectorAll(".donut-hole").length).toBe(0);
    expect(markValues(pie)).toEqual(markValues(donut));
  });
});

const TREND: TrendChartData = {
  points: [
    [1867, 10],
    [1872, 12],
    [1874, 14],
  ],
  model: { slope: 0.562, intercept: -1040.0, r2: 0.97, mean: 12, median: 12 },
  prediction: { year: 2019, value: 336.2 },
  estimatedYears: [1872],
};

describe("trend charts", () => {
  it("line chart draws points, a fit line and a prediction marker", () => {
    const doc = parse(lineChart(TREND));
    expect(doc.querySelectorAll("circle.mark").length).toBe(3);
    expect(doc.querySelectorAll(".fit-line").length).toBe(1);
    const marker = doc.querySelector(".prediction");
    expect(marker?.getAttribute("data-year")).toBe("2019");
    expect(marker?.getAttribute("data-predicted")).toBe("336.2");
    expect(doc.querySelectorAll("polyline").length).toBe(1);
  });

  it("scatter omits the connecting line but keeps the fit", () => {
    const doc = parse(scatterChart(TREND));
    expect(doc.querySelectorAll("polyline").length).toBe(0);
    expect(doc.querySelectorAll(".fit-line").length).toBe(1);
    expect(doc.querySelectorAll("circle.mark").length).toBe(3);
  });

  it("estimated points are flagged", () => {
    const doc = parse(lineChart(TREND));
    const flagged = [...doc.querySelectorAll("circle.mark")].filter((el) =>
      el.getAttribute("data-estimated"),
    );
    expect(flagged.map((el) => el.getAttribute("data-year"))).toEqual(["1872"]);
  });
});

describe("winner heat-map", () => {
  it("renders parties x years cells with win flags", () => {
    const doc = parse(
      heatmapChart({
        parties: ["A", "B"],
        years: [1867, 1872, 1874],
        wins: [
          [1, 0, 1],
          [0, 1, 0],
        ],
      }),
    );
    const cells = [...doc.querySelectorAll(".cell")];
    expect(cells.length).toBe(6);
    const wins = cells.filter((el) => el.getAttribute("data-win") === "1");
    expect(wins.length).toBe(3);
  });
});
