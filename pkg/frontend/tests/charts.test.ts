import { describe, expect, it } from "vitest";

import type { ChartPayload } from "../src/api.js";
import {
  HEIGHT,
  WIDTH,
  attachBarPicker,
  attachLasso,
  drawSelectionBackdrop,
  linearScale,
  renderChart,
} from "../src/charts.js";

const scatterPayload: ChartPayload = {
  v: 1,
  spec: "c0",
  mark: "point",
  encoding: { x: "x", y: "y" },
  data: [
    { x: 0, y: 0, row: 0 },
    { x: 5, y: 5, row: 1 },
    { x: 10, y: 10, row: 2 },
  ],
};

const barPayload: ChartPayload = {
  v: 1,
  spec: "c1",
  mark: "bar",
  encoding: { x: "x", y: "y" },
  data: [
    { x: "a", y: 3, rows: 3 },
    { x: "b", y: 1, rows: 1 },
  ],
};

describe("linearScale", () => {
  it("maps and inverts", () => {
    const s = linearScale([0, 10], [100, 200]);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s.invert(150)).toBeCloseTo(5);
  });
});

describe("renderChart", () => {
  it("renders one circle per scatter point", () => {
    const chart = renderChart(scatterPayload);
    expect(chart.svg.querySelectorAll("circle").length).toBe(3);
  });

  it("renders deterministically for identical payloads", () => {
    const a = renderChart(scatterPayload).svg.outerHTML;
    const b = renderChart(scatterPayload).svg.outerHTML;
    expect(a).toBe(b);
  });

  it("renders bars with keys and values", () => {
    const chart = renderChart(barPayload);
    const rects = [...chart.svg.querySelectorAll("rect")];
    expect(rects.map((r) => r.dataset.key)).toEqual(["a", "b"]);
  });

  it("overlays a second layer into the same svg with its own class", () => {
    const chart = renderChart(scatterPayload, { color: "#9e9e9e", markClass: "original-marks" });
    renderChart(scatterPayload, { color: "#1565c0", markClass: "synthetic-marks", into: chart });
    expect(chart.svg.querySelectorAll(".original-marks circle").length).toBe(3);
    expect(chart.svg.querySelectorAll(".synthetic-marks circle").length).toBe(3);
  });
});

function pointerEvent(type: string, x: number, y: number): MouseEvent {
  return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true });
}

describe("brushes", () => {
  it("lasso emits a polygon in data coordinates", () => {
    const chart = renderChart(scatterPayload);
    document.body.appendChild(chart.svg);
    let got: any = null;
    attachLasso(chart, (sel) => (got = sel));
    // jsdom layout is zero-sized; viewBox fallback maps client px 1:1
    chart.svg.dispatchEvent(pointerEvent("pointerdown", 100, 50));
    chart.svg.dispatchEvent(pointerEvent("pointermove", 300, 50));
    chart.svg.dispatchEvent(pointerEvent("pointermove", 200, 200));
    chart.svg.dispatchEvent(pointerEvent("pointerup", 200, 200));
    expect(got).not.toBeNull();
    expect(got.kind).toBe("region");
    expect(got.polygon.length).toBe(3);
    for (const [x, y] of got.polygon) {
      expect(x).toBeGreaterThanOrEqual(chart.xScale.domain[0] - 5);
      expect(y).toBeLessThanOrEqual(chart.yScale.domain[1] + 5);
    }
    // round trip: data -> pixel -> data
    const [dx] = got.polygon[0];
    expect(chart.xScale.invert(chart.xScale(dx))).toBeCloseTo(dx);
  });

  it("bar picker toggles clicked bars", () => {
    const chart = renderChart(barPayload);
    document.body.appendChild(chart.svg);
    let got: any = null;
    attachBarPicker(chart, (sel) => (got = sel));
    const rect = chart.svg.querySelector("rect[data-key='a']")!;
    rect.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(got.kind).toBe("bars");
    expect(got.bars).toEqual(["a"]);
  });

  it("selection backdrop is inserted behind marks", () => {
    const chart = renderChart(scatterPayload);
    drawSelectionBackdrop(chart, { kind: "region", rect: [0, 0, 5, 5] });
    const backdrop = chart.svg.querySelector(".selection-backdrop");
    expect(backdrop).not.toBeNull();
    expect(backdrop!.getAttribute("fill")).toBe("#bbb");
  });
});
