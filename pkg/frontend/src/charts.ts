/** SVG chart rendering for the server's declarative chart payloads, plus the
 * brush interactions that turn pixels back into data-coordinate selections.
 *
 * Geometry is driven by an explicit viewBox-sized coordinate system rather
 * than layout measurements, so rendering and brushing behave identically in
 * a headless DOM.
 */

import type { ChartPayload, GroupPoint, ScatterPoint, SelectionBody } from "./api.js";

export const WIDTH = 420;
export const HEIGHT = 280;
export const MARGIN = { left: 48, right: 12, top: 12, bottom: 32 };

export const PATTERN_COLORS: Record<string, string> = {
  cluster: "#2e7d32", // green
  correlation: "#795548", // brown
  order: "#6a1b9a", // purple
};

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Scale {
  (v: number): number;
  invert(px: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  scale.invert = (px: number) => d0 + ((px - r0) / (r1 - r0 || 1)) * span;
  scale.domain = domain;
  return scale;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

export function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export interface RenderedChart {
  svg: SVGSVGElement;
  xScale: Scale;
  yScale: Scale;
  /** group keys in render order, for bar charts */
  keys: (string | number)[];
}

export interface RenderOptions {
  /** mark color; scatter overlays pass gray for original data */
  color?: string;
  /** per-mark CSS class */
  markClass?: string;
  /** draw on top of an existing chart (shared scales) */
  into?: RenderedChart;
}

export function renderChart(payload: ChartPayload, options: RenderOptions = {}): RenderedChart {
  if (options.into) {
    drawMarks(options.into, payload, options);
    return options.into;
  }
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    class: `chart chart-${payload.mark}`,
  });
  svg.dataset.spec = payload.spec;
  let xScale: Scale;
  const keys: (string | number)[] = [];
  if (payload.mark === "point") {
    const pts = payload.data as ScatterPoint[];
    xScale = linearScale(extent(pts.map((p) => p.x)), [MARGIN.left, WIDTH - MARGIN.right]);
  } else {
    const groups = payload.data as GroupPoint[];
    for (const g of groups) keys.push(g.x);
    xScale = linearScale([0, Math.max(keys.length, 1)], [MARGIN.left, WIDTH - MARGIN.right]);
  }
  const ys = payload.data.map((d) => (d as any).y as number);
  const yScale = linearScale(
    [Math.min(0, ...ys), Math.max(...ys, 1)],
    [HEIGHT - MARGIN.bottom, MARGIN.top],
  );
  const chart: RenderedChart = { svg, xScale, yScale, keys };
  drawAxes(chart);
  drawMarks(chart, payload, options);
  return chart;
}

function drawAxes(chart: RenderedChart): void {
  const axis = el("g", { class: "axes", stroke: "#333" });
  axis.appendChild(
    el("line", {
      x1: MARGIN.left, y1: HEIGHT - MARGIN.bottom,
      x2: WIDTH - MARGIN.right, y2: HEIGHT - MARGIN.bottom,
    }),
  );
  axis.appendChild(
    el("line", { x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: HEIGHT - MARGIN.bottom }),
  );
  chart.svg.appendChild(axis);
}

function drawMarks(chart: RenderedChart, payload: ChartPayload, options: RenderOptions): void {
  const group = el("g", { class: options.markClass ?? "marks" });
  if (payload.mark === "point") {
    for (const p of payload.data as ScatterPoint[]) {
      const c = el("circle", {
        cx: chart.xScale(p.x),
        cy: chart.yScale(p.y),
        r: 3,
        fill: options.color ?? "#1565c0",
        "fill-opacity": 0.7,
      });
      c.dataset.row = String(p.row);
      c.dataset.x = String(p.x);
      c.dataset.y = String(p.y);
      group.appendChild(c);
    }
  } else if (payload.mark === "bar") {
    const groups = payload.data as GroupPoint[];
    const band = (WIDTH - MARGIN.left - MARGIN.right) / Math.max(groups.length, 1);
    groups.forEach((g, i) => {
      const y = chart.yScale(g.y);
      const rect = el("rect", {
        x: MARGIN.left + i * band + band * 0.1,
        y,
        width: band * 0.8,
        height: Math.max(HEIGHT - MARGIN.bottom - y, 0),
        fill: options.color ?? "#1565c0",
        "fill-opacity": 0.8,
      });
      rect.dataset.key = String(g.x);
      rect.dataset.value = String(g.y);
      group.appendChild(rect);
      const label = el("text", {
        x: MARGIN.left + i * band + band / 2,
        y: HEIGHT - MARGIN.bottom + 14,
        "text-anchor": "middle",
        "font-size": 9,
      });
      label.textContent = String(g.x);
      group.appendChild(label);
    });
  } else {
    const groups = payload.data as GroupPoint[];
    const coords = groups.map(
      (g) => `${chart.xScale(Number(g.x))},${chart.yScale(g.y)}`,
    );
    const path = el("polyline", {
      points: coords.join(" "),
      fill: "none",
      stroke: options.color ?? "#1565c0",
      "stroke-width": 2,
      class: "line-mark",
    });
    group.appendChild(path);
    groups.forEach((g) => {
      const dot = el("circle", {
        cx: chart.xScale(Number(g.x)),
        cy: chart.yScale(g.y),
        r: 2.5,
        fill: options.color ?? "#1565c0",
      });
      dot.dataset.key = String(g.x);
      group.appendChild(dot);
    });
  }
  chart.svg.appendChild(group);
}

// ---------------------------------------------------------------------------
// Brushing
// ---------------------------------------------------------------------------

export type BrushDone = (selection: SelectionBody) => void;

/** Convert a client-pixel event position to viewBox coordinates. */
function viewBoxPoint(svg: SVGSVGElement, event: PointerEvent): [number, number] {
  const rect = svg.getBoundingClientRect();
  const w = rect.width || WIDTH;
  const h = rect.height || HEIGHT;
  return [((event.clientX - rect.left) / w) * WIDTH, ((event.clientY - rect.top) / h) * HEIGHT];
}

/** Freehand lasso on a scatter chart; emits a polygon in data coordinates. */
export function attachLasso(chart: RenderedChart, done: BrushDone): void {
  let vertices: [number, number][] = [];
  let preview: SVGPolygonElement | null = null;
  chart.svg.addEventListener("pointerdown", (event) => {
    vertices = [viewBoxPoint(chart.svg, event as PointerEvent)];
    preview = el("polygon", { class: "lasso-preview", fill: "#ccc", "fill-opacity": 0.3, stroke: "#888" });
    chart.svg.appendChild(preview);
  });
  chart.svg.addEventListener("pointermove", (event) => {
    if (!preview) return;
    vertices.push(viewBoxPoint(chart.svg, event as PointerEvent));
    preview.setAttribute("points", vertices.map(([x, y]) => `${x},${y}`).join(" "));
  });
  chart.svg.addEventListener("pointerup", () => {
    if (!preview) return;
    preview.remove();
    preview = null;
    if (vertices.length >= 3) {
      done({
        kind: "region",
        polygon: vertices.map(([px, py]) => [chart.xScale.invert(px), chart.yScale.invert(py)]),
      });
    }
    vertices = [];
  });
}

/** Horizontal interval brush on a line chart; emits [lo, hi] on x. */
export function attachIntervalBrush(chart: RenderedChart, done: BrushDone): void {
  let startX: number | null = null;
  let preview: SVGRectElement | null = null;
  chart.svg.addEventListener("pointerdown", (event) => {
    [startX] = viewBoxPoint(chart.svg, event as PointerEvent);
    preview = el("rect", {
      class: "interval-preview", y: MARGIN.top, height: HEIGHT - MARGIN.top - MARGIN.bottom,
      fill: "#ccc", "fill-opacity": 0.3,
    });
    chart.svg.appendChild(preview);
  });
  chart.svg.addEventListener("pointermove", (event) => {
    if (startX === null || !preview) return;
    const [x] = viewBoxPoint(chart.svg, event as PointerEvent);
    preview.setAttribute("x", String(Math.min(startX, x)));
    preview.setAttribute("width", String(Math.abs(x - startX)));
  });
  chart.svg.addEventListener("pointerup", (event) => {
    if (startX === null) return;
    const [endX] = viewBoxPoint(chart.svg, event as PointerEvent);
    preview?.remove();
    preview = null;
    const lo = chart.xScale.invert(Math.min(startX, endX));
    const hi = chart.xScale.invert(Math.max(startX, endX));
    startX = null;
    done({ kind: "interval", interval: [lo, hi] });
  });
}

/** Click-to-toggle bars; emits the selected bar keys. */
export function attachBarPicker(chart: RenderedChart, done: BrushDone): void {
  const chosen = new Set<string>();
  chart.svg.addEventListener("click", (event) => {
    const target = event.target as SVGElement;
    if (target.tagName !== "rect" || target.dataset.key === undefined) return;
    const key = target.dataset.key;
    if (chosen.has(key)) {
      chosen.delete(key);
      target.setAttribute("stroke", "none");
    } else {
      chosen.add(key);
      target.setAttribute("stroke", "#333");
      target.setAttribute("stroke-width", "2");
    }
    if (chosen.size > 0) {
      done({ kind: "bars", bars: [...chosen] });
    }
  });
}

/** Gray backdrop for a saved selection, drawn behind the marks. */
export function drawSelectionBackdrop(chart: RenderedChart, selection: SelectionBody): void {
  let shape: SVGElement | null = null;
  if (selection.kind === "region" && selection.rect) {
    const [x0, y0, x1, y1] = selection.rect;
    shape = el("rect", {
      x: Math.min(chart.xScale(x0), chart.xScale(x1)),
      y: Math.min(chart.yScale(y0), chart.yScale(y1)),
      width: Math.abs(chart.xScale(x1) - chart.xScale(x0)),
      height: Math.abs(chart.yScale(y1) - chart.yScale(y0)),
    });
  } else if (selection.kind === "region" && selection.polygon) {
    shape = el("polygon", {
      points: selection.polygon
        .map(([x, y]) => `${chart.xScale(x)},${chart.yScale(y)}`)
        .join(" "),
    });
  } else if (selection.kind === "interval" && selection.interval) {
    const [lo, hi] = selection.interval;
    shape = el("rect", {
      x: chart.xScale(lo), y: MARGIN.top,
      width: chart.xScale(hi) - chart.xScale(lo),
      height: HEIGHT - MARGIN.top - MARGIN.bottom,
    });
  }
  if (shape) {
    shape.setAttribute("class", "selection-backdrop");
    shape.setAttribute("fill", "#bbb");
    shape.setAttribute("fill-opacity", "0.35");
    shape.setAttribute("stroke", "#888");
    chart.svg.insertBefore(shape, chart.svg.firstChild?.nextSibling ?? null);
  }
}
