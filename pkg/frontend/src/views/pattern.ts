/** Chart settings panel plus the interactive selection surface: brush a
 * region/interval/bars, save it as a weighted pattern, revisit saved ones. */

import type { ChartSpecBody, Client, SelectionBody } from "../api.js";
import {
  PATTERN_COLORS,
  RenderedChart,
  attachBarPicker,
  attachIntervalBrush,
  attachLasso,
  drawSelectionBackdrop,
  renderChart,
} from "../charts.js";
import type { Store } from "../state.js";

export class PatternView {
  readonly root: HTMLElement;
  private chart: RenderedChart | null = null;
  private pending: SelectionBody | null = null;

  constructor(private client: Client, private store: Store) {
    this.root = document.createElement("section");
    this.root.className = "pattern-view";
    this.root.innerHTML = `
      <h2>Patterns</h2>
      <div class="chart-settings">
        <select class="chart-type"><option>scatter</option><option>line</option><option>bar</option></select>
        <select class="x-attr"></select>
        <select class="y-attr"></select>
        <input class="x-step" type="number" placeholder="x step" style="width:4em">
        <select class="aggregate"><option>mean</option><option>sum</option><option>count</option></select>
        <button class="make-chart">Chart</button>
      </div>
      <div class="info-card"></div>
      <div class="chart-host"></div>
      <button class="add-pattern" disabled>Add pattern</button>
      <input class="weight" type="number" value="1" min="0" step="0.5" style="width:4em">
      <ul class="pattern-list"></ul>
    `;
    store.subscribe(() => this.renderList());
    this.root.querySelector(".make-chart")!.addEventListener("click", () => {
      void this.createChartFromSettings();
    });
    this.root.querySelector(".add-pattern")!.addEventListener("click", () => {
      void this.savePending();
    });
  }

  refreshAttributeOptions(): void {
    const attrs = this.store.get().attributes;
    for (const cls of ["x-attr", "y-attr"]) {
      const select = this.root.querySelector<HTMLSelectElement>(`.${cls}`)!;
      select.innerHTML = attrs.map((a) => `<option>${a.name}</option>`).join("");
    }
  }

  private async createChartFromSettings(): Promise<void> {
    const spec: ChartSpecBody = {
      chart_type: this.root.querySelector<HTMLSelectElement>(".chart-type")!.value as any,
      x: this.root.querySelector<HTMLSelectElement>(".x-attr")!.value,
    };
    const y = this.root.querySelector<HTMLSelectElement>(".y-attr")!.value;
    if (spec.chart_type === "scatter" || y) spec.y = y;
    if (spec.chart_type !== "scatter") {
      spec.aggregate = this.root.querySelector<HTMLSelectElement>(".aggregate")!.value as any;
      const step = this.root.querySelector<HTMLInputElement>(".x-step")!.value;
      if (step) spec.x_step = Number(step);
    }
    await this.createChart(spec);
  }

  /** Create a chart on the server and render it with the matching brush. */
  async createChart(spec: ChartSpecBody): Promise<string> {
    const chartId = await this.client.createChart(spec);
    this.store.update({ chartId });
    const payload = await this.client.chartData(chartId);
    const host = this.root.querySelector(".chart-host")!;
    host.innerHTML = "";
    this.chart = renderChart(payload);
    host.appendChild(this.chart.svg);
    const onBrush = (selection: SelectionBody) => {
      this.pending = selection;
      this.root.querySelector<HTMLButtonElement>(".add-pattern")!.disabled = false;
    };
    if (payload.mark === "point") attachLasso(this.chart, onBrush);
    else if (payload.mark === "line") attachIntervalBrush(this.chart, onBrush);
    else attachBarPicker(this.chart, onBrush);
    return chartId;
  }

  /** Save the in-progress selection as a pattern with the chosen weight. */
  async savePending(): Promise<void> {
    const chartId = this.store.get().chartId;
    if (!this.pending || !chartId) return;
    const weight = Number(this.root.querySelector<HTMLInputElement>(".weight")!.value);
    const pattern = await this.client.addPattern(chartId, this.pending, weight);
    if (this.chart) drawSelectionBackdrop(this.chart, pattern.selection);
    this.pending = null;
    this.root.querySelector<HTMLButtonElement>(".add-pattern")!.disabled = true;
    this.store.update({ patterns: await this.client.listPatterns() });
  }

  private renderList(): void {
    const { patterns, highlightedPattern, rows } = this.store.get();
    const card = this.root.querySelector(".info-card")!;
    const covered = new Set<number>();
    for (const p of patterns) for (const r of p.records) covered.add(r);
    card.textContent = rows
      ? `${patterns.length} patterns, ${covered.size} records covered ` +
        `(${((100 * covered.size) / rows).toFixed(1)}% of ${rows})`
      : "";
    const list = this.root.querySelector(".pattern-list")!;
    list.innerHTML = "";
    for (const p of patterns) {
      const item = document.createElement("li");
      item.dataset.pattern = p.id;
      item.className = p.id === highlightedPattern ? "pattern highlighted" : "pattern";
      item.innerHTML = `
        <span class="swatch" style="color:${PATTERN_COLORS[p.pattern_type]}">&#9632;</span>
        <b>${p.id}</b> ${p.pattern_type} (${p.records.length} records)
        weight <input class="pattern-weight" type="number" min="0" step="0.5" value="${p.weight}" style="width:4em">
      `;
      item.querySelector("b")!.addEventListener("click", () => this.store.highlight(p.id));
      const weightInput = item.querySelector<HTMLInputElement>(".pattern-weight")!;
      weightInput.addEventListener("change", async () => {
        await this.client.setWeight(p.id, Number(weightInput.value));
        this.store.update({ patterns: await this.client.listPatterns() });
      });
      list.appendChild(item);
    }
  }
}
