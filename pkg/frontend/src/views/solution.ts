/** Scheme ranking list plus the before/after overlay comparison: original
 * data in gray, synthetic in color, with a toggle that swaps in the
 * zero-weight baseline scheme. */

import type { Client, SchemeRow } from "../api.js";
import { drawSelectionBackdrop, renderChart } from "../charts.js";
import type { Store } from "../state.js";

export class SolutionView {
  readonly root: HTMLElement;
  private sortKey: string | null = null;
  private sortDesc = true;

  constructor(private client: Client, private store: Store) {
    this.root = document.createElement("section");
    this.root.className = "solution-view";
    this.root.innerHTML = `
      <h2>Solutions</h2>
      <div class="generate">
        epsilon <input class="epsilon" type="number" value="2" min="0.1" step="0.1" style="width:4em">
        <button class="run">Generate scheme</button>
        <span class="spinner" hidden>generating…</span>
      </div>
      <table class="ranking">
        <thead><tr>
          <th data-key="id">scheme</th><th data-key="epsilon">epsilon</th>
          <th data-key="fidelity">fidelity</th><th data-key="delta">pattern delta</th>
          <th>status</th>
        </tr></thead>
        <tbody></tbody>
      </table>
      <label class="baseline-label">
        <input type="checkbox" class="baseline-toggle"> compare against baseline
      </label>
      <div class="overlay-host"></div>
    `;
    this.root.querySelector(".run")!.addEventListener("click", () => void this.generate());
    this.root.querySelectorAll<HTMLElement>("th[data-key]").forEach((th) => {
      th.addEventListener("click", () => {
        const key = th.dataset.key!;
        this.sortDesc = this.sortKey === key ? !this.sortDesc : true;
        this.sortKey = key;
        this.renderTable();
      });
    });
    this.root.querySelector(".baseline-toggle")!.addEventListener("change", () => {
      void this.toggleBaseline();
    });
    store.subscribe(() => this.renderTable());
  }

  /** Kick off a generation with the current weights and poll to completion. */
  async generate(extra: Record<string, unknown> = {}): Promise<string> {
    const epsilon = Number(this.root.querySelector<HTMLInputElement>(".epsilon")!.value);
    this.store.update({ generating: true });
    this.root.querySelector<HTMLElement>(".spinner")!.hidden = false;
    try {
      const schemeId = await this.client.generateScheme({ epsilon, k: 1, ...extra });
      await this.client.waitForScheme(schemeId);
      this.store.update({ schemes: await this.client.listSchemes() });
      return schemeId;
    } finally {
      this.store.update({ generating: false });
      this.root.querySelector<HTMLElement>(".spinner")!.hidden = true;
    }
  }

  private rowValue(row: SchemeRow, key: string): number | string {
    if (key === "fidelity") return row.summary?.mean_attribute_fidelity ?? -1;
    if (key === "delta") return row.summary?.mean_pattern_delta ?? -1;
    return (row as any)[key] ?? "";
  }

  private renderTable(): void {
    const rows = [...this.store.get().schemes];
    if (this.sortKey) {
      const key = this.sortKey;
      rows.sort((a, b) => {
        const va = this.rowValue(a, key);
        const vb = this.rowValue(b, key);
        const cmp = va < vb ? -1 : va > vb ? 1 : 0;
        return this.sortDesc ? -cmp : cmp;
      });
    }
    const body = this.root.querySelector("tbody")!;
    body.innerHTML = "";
    for (const row of rows) {
      const tr = document.createElement("tr");
      tr.dataset.scheme = row.id;
      tr.className = row.status === "complete" ? "scheme-row" : "scheme-row pending";
      const fidelity = row.summary?.mean_attribute_fidelity;
      const delta = row.summary?.mean_pattern_delta;
      tr.innerHTML = `
        <td>${row.id}</td>
        <td>${row.epsilon ?? ""}</td>
        <td>${fidelity === undefined || fidelity === null ? "" : fidelity.toFixed(3)}
            ${this.bar(fidelity ?? 0, true)}</td>
        <td>${delta === undefined || delta === null ? "" : delta.toFixed(3)}
            ${this.bar(Math.min((delta ?? 0) / 50, 1), false)}</td>
        <td>${row.status === "complete" ? "complete" : `<span class="spin">${row.status}</span>`}</td>
      `;
      tr.addEventListener("click", () => void this.selectScheme(row.id));
      body.appendChild(tr);
    }
  }

  /** Green bar for increases, red-striped for decreases. */
  private bar(fraction: number, positive: boolean): string {
    const width = Math.round(Math.max(0, Math.min(1, fraction)) * 60);
    const cls = positive ? "bar-up" : "bar-down";
    return `<span class="${cls}" style="display:inline-block;height:8px;width:${width}px;` +
      `background:${positive ? "#2e7d32" : "repeating-linear-gradient(45deg,#c62828,#c62828 3px,#fff 3px,#fff 5px)"}"></span>`;
  }

  /** Toggle a scheme in the comparison set (side-by-side overlays). */
  async selectScheme(schemeId: string): Promise<void> {
    const current = this.store.get().comparedSchemes;
    const next = current.includes(schemeId)
      ? current.filter((id) => id !== schemeId)
      : [...current, schemeId];
    this.store.update({ comparedSchemes: next });
    await this.renderOverlays();
  }

  /** Generate (once) and swap in the zero-weight baseline for comparison. */
  async toggleBaseline(): Promise<void> {
    const toggle = this.root.querySelector<HTMLInputElement>(".baseline-toggle")!;
    this.store.update({ showBaseline: toggle.checked });
    if (toggle.checked && !this.store.get().baselineScheme) {
      const epsilon = Number(this.root.querySelector<HTMLInputElement>(".epsilon")!.value);
      const schemeId = await this.client.generateScheme({ epsilon, k: 1, baseline: true });
      await this.client.waitForScheme(schemeId);
      this.store.update({
        baselineScheme: schemeId,
        schemes: await this.client.listSchemes(),
      });
    }
    await this.renderOverlays();
  }

  /** One overlay per (scheme, pattern chart): original marks in gray,
   * synthetic marks in color, the saved selection as a gray backdrop. With
   * the baseline toggle on, the zero-weight scheme replaces the selection. */
  async renderOverlays(): Promise<void> {
    const { comparedSchemes, showBaseline, baselineScheme, patterns } = this.store.get();
    const host = this.root.querySelector(".overlay-host")!;
    host.innerHTML = "";
    const chosen =
      showBaseline && baselineScheme ? [baselineScheme] : comparedSchemes;
    if (!chosen.length) return;
    const chartIds = [...new Set(patterns.map((p) => p.chart))];
    for (const schemeId of chosen) {
      for (const chartId of chartIds) {
        const original = await this.client.chartData(chartId);
        const synthetic = await this.client.syntheticChart(schemeId, chartId);
        const box = document.createElement("div");
        box.className = "overlay";
        box.dataset.scheme = schemeId;
        box.dataset.chart = chartId;
        const chart = renderChart(original, { color: "#9e9e9e", markClass: "original-marks" });
        renderChart(synthetic, { color: "#1565c0", markClass: "synthetic-marks", into: chart });
        for (const pattern of patterns.filter((p) => p.chart === chartId)) {
          drawSelectionBackdrop(chart, pattern.selection);
        }
        box.appendChild(chart.svg);
        host.appendChild(box);
      }
    }
  }
}
