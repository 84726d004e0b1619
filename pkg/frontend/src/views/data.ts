/** Attribute browser: upload, per-attribute distributions (mini bars for
 * categorical, a coarse density curve for numerical), selection toggles and
 * range filters. */

import type { AttributeInfo, Client, FlowPayload } from "../api.js";
import { el } from "../charts.js";
import type { Store } from "../state.js";

export class DataView {
  readonly root: HTMLElement;
  private filters: Record<string, number[]> = {};

  constructor(private client: Client, private store: Store) {
    this.root = document.createElement("section");
    this.root.className = "data-view";
    this.root.innerHTML = `
      <h2>Data</h2>
      <input type="file" class="upload" accept=".csv">
      <div class="summary"></div>
      <ul class="attributes"></ul>
      <button class="confirm" disabled>Confirm selection</button>
    `;
    const input = this.root.querySelector<HTMLInputElement>(".upload")!;
    input.addEventListener("change", async () => {
      const file = input.files?.[0];
      if (file) await this.upload(await file.text());
    });
  }

  /** Upload CSV text and render the attribute list with distributions. */
  async upload(csv: string): Promise<void> {
    const result = await this.client.uploadCsv(csv);
    this.store.update({
      attributes: result.attributes,
      rows: result.rows,
      selectedAttributes: result.attributes.map((a) => a.name),
    });
    this.renderAttributes(result.attributes, result.rows);
    await this.renderDistributions();
  }

  /** Per-attribute mini chart from the binned flow payload. */
  private async renderDistributions(): Promise<void> {
    const flow: FlowPayload = await this.client.flow();
    flow.columns.forEach((column, ci) => {
      const item = this.root.querySelector(`li[data-attr='${column}']`);
      if (!item) return;
      item.querySelector(".mini-dist")?.remove();
      const bins = flow.bins[ci];
      const peak = Math.max(...bins.map((b) => b.count), 1);
      const w = 120;
      const h = 26;
      const svg = el("svg", { viewBox: `0 0 ${w} ${h}`, width: w, height: h, class: "mini-dist" });
      const attr = this.store.get().attributes.find((a) => a.name === column);
      const band = w / bins.length;
      if (attr?.type === "numerical") {
        const points = bins
          .map((b, i) => `${i * band + band / 2},${h - (b.count / peak) * (h - 2)}`)
          .join(" ");
        svg.appendChild(
          el("polyline", { points, fill: "none", stroke: "#1565c0", class: "density-curve" }),
        );
      } else {
        bins.forEach((b, i) => {
          svg.appendChild(
            el("rect", {
              x: i * band + 1,
              y: h - (b.count / peak) * (h - 2),
              width: Math.max(band - 2, 1),
              height: (b.count / peak) * (h - 2),
              fill: "#90a4ae",
              class: "dist-bar",
            }),
          );
        });
      }
      item.appendChild(svg);
    });
  }

  private renderAttributes(attributes: AttributeInfo[], rows: number): void {
    this.root.querySelector(".summary")!.textContent =
      `${rows} records, ${attributes.length} attributes`;
    const list = this.root.querySelector(".attributes")!;
    list.innerHTML = "";
    for (const attr of attributes) {
      const item = document.createElement("li");
      item.dataset.attr = attr.name;
      item.className = "attribute selected"; // selected = blue, unselected = gray
      const domain =
        attr.type === "numerical"
          ? `[${attr.domain[0]}, ${attr.domain[1]}]`
          : `{${attr.domain.join(", ")}}`;
      item.innerHTML = `
        <label><input type="checkbox" checked> <b>${attr.name}</b> <i>${attr.type}</i> ${domain}</label>
      `;
      const checkbox = item.querySelector("input")!;
      checkbox.addEventListener("change", () => {
        item.className = checkbox.checked ? "attribute selected" : "attribute unselected";
        const chosen = this.store.get().selectedAttributes.filter((n) => n !== attr.name);
        if (checkbox.checked) chosen.push(attr.name);
        this.store.update({ selectedAttributes: chosen });
        this.root.querySelector<HTMLButtonElement>(".confirm")!.disabled = chosen.length === 0;
      });
      if (attr.type === "numerical") {
        const slider = document.createElement("input");
        slider.type = "range";
        slider.min = String(attr.domain[0]);
        slider.max = String(attr.domain[1]);
        slider.value = String(attr.domain[1]);
        slider.className = "range-hi";
        slider.addEventListener("change", async () => {
          this.filters[attr.name] = [Number(attr.domain[0]), Number(slider.value)];
          const result = await this.client.setFilter({ intervals: this.filters });
          this.store.update({ rows: result.rows });
          this.root.querySelector(".summary")!.textContent =
            `${result.rows} records after filtering`;
        });
        item.appendChild(slider);
      }
      list.appendChild(item);
    }
    this.root.querySelector<HTMLButtonElement>(".confirm")!.disabled = false;
  }
}
