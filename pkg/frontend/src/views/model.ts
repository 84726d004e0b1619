/** Weight overview, pattern-relationship projection, and the switchable
 * flow/network panel. Clicking a relationship node highlights the same
 * pattern everywhere (shared store state). */

import type { Client } from "../api.js";
import { PATTERN_COLORS, el } from "../charts.js";
import type { Store } from "../state.js";

const W = 420;
const H = 260;

export class ModelView {
  readonly root: HTMLElement;

  constructor(private client: Client, private store: Store) {
    this.root = document.createElement("section");
    this.root.className = "model-view";
    this.root.innerHTML = `
      <h2>Model</h2>
      <div class="weight-overview"></div>
      <div class="relationship-host"></div>
      <button class="mode-toggle">Show network</button>
      <div class="flow-host"></div>
      <div class="network-host" hidden></div>
      <div class="banner" hidden></div>
    `;
    this.root.querySelector(".mode-toggle")!.addEventListener("click", () => {
      const mode = this.store.get().modelMode === "flow" ? "network" : "flow";
      this.store.update({ modelMode: mode });
      this.root.querySelector<HTMLElement>(".flow-host")!.hidden = mode !== "flow";
      this.root.querySelector<HTMLElement>(".network-host")!.hidden = mode !== "network";
      this.root.querySelector(".mode-toggle")!.textContent =
        mode === "flow" ? "Show network" : "Show flow";
    });
    store.subscribe(() => this.renderWeights());
  }

  /** Stacked bar of pattern weights, segment width proportional to weight. */
  private renderWeights(): void {
    const { patterns } = this.store.get();
    const host = this.root.querySelector(".weight-overview")!;
    host.innerHTML = "";
    const total = patterns.reduce((sum, p) => sum + p.weight, 0);
    if (!total) return;
    const svg = el("svg", { viewBox: `0 0 ${W} 24`, width: W, height: 24, class: "weight-bar" });
    let x = 0;
    for (const p of patterns) {
      const width = (p.weight / total) * W;
      const rect = el("rect", {
        x, y: 2, width, height: 20,
        fill: PATTERN_COLORS[p.pattern_type],
      });
      rect.dataset.pattern = p.id;
      rect.dataset.weight = String(p.weight);
      const title = el("title");
      title.textContent = `${p.id}: ${p.records.length} records, weight ${p.weight}`;
      rect.appendChild(title);
      svg.appendChild(rect);
      x += width;
    }
    host.appendChild(svg);
  }

  async refreshRelationship(): Promise<void> {
    const payload = await this.client.relationship();
    const host = this.root.querySelector(".relationship-host")!;
    host.innerHTML = "";
    const svg = el("svg", { viewBox: `0 0 ${W} ${H}`, width: W, height: H, class: "relationship" });
    const xs = payload.nodes.map((n) => n.x);
    const ys = payload.nodes.map((n) => n.y);
    const pad = 40;
    const spanX = Math.max(...xs) - Math.min(...xs) || 1;
    const spanY = Math.max(...ys) - Math.min(...ys) || 1;
    const px = (x: number) => pad + ((x - Math.min(...xs)) / spanX) * (W - 2 * pad);
    const py = (y: number) => pad + ((y - Math.min(...ys)) / spanY) * (H - 2 * pad);
    const at: Record<string, [number, number]> = {};
    for (const node of payload.nodes) at[node.id] = [px(node.x), py(node.y)];
    const maxMag = Math.max(...payload.edges.map((e) => e.magnitude), 1);
    for (const edge of payload.edges) {
      const [x1, y1] = at[edge.source];
      const [x2, y2] = at[edge.target];
      svg.appendChild(
        el("line", {
          x1, y1, x2, y2,
          stroke: edge.sign === "positive" ? "#2e7d32" : "#c62828",
          "stroke-width": 1 + 4 * (edge.magnitude / maxMag),
          class: `influence ${edge.sign}`,
        }),
      );
    }
    for (const node of payload.nodes) {
      const [cx, cy] = at[node.id];
      const circle = el("circle", {
        cx, cy,
        r: 6 + Math.sqrt(node.records) / 3,
        fill: PATTERN_COLORS[node.pattern_type] ?? "#888",
        class: "pattern-node",
      });
      circle.dataset.pattern = node.id;
      circle.addEventListener("click", () => this.store.highlight(node.id));
      svg.appendChild(circle);
    }
    host.appendChild(svg);
  }

  async refreshFlow(): Promise<void> {
    const highlight = this.store.get().highlightedPattern ?? undefined;
    const payload = await this.client.flow(highlight);
    const host = this.root.querySelector(".flow-host")!;
    host.innerHTML = "";
    const svg = el("svg", { viewBox: `0 0 ${W} ${H}`, width: W, height: H, class: "flow" });
    const colWidth = W / payload.columns.length;
    const total = payload.bins[0].reduce((s, b) => s + b.count, 0) || 1;
    const binY: Record<string, [number, number]> = {};
    payload.columns.forEach((col, ci) => {
      let y = 10;
      for (const bin of payload.bins[ci]) {
        const height = ((H - 20) * bin.count) / total;
        const rect = el("rect", {
          x: ci * colWidth + colWidth * 0.4, y,
          width: 12, height: Math.max(height, 1),
          fill: "#90a4ae", class: "flow-bin",
        });
        rect.dataset.column = col;
        rect.dataset.bin = String(bin.bin);
        const title = el("title");
        title.textContent = `${col} ${bin.label}: ${bin.count}`;
        rect.appendChild(title);
        svg.appendChild(rect);
        binY[`${ci}:${bin.bin}`] = [y, height];
        y += height + 2;
      }
    });
    payload.links.forEach((links, ci) => {
      for (const link of links) {
        const [sy, sh] = binY[`${ci}:${link.source}`];
        const [ty, th] = binY[`${ci + 1}:${link.target}`];
        const x1 = ci * colWidth + colWidth * 0.4 + 12;
        const x2 = (ci + 1) * colWidth + colWidth * 0.4;
        const line = el("line", {
          x1, y1: sy + sh / 2, x2, y2: ty + th / 2,
          stroke: "#ccc",
          "stroke-width": Math.max((10 * link.count) / total, 0.4),
          class: "flow-link",
        });
        svg.appendChild(line);
        if (link.sub) {
          svg.appendChild(
            el("line", {
              x1, y1: sy + sh / 2, x2, y2: ty + th / 2,
              stroke: "#ff8f00",
              "stroke-width": Math.max((10 * link.sub) / total, 0.6),
              class: "flow-sublink",
            }),
          );
        }
      }
    });
    host.appendChild(svg);
  }

  async refreshNetwork(schemeId: string): Promise<void> {
    const payload = await this.client.network(schemeId);
    const host = this.root.querySelector(".network-host")!;
    host.innerHTML = "";
    const svg = el("svg", { viewBox: `0 0 ${W} ${H}`, width: W, height: H, class: "network" });
    const layers = Math.max(...payload.layout.nodes.map((n) => n.layer)) + 1;
    const pos: Record<string, [number, number]> = {};
    for (const node of payload.layout.nodes) {
      const x = 40 + (node.layer / Math.max(layers - 1, 1)) * (W - 80);
      const y = 20 + node.y * (H - 40);
      pos[node.attribute] = [x, y];
    }
    for (const edge of payload.layout.edges) {
      const [x1, y1] = pos[edge.parent];
      const [x2, y2] = pos[edge.child];
      svg.appendChild(
        el("line", { x1, y1, x2, y2, stroke: "#607d8b", class: "net-edge" }),
      );
    }
    for (const node of payload.layout.nodes) {
      const [cx, cy] = pos[node.attribute];
      const g = el("g", { class: "net-node" });
      g.appendChild(el("circle", { cx, cy, r: 9, fill: "#eceff1", stroke: "#455a64" }));
      const label = el("text", { x: cx, y: cy - 12, "text-anchor": "middle", "font-size": 9 });
      label.textContent = node.attribute;
      g.appendChild(label);
      g.addEventListener("mouseenter", () => {
        void this.showDistribution(node.attribute, schemeId);
      });
      svg.appendChild(g);
    }
    host.appendChild(svg);
  }

  /** Hover overlay: original vs synthetic distribution for one attribute. */
  private async showDistribution(attr: string, schemeId: string): Promise<void> {
    const dist = await this.client.distributions(attr, schemeId);
    const host = this.root.querySelector(".network-host")!;
    host.querySelector(".dist-overlay")?.remove();
    const box = document.createElement("div");
    box.className = "dist-overlay";
    const before = dist.before as number[];
    const after = dist.after as number[];
    const svg = el("svg", { viewBox: "0 0 200 60", width: 200, height: 60 });
    const peak = Math.max(...before, ...after, 1e-12);
    const poly = (values: number[], stroke: string, cls: string) =>
      el("polyline", {
        points: values
          .map((v, i) => `${(i / (values.length - 1)) * 200},${58 - (v / peak) * 55}`)
          .join(" "),
        fill: "none",
        stroke,
        class: cls,
      });
    svg.appendChild(poly(before, "#9e9e9e", "dist-before"));
    svg.appendChild(poly(after, "#1565c0", "dist-after"));
    box.appendChild(svg);
    host.appendChild(box);
  }
}
