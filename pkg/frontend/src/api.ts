/** Typed client for the privcharts HTTP API. All server interaction goes
 * through this module; the views never touch fetch directly. */

export interface AttributeInfo {
  name: string;
  type: "categorical" | "numerical";
  domain: (string | number)[];
}

export interface ChartSpecBody {
  chart_type: "scatter" | "line" | "bar";
  x: string;
  y?: string;
  color?: string;
  x_step?: number;
  aggregate?: "count" | "mean" | "sum";
}

export interface ScatterPoint {
  x: number;
  y: number;
  row: number;
  color?: string;
}

export interface GroupPoint {
  x: number | string;
  y: number;
  rows: number;
}

export interface ChartPayload {
  v: number;
  spec: string;
  mark: "point" | "line" | "bar";
  encoding: Record<string, string>;
  data: (ScatterPoint | GroupPoint)[];
}

export interface SelectionBody {
  kind: "region" | "interval" | "bars";
  rect?: number[];
  polygon?: number[][];
  interval?: number[];
  bars?: (string | number)[];
}

export interface PatternPayload {
  id: string;
  pattern_type: "cluster" | "correlation" | "order";
  chart: string;
  selection: SelectionBody;
  weight: number;
  records: number[];
}

export interface SchemeRow {
  id: string;
  status: string;
  epsilon?: number;
  weights?: Record<string, number>;
  private?: boolean;
  summary?: { mean_attribute_fidelity?: number; mean_pattern_delta?: number };
  patterns?: {
    pattern: string;
    metrics: { metric: string; before?: number; after?: number; delta?: number }[];
  }[];
}

export interface RelationshipPayload {
  nodes: { id: string; pattern_type: string; records: number; weight: number; x: number; y: number }[];
  edges: { source: string; target: string; sign: "positive" | "negative"; magnitude: number }[];
}

export interface FlowPayload {
  columns: string[];
  bins: { bin: number; label: string; count: number }[][];
  links: { source: number; target: number; count: number; sub?: number }[][];
  highlight: string | null;
}

export interface NetworkPayload {
  network: { order: string[]; pairs: { child: string; parents: string[] }[]; k: number };
  layout: {
    nodes: { attribute: string; layer: number; slot: number; y: number }[];
    edges: { parent: string; child: string }[];
  };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parse(resp: Response): Promise<any> {
  const text = await resp.text();
  const body = text ? JSON.parse(text) : {};
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? resp.statusText);
  }
  return body;
}

export class Client {
  constructor(private base: string, public sessionId: string | null = null) {}

  private url(path: string): string {
    return `${this.base}/sessions/${this.sessionId}${path}`;
  }

  async createSession(): Promise<string> {
    const body = await parse(await fetch(`${this.base}/sessions`, { method: "POST" }));
    this.sessionId = body.id;
    return body.id;
  }

  async uploadCsv(csv: string): Promise<{ rows: number; attributes: AttributeInfo[] }> {
    return parse(
      await fetch(this.url("/dataset"), {
        method: "POST",
        headers: { "Content-Type": "text/csv" },
        body: csv,
      }),
    );
  }

  async setFilter(filter: {
    values?: Record<string, string[]>;
    intervals?: Record<string, number[]>;
  }): Promise<{ rows: number }> {
    return parse(
      await fetch(this.url("/filter"), {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(filter),
      }),
    );
  }

  async createChart(spec: ChartSpecBody): Promise<string> {
    const body = await parse(
      await fetch(this.url("/charts"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(spec),
      }),
    );
    return body.id;
  }

  async chartData(chartId: string): Promise<ChartPayload> {
    return parse(await fetch(this.url(`/charts/${chartId}/data`)));
  }

  async addPattern(chartId: string, selection: SelectionBody, weight: number): Promise<PatternPayload> {
    return parse(
      await fetch(this.url("/patterns"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ chart: chartId, selection, weight }),
      }),
    );
  }

  async setWeight(patternId: string, weight: number): Promise<PatternPayload> {
    return parse(
      await fetch(this.url(`/patterns/${patternId}`), {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ weight }),
      }),
    );
  }

  async deletePattern(patternId: string): Promise<void> {
    const resp = await fetch(this.url(`/patterns/${patternId}`), { method: "DELETE" });
    if (!resp.ok) throw new ApiError(resp.status, "delete failed");
  }

  async listPatterns(): Promise<PatternPayload[]> {
    const body = await parse(await fetch(this.url("/patterns")));
    return body.patterns;
  }

  async generateScheme(params: {
    epsilon: number;
    structure_fraction?: number;
    k?: number;
    n_out?: number;
    seed?: number;
    baseline?: boolean;
  }): Promise<string> {
    const body = await parse(
      await fetch(this.url("/schemes"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(params),
      }),
    );
    return body.id;
  }

  async schemeStatus(schemeId: string): Promise<string> {
    const body = await parse(await fetch(this.url(`/schemes/${schemeId}`)));
    return body.status;
  }

  /** Poll until the scheme completes (or fails). */
  async waitForScheme(schemeId: string, intervalMs = 500, timeoutMs = 120000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    let wait = intervalMs;
    while (Date.now() < deadline) {
      const status = await this.schemeStatus(schemeId);
      if (status === "complete") return;
      if (status.startsWith("failed")) throw new ApiError(500, status);
      await new Promise((resolve) => setTimeout(resolve, wait));
      wait = Math.min(wait * 1.5, 3000); // back off; runs can take minutes
    }
    throw new ApiError(504, `scheme ${schemeId} did not complete in time`);
  }

  async listSchemes(): Promise<SchemeRow[]> {
    const body = await parse(await fetch(this.url("/schemes")));
    return body.schemes;
  }

  async relationship(): Promise<RelationshipPayload> {
    return parse(await fetch(this.url("/analytics/relationship")));
  }

  async flow(highlight?: string): Promise<FlowPayload> {
    const query = highlight ? `?highlight=${encodeURIComponent(highlight)}` : "";
    return parse(await fetch(this.url(`/analytics/flow${query}`)));
  }

  async network(schemeId: string): Promise<NetworkPayload> {
    return parse(await fetch(this.url(`/analytics/network?scheme=${encodeURIComponent(schemeId)}`)));
  }

  async distributions(attr: string, schemeId: string): Promise<any> {
    return parse(
      await fetch(
        this.url(
          `/analytics/distributions?attr=${encodeURIComponent(attr)}&scheme=${encodeURIComponent(schemeId)}`,
        ),
      ),
    );
  }

  /** Chart payload recomputed on a scheme's synthetic data. */
  async syntheticChart(schemeId: string, chartId: string): Promise<ChartPayload> {
    return parse(await fetch(this.url(`/schemes/${schemeId}/charts/${chartId}/data`)));
  }
}
