/** Root wiring: one session, four coordinated views. */

import { Client } from "./api.js";
import { Store } from "./state.js";
import { DataView } from "./views/data.js";
import { ModelView } from "./views/model.js";
import { PatternView } from "./views/pattern.js";
import { SolutionView } from "./views/solution.js";

export interface App {
  client: Client;
  store: Store;
  data: DataView;
  pattern: PatternView;
  model: ModelView;
  solution: SolutionView;
}

export async function createApp(root: HTMLElement, baseUrl: string): Promise<App> {
  const client = new Client(baseUrl);
  await client.createSession();
  const store = new Store();
  store.update({ sessionId: client.sessionId });

  const data = new DataView(client, store);
  const pattern = new PatternView(client, store);
  const model = new ModelView(client, store);
  const solution = new SolutionView(client, store);
  for (const view of [data, pattern, model, solution]) root.appendChild(view.root);

  // view coordination: highlighting a pattern refreshes the flow sub-flows
  let lastHighlight: string | null = null;
  store.subscribe((state) => {
    if (state.highlightedPattern !== lastHighlight) {
      lastHighlight = state.highlightedPattern;
      if (state.patterns.length) void model.refreshFlow();
    }
  });

  return { client, store, data, pattern, model, solution };
}

declare global {
  interface Window {
    privcharts?: Promise<App>;
  }
}

if (typeof window !== "undefined" && document.getElementById("app")) {
  window.privcharts = createApp(document.getElementById("app")!, "");
}
