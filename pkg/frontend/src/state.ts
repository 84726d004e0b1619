/** Single source of truth for cross-view coordination: the selected pattern
 * id drives the pattern list, the relationship node and the flow sub-flow
 * highlight simultaneously. */

import type { AttributeInfo, PatternPayload, SchemeRow } from "./api.js";

export type ModelMode = "flow" | "network";

export interface ViewState {
  sessionId: string | null;
  attributes: AttributeInfo[];
  selectedAttributes: string[];
  rows: number;
  chartId: string | null;
  patterns: PatternPayload[];
  highlightedPattern: string | null;
  schemes: SchemeRow[];
  comparedSchemes: string[];
  baselineScheme: string | null;
  showBaseline: boolean;
  modelMode: ModelMode;
  generating: boolean;
}

export type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = {
    sessionId: null,
    attributes: [],
    selectedAttributes: [],
    rows: 0,
    chartId: null,
    patterns: [],
    highlightedPattern: null,
    schemes: [],
    comparedSchemes: [],
    baselineScheme: null,
    showBaseline: false,
    modelMode: "flow",
    generating: false,
  };
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  /** Toggle the shared pattern highlight (null clears it). */
  highlight(patternId: string | null): void {
    this.update({
      highlightedPattern: this.state.highlightedPattern === patternId ? null : patternId,
    });
  }
}
