/**
 * Exploration state: an ordered log of filter steps plus the current
 * view. The active filter is always *derived* from the step log, so
 * removing any step re-derives the filter from the remaining steps and
 * replaying the log always reproduces the same filter.
 */

import type { FilterQuery } from "./types.js";

export type FilterStep =
  | { kind: "fulltext"; term: string }
  | { kind: "entity"; id: number; label: string }
  | { kind: "keyterm"; term: string }
  | { kind: "time"; from: string; to: string }
  | { kind: "metadata"; key: string; value: string }
  | { kind: "tag"; tag: string }
  | { kind: "lang"; lang: string };

export type ViewName = "graph" | "list" | "reader";

export function stepLabel(step: FilterStep): string {
  switch (step.kind) {
    case "fulltext":
      return `text: ${step.term}`;
    case "entity":
      return `entity: ${step.label}`;
    case "keyterm":
      return `keyword: ${step.term}`;
    case "time":
      return step.from === step.to ? `date: ${step.from}` : `date: ${step.from}..${step.to}`;
    case "metadata":
      return `${step.key}: ${step.value}`;
    case "tag":
      return `tag: ${step.tag}`;
    case "lang":
      return `lang: ${step.lang}`;
  }
}

function sameStep(a: FilterStep, b: FilterStep): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/** Pure fold of a step log into the API filter object. */
export function deriveFilter(steps: readonly FilterStep[]): FilterQuery {
  const filter: FilterQuery = {};
  for (const step of steps) {
    switch (step.kind) {
      case "fulltext":
        (filter.fulltext_terms ??= []).push(step.term);
        break;
      case "entity":
        (filter.entity_ids ??= []).push(step.id);
        break;
      case "keyterm":
        (filter.keyterms ??= []).push(step.term);
        break;
      case "time":
        filter.time_range = [step.from, step.to]; // single-valued: last wins
        break;
      case "metadata":
        (filter.metadata ??= []).push([step.key, step.value]);
        break;
      case "tag":
        (filter.tags ??= []).push(step.tag);
        break;
      case "lang":
        filter.lang = step.lang; // single-valued: last wins
        break;
    }
  }
  return filter;
}

export class ExplorationState {
  private steps: FilterStep[] = [];
  private listeners: Array<() => void> = [];
  view: ViewName = "graph";
  graphKind: "entity" | "keyterm" = "entity";
  graphTopN = 50;
  selectedUnit: string | null = null;
  page = 0;

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get stepLog(): readonly FilterStep[] {
    return this.steps;
  }

  get filter(): FilterQuery {
    return deriveFilter(this.steps);
  }

  /** Append a step (ignored when an identical step is already present). */
  addStep(step: FilterStep): boolean {
    if (this.steps.some((s) => sameStep(s, step))) return false;
    this.steps.push(step);
    this.page = 0;
    this.notify();
    return true;
  }

  removeStep(index: number): void {
    if (index < 0 || index >= this.steps.length) return;
    this.steps.splice(index, 1);
    this.page = 0;
    this.notify();
  }

  clearSteps(): void {
    this.steps = [];
    this.page = 0;
    this.notify();
  }

  setView(view: ViewName): void {
    if (this.view !== view) {
      this.view = view;
      this.notify();
    }
  }

  openReader(unitId: string): void {
    this.selectedUnit = unitId;
    this.view = "reader";
    this.notify();
  }

  setGraphKind(kind: "entity" | "keyterm"): void {
    if (this.graphKind !== kind) {
      this.graphKind = kind;
      this.notify();
    }
  }

  setGraphTopN(topN: number): void {
    this.graphTopN = Math.max(10, Math.min(200, topN));
    this.notify();
  }

  setPage(page: number): void {
    this.page = Math.max(0, page);
    this.notify();
  }
}
