import { describe, expect, it } from "vitest";

import { deriveFilter, ExplorationState, FilterStep, stepLabel } from "../src/state.js";

describe("deriveFilter", () => {
  it("folds steps into the wire filter", () => {
    const steps: FilterStep[] = [
      { kind: "fulltext", term: "kasse" },
      { kind: "entity", id: 3, label: "Hamburg" },
      { kind: "keyterm", term: "schattenliste" },
      { kind: "time", from: "1930", to: "2006" },
      { kind: "metadata", key: "sender", value: "a@b.cc" },
      { kind: "tag", tag: "lead" },
      { kind: "lang", lang: "de" },
    ];
    expect(deriveFilter(steps)).toEqual({
      fulltext_terms: ["kasse"],
      entity_ids: [3],
      keyterms: ["schattenliste"],
      time_range: ["1930", "2006"],
      metadata: [["sender", "a@b.cc"]],
      tags: ["lead"],
      lang: "de",
    });
  });

  it("empty log derives the empty filter", () => {
    expect(deriveFilter([])).toEqual({});
  });

  it("single-valued facets take the last step", () => {
    const filter = deriveFilter([
      { kind: "lang", lang: "de" },
      { kind: "lang", lang: "en" },
    ]);
    expect(filter.lang).toBe("en");
  });
});

describe("ExplorationState history", () => {
  it("history replay reproduces the active filter", () => {
    const state = new ExplorationState();
    state.addStep({ kind: "fulltext", term: "akte" });
    state.addStep({ kind: "entity", id: 7, label: "Bremen" });
    expect(state.filter).toEqual(deriveFilter([...state.stepLog]));
  });

  it("removing step k re-derives from the remaining steps", () => {
    const state = new ExplorationState();
    state.addStep({ kind: "fulltext", term: "akte" });
    state.addStep({ kind: "entity", id: 7, label: "Bremen" });
    state.addStep({ kind: "tag", tag: "lead" });
    state.removeStep(1);
    expect(state.filter).toEqual({ fulltext_terms: ["akte"], tags: ["lead"] });
  });

  it("add then remove round-trips to the original filter", () => {
    const state = new ExplorationState();
    state.addStep({ kind: "fulltext", term: "akte" });
    const before = JSON.stringify(state.filter);
    state.addStep({ kind: "entity", id: 7, label: "Bremen" });
    state.removeStep(state.stepLog.length - 1);
    expect(JSON.stringify(state.filter)).toBe(before);
  });

  it("duplicate steps are ignored", () => {
    const state = new ExplorationState();
    expect(state.addStep({ kind: "tag", tag: "lead" })).toBe(true);
    expect(state.addStep({ kind: "tag", tag: "lead" })).toBe(false);
    expect(state.stepLog.length).toBe(1);
  });

  it("adding a step resets pagination", () => {
    const state = new ExplorationState();
    state.setPage(4);
    state.addStep({ kind: "fulltext", term: "akte" });
    expect(state.page).toBe(0);
  });

  it("notifies subscribers on every change", () => {
    const state = new ExplorationState();
    let calls = 0;
    const unsubscribe = state.subscribe(() => calls++);
    state.addStep({ kind: "tag", tag: "a" });
    state.removeStep(0);
    state.setView("list");
    unsubscribe();
    state.addStep({ kind: "tag", tag: "b" });
    expect(calls).toBe(3);
  });

  it("labels every step kind", () => {
    const steps: FilterStep[] = [
      { kind: "fulltext", term: "x" },
      { kind: "entity", id: 1, label: "E" },
      { kind: "keyterm", term: "k" },
      { kind: "time", from: "1930", to: "1930" },
      { kind: "metadata", key: "m", value: "v" },
      { kind: "tag", tag: "t" },
      { kind: "lang", lang: "de" },
    ];
    for (const step of steps) {
      expect(stepLabel(step).length).toBeGreaterThan(0);
    }
  });
});
