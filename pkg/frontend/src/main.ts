/**
 * Application shell: wires the exploration state, the API client and
 * the views together. Every view re-derives from (state, API data) on
 * each refresh; in-flight responses that lose a refresh race are
 * dropped (latest wins), so stale renders cannot occur.
 */

import { ApiClient, ApiError, RequestSequencer } from "./api.js";
import { renderBarChart } from "./charts.js";
import { clear, el } from "./dom.js";
import { renderGraph } from "./graphview.js";
import { renderReader } from "./reader.js";
import { renderSearchResults } from "./search.js";
import { ExplorationState, stepLabel } from "./state.js";
import type { Bucket, CollectionMeta, GraphNode } from "./types.js";

const PAGE_SIZE = 10;

class App {
  private readonly api = new ApiClient("");
  private readonly state = new ExplorationState();
  private readonly sequencer = new RequestSequencer();
  private collection = "";
  private meta: CollectionMeta | null = null;
  private entityChartType = "PER";
  private metadataKey = "";

  private banner!: HTMLElement;
  private historyBox!: HTMLElement;
  private chartsBox!: HTMLElement;
  private mainBox!: HTMLElement;
  private controlsBox!: HTMLElement;

  async boot(root: HTMLElement): Promise<void> {
    clear(root);
    this.banner = el("div", { class: "banner hidden" });
    const header = el("header", { class: "app-header" }, [
      el("h1", {}, ["textsleuth"]),
    ]);
    const collectionSelect = el("select", { class: "collection-select" });
    collectionSelect.addEventListener("change", () => {
      this.collection = collectionSelect.value;
      this.meta = null;
      this.state.clearSteps();
    });
    const searchInput = el("input", {
      class: "search-input",
      placeholder: "search fulltext… (enter)",
    });
    searchInput.addEventListener("keydown", (event) => {
      if ((event as KeyboardEvent).key === "Enter" && searchInput.value.trim()) {
        this.state.addStep({ kind: "fulltext", term: searchInput.value.trim() });
        searchInput.value = "";
      }
    });
    const tabs = el("nav", { class: "view-tabs" }, [
      el("button", { class: "tab", click: () => this.state.setView("graph") }, ["network"]),
      el("button", { class: "tab", click: () => this.state.setView("list") }, ["documents"]),
    ]);
    header.append(collectionSelect, searchInput, tabs);

    this.historyBox = el("aside", { class: "history-box" });
    this.chartsBox = el("aside", { class: "charts-box" });
    this.controlsBox = el("div", { class: "graph-controls" });
    this.mainBox = el("main", { class: "main-box" });
    root.append(
      this.banner,
      header,
      el("div", { class: "layout" }, [
        el("div", { class: "sidebar" }, [this.historyBox, this.chartsBox]),
        el("div", { class: "content" }, [this.controlsBox, this.mainBox]),
      ]),
    );

    this.state.subscribe(() => void this.refresh());
    try {
      const { collections } = await this.api.collections();
      if (collections.length === 0) {
        this.showError("no collections available; run an ingest first");
        return;
      }
      for (const id of collections) {
        collectionSelect.append(el("option", { value: id }, [id]));
      }
      this.collection = collections[0];
      await this.refresh();
    } catch (error) {
      this.showError(error);
    }
  }

  private showError(error: unknown): void {
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String((error as Error)?.message ?? error);
    clear(this.banner);
    this.banner.classList.remove("hidden");
    this.banner.append(
      el("span", {}, [message]),
      el("button", {
        class: "small-btn",
        click: () => this.banner.classList.add("hidden"),
      }, ["dismiss"]),
    );
  }

  private async refresh(): Promise<void> {
    if (!this.collection) return;
    const filter = this.state.filter;
    const outcome = await this.sequencer.run(async () => {
      const meta = this.meta ?? (await this.api.meta(this.collection));
      const search = await this.api.search(this.collection, filter, this.state.page, PAGE_SIZE);
      const graph =
        this.state.view === "graph"
          ? await this.api.graph(
              this.collection,
              this.state.graphKind,
              this.state.graphTopN,
              filter,
            )
          : null;
      const detail =
        this.state.view === "reader" && this.state.selectedUnit
          ? await this.api.unit(this.collection, this.state.selectedUnit)
          : null;
      if (!this.metadataKey && meta.metadata_keys.length) {
        this.metadataKey = meta.metadata_keys.includes("file_name")
          ? "file_name"
          : meta.metadata_keys[0];
      }
      if (!meta.entity_types.includes(this.entityChartType) && meta.entity_types.length) {
        this.entityChartType = meta.entity_types[0];
      }
      const charts = {
        time: (await this.api.aggregate(this.collection, "time", filter)).buckets,
        entities: meta.entity_types.length
          ? (
              await this.api.aggregate(
                this.collection,
                `entity_by_type:${this.entityChartType}`,
                filter,
              )
            ).buckets
          : [],
        metadata: this.metadataKey
          ? (await this.api.aggregate(this.collection, `metadata:${this.metadataKey}`, filter))
              .buckets
          : [],
        tags: (await this.api.aggregate(this.collection, "tag", filter)).buckets,
        langs: (await this.api.aggregate(this.collection, "lang", filter)).buckets,
      };
      return { meta, search, graph, detail, charts };
    });
    if (outcome.stale) return;
    if (outcome.error) {
      this.showError(outcome.error);
      return;
    }
    const { meta, search, graph, detail, charts } = outcome.value!;
    this.meta = meta;
    this.renderHistory();
    this.renderCharts(charts, meta);
    this.renderControls();
    clear(this.mainBox);
    if (this.state.view === "reader" && detail) {
      renderReader(this.mainBox, detail, {
        entityNames: charts.entities.map((b) => b.label),
        onTag: (tag) => this.mutate(() => this.api.tagUnit(this.collection, detail.unit_id, tag)),
        onAnnotate: (span) =>
          this.mutate(() => this.api.annotate(this.collection, detail.unit_id, span)),
        onMerge: (sourceId, targetCanonical) => {
          const target = charts.entities.find((b) => b.label === targetCanonical);
          if (target?.id !== undefined && target.id !== sourceId) {
            this.mutate(() => this.api.mergeEntities(this.collection, sourceId, target.id!));
          } else {
            this.showError(`no entity named “${targetCanonical}” in the current charts`);
          }
        },
        onBlacklist: (entityId) =>
          this.mutate(() => this.api.blacklistEntity(this.collection, entityId)),
        onEntityFilter: (entityId, label) =>
          this.state.addStep({ kind: "entity", id: entityId, label }),
      });
    } else if (this.state.view === "graph" && graph) {
      renderGraph(this.mainBox, graph, {
        onNodeClick: (node) => this.addNodeFilter(node),
      });
    } else {
      renderSearchResults(this.mainBox, search, {
        onOpenUnit: (unitId) => this.state.openReader(unitId),
        onPage: (page) => this.state.setPage(page),
      });
    }
  }

  private addNodeFilter(node: GraphNode): void {
    if (node.type === "KEYTERM") {
      this.state.addStep({ kind: "keyterm", term: String(node.id) });
    } else {
      this.state.addStep({ kind: "entity", id: Number(node.id), label: node.label });
    }
  }

  private async mutate(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      await this.refresh();
    } catch (error) {
      this.showError(error);
    }
  }

  private renderHistory(): void {
    clear(this.historyBox);
    this.historyBox.append(el("h3", { class: "chart-title" }, ["filter history"]));
    const steps = this.state.stepLog;
    if (steps.length === 0) {
      this.historyBox.append(el("p", { class: "empty-state" }, ["no filters applied"]));
      return;
    }
    steps.forEach((step, index) => {
      this.historyBox.append(
        el("span", { class: "history-chip" }, [
          stepLabel(step),
          el("button", {
            class: "chip-remove",
            title: "remove this filter step",
            click: () => this.state.removeStep(index),
          }, ["×"]),
        ]),
      );
    });
    this.historyBox.append(
      el("button", { class: "small-btn", click: () => this.state.clearSteps() }, ["clear all"]),
    );
  }

  private renderCharts(
    charts: {
      time: Bucket[];
      entities: Bucket[];
      metadata: Bucket[];
      tags: Bucket[];
      langs: Bucket[];
    },
    meta: CollectionMeta,
  ): void {
    clear(this.chartsBox);
    const timeBox = el("section", {});
    renderBarChart(timeBox, "dates", charts.time, {
      onBucketClick: (bucket) =>
        this.state.addStep({ kind: "time", from: bucket.label, to: bucket.label }),
    });

    const entityBox = el("section", {});
    const typeSelect = el("select", { class: "chart-select" },
      meta.entity_types.map((t) => el("option", { value: t }, [t])));
    typeSelect.value = this.entityChartType;
    typeSelect.addEventListener("change", () => {
      this.entityChartType = typeSelect.value;
      void this.refresh();
    });
    renderBarChart(entityBox, "entities", charts.entities, {
      onBucketClick: (bucket) => {
        if (bucket.id !== undefined) {
          this.state.addStep({ kind: "entity", id: bucket.id, label: bucket.label });
        }
      },
    });
    entityBox.prepend(typeSelect);

    const metaBox = el("section", {});
    const keySelect = el("select", { class: "chart-select" },
      meta.metadata_keys.map((k) => el("option", { value: k }, [k])));
    keySelect.value = this.metadataKey;
    keySelect.addEventListener("change", () => {
      this.metadataKey = keySelect.value;
      void this.refresh();
    });
    renderBarChart(metaBox, "metadata", charts.metadata, {
      onBucketClick: (bucket) =>
        this.state.addStep({ kind: "metadata", key: this.metadataKey, value: bucket.label }),
    });
    metaBox.prepend(keySelect);

    const tagBox = el("section", {});
    renderBarChart(tagBox, "tags", charts.tags, {
      onBucketClick: (bucket) => this.state.addStep({ kind: "tag", tag: bucket.label }),
    });

    const langBox = el("section", {});
    renderBarChart(langBox, "languages", charts.langs, {
      onBucketClick: (bucket) => this.state.addStep({ kind: "lang", lang: bucket.label }),
    });

    this.chartsBox.append(timeBox, entityBox, metaBox, tagBox, langBox);
  }

  private renderControls(): void {
    clear(this.controlsBox);
    if (this.state.view !== "graph") return;
    const kindToggle = el("div", { class: "kind-toggle" }, [
      el("button", {
        class: `small-btn ${this.state.graphKind === "entity" ? "active" : ""}`,
        click: () => this.state.setGraphKind("entity"),
      }, ["entity network"]),
      el("button", {
        class: `small-btn ${this.state.graphKind === "keyterm" ? "active" : ""}`,
        click: () => this.state.setGraphKind("keyterm"),
      }, ["keyword network"]),
    ]);
    const slider = el("input", {
      type: "range",
      min: "10",
      max: "200",
      value: String(this.state.graphTopN),
      class: "topn-slider",
    });
    slider.addEventListener("change", () => this.state.setGraphTopN(Number(slider.value)));
    this.controlsBox.append(
      kindToggle,
      el("label", { class: "topn-label" }, [`nodes: `, slider]),
    );
  }
}

export function start(): void {
  const root = document.getElementById("app");
  if (root) void new App().boot(root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}
