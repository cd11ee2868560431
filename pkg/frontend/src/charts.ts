/**
 * Frequency bar charts for facets (dates, entities, metadata, tags).
 * Every bar is clickable and adds the corresponding filter step.
 */

import { clear, el } from "./dom.js";
import type { Bucket } from "./types.js";

export interface ChartHandlers {
  onBucketClick: (bucket: Bucket) => void;
}

export function renderBarChart(
  container: HTMLElement,
  title: string,
  buckets: Bucket[],
  handlers: ChartHandlers,
  limit = 12,
): void {
  clear(container);
  container.append(el("h3", { class: "chart-title" }, [title]));
  if (buckets.length === 0) {
    container.append(el("p", { class: "empty-state" }, ["no data"]));
    return;
  }
  const shown = buckets.slice(0, limit);
  const max = Math.max(...shown.map((b) => b.count), 1);
  const list = el("div", { class: "chart" });
  for (const bucket of shown) {
    const bar = el("div", { class: "chart-bar-fill" });
    bar.style.width = `${Math.max(2, Math.round((100 * bucket.count) / max))}%`;
    const row = el(
      "button",
      {
        class: "chart-bar",
        title: `filter by ${bucket.label}`,
        click: () => handlers.onBucketClick(bucket),
      },
      [
        el("span", { class: "chart-label" }, [bucket.label]),
        el("span", { class: "chart-track" }, [bar]),
        el("span", { class: "chart-count" }, [String(bucket.count)]),
      ],
    );
    list.append(row);
  }
  container.append(list);
}
