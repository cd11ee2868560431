/**
 * Document list with keyword-in-context snippets and pagination.
 * Match offsets from the API are absolute unit-text offsets; they are
 * mapped into each snippet window to place the highlights.
 */

import { clear, el } from "./dom.js";
import type { SearchHit, SearchResult, Snippet } from "./types.js";

export interface SearchViewHandlers {
  onOpenUnit: (unitId: string) => void;
  onPage: (page: number) => void;
}

function renderSnippet(snippet: Snippet): HTMLElement {
  const parts: Array<Node | string> = [];
  let cursor = snippet.start;
  for (const [s, e] of snippet.matches) {
    if (s > cursor) {
      parts.push(snippet.text.slice(cursor - snippet.start, s - snippet.start));
    }
    parts.push(el("mark", {}, [snippet.text.slice(s - snippet.start, e - snippet.start)]));
    cursor = e;
  }
  parts.push(snippet.text.slice(cursor - snippet.start));
  return el("p", { class: "kwic" }, ["… ", ...parts, " …"]);
}

function renderHit(hit: SearchHit, handlers: SearchViewHandlers): HTMLElement {
  const fileName = String(hit.metadata["file_name"] ?? hit.doc_id.slice(0, 12));
  const subject = hit.metadata["subject"];
  const headline = subject ? `${fileName} — ${String(subject)}` : fileName;
  const header = el("button", {
    class: "hit-title",
    click: () => handlers.onOpenUnit(hit.unit_id),
  }, [`${headline} · unit ${hit.seq}`]);
  const badges = el("span", { class: "hit-badges" }, [
    ...(hit.lang ? [el("span", { class: "badge" }, [hit.lang])] : []),
    ...hit.tags.map((t) => el("span", { class: "badge badge-tag" }, [t])),
  ]);
  const body = el("div", { class: "hit-snippets" }, hit.snippets.map(renderSnippet));
  return el("article", { class: "hit" }, [
    el("header", {}, [header, badges]),
    body,
  ]);
}

export function renderSearchResults(
  container: HTMLElement,
  result: SearchResult,
  handlers: SearchViewHandlers,
): void {
  clear(container);
  container.append(
    el("p", { class: "result-total" }, [
      `${result.total} unit${result.total === 1 ? "" : "s"} in selection`,
    ]),
  );
  for (const hit of result.hits) {
    container.append(renderHit(hit, handlers));
  }
  const lastPage = Math.max(0, Math.ceil(result.total / result.page_size) - 1);
  if (lastPage > 0) {
    const prev = el("button", {
      class: "pager-btn",
      click: () => handlers.onPage(result.page - 1),
    }, ["previous"]);
    prev.disabled = result.page === 0;
    const next = el("button", {
      class: "pager-btn",
      click: () => handlers.onPage(result.page + 1),
    }, ["next"]);
    next.disabled = result.page >= lastPage;
    container.append(
      el("nav", { class: "pager" }, [
        prev,
        el("span", { class: "pager-info" }, [`page ${result.page + 1} / ${lastPage + 1}`]),
        next,
      ]),
    );
  }
}
