/**
 * Document reader: full unit text with every annotation highlighted at
 * its exact offsets (overlapping families stack), a tag editor, manual
 * annotation of selected text, and merge/blacklist actions on entity
 * highlights. Span conflicts are surfaced in the annotation form, not
 * silently dropped.
 */

import { typeColor } from "./colors.js";
import { clear, el } from "./dom.js";
import type { AnnotationRecord, UnitDetail } from "./types.js";

export interface ReaderHandlers {
  onTag: (tag: string) => void;
  onAnnotate: (span: { start: number; end: number; type: string; label?: string }) => void;
  onMerge: (sourceId: number, targetCanonical: string) => void;
  onBlacklist: (entityId: number) => void;
  onEntityFilter: (entityId: number, label: string) => void;
  entityNames: string[]; // canonical names for merge autocomplete
}

const MANUAL_TYPES = ["PER", "ORG", "LOC", "custom"];

function segments(detail: UnitDetail): Array<{ start: number; end: number; anns: AnnotationRecord[] }> {
  const bounds = new Set<number>([0, detail.text.length]);
  for (const ann of detail.annotations) {
    bounds.add(ann.start);
    bounds.add(ann.end);
  }
  const points = [...bounds].sort((a, b) => a - b);
  const out = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [start, end] = [points[i], points[i + 1]];
    const anns = detail.annotations.filter((a) => a.start <= start && end <= a.end);
    out.push({ start, end, anns });
  }
  return out;
}

function annotationTitle(anns: AnnotationRecord[]): string {
  return anns.map((a) => `${a.a_type} (${a.provenance}): ${a.norm}`).join("\n");
}

export function renderReader(
  container: HTMLElement,
  detail: UnitDetail,
  handlers: ReaderHandlers,
): void {
  clear(container);

  const fileName = String(detail.metadata["file_name"] ?? detail.doc_id.slice(0, 12));
  container.append(
    el("header", { class: "reader-header" }, [
      el("h2", {}, [`${fileName} · unit ${detail.seq}`]),
      el("p", { class: "reader-meta" }, [
        detail.lang ? `language ${detail.lang}` : "",
        detail.keyterms.length ? ` · keywords: ${detail.keyterms.join(", ")}` : "",
      ]),
    ]),
  );

  // tag editor
  const tagList = el("div", { class: "tag-list" },
    detail.tags.map((t) => el("span", { class: "badge badge-tag" }, [t])));
  const tagInput = el("input", { class: "tag-input", placeholder: "add tag…" });
  const tagButton = el("button", {
    class: "small-btn",
    click: () => {
      const tag = tagInput.value.trim();
      if (tag) handlers.onTag(tag);
    },
  }, ["tag"]);
  container.append(el("div", { class: "tag-editor" }, [tagList, tagInput, tagButton]));

  // text with highlights
  const textBox = el("div", { class: "reader-text" });
  for (const segment of segments(detail)) {
    const content = detail.text.slice(segment.start, segment.end);
    if (segment.anns.length === 0) {
      const plain = el("span", { class: "seg" }, [content]);
      plain.dataset.start = String(segment.start);
      textBox.append(plain);
      continue;
    }
    const primary = segment.anns[0];
    const span = el("span", {
      class: "seg hl",
      title: annotationTitle(segment.anns),
    }, [content]);
    span.dataset.start = String(segment.start);
    span.style.backgroundColor = typeColor(primary.a_type) + "40";
    span.style.borderBottom = `2px solid ${typeColor(primary.a_type)}`;
    const entityAnn = segment.anns.find((a) => a.entity_id !== undefined);
    if (entityAnn?.entity_id !== undefined) {
      span.classList.add("hl-entity");
      span.addEventListener("click", (event) => {
        event.stopPropagation();
        openEntityMenu(container, span, entityAnn, handlers);
      });
    }
    textBox.append(span);
  }
  container.append(textBox);

  // manual annotation from text selection
  const form = el("div", { class: "annotate-form hidden" });
  container.append(form);
  textBox.addEventListener("mouseup", () => {
    const selection = window.getSelection();
    if (!selection || selection.isCollapsed) {
      form.classList.add("hidden");
      return;
    }
    const span = selectionOffsets(selection, textBox);
    if (!span || span.start >= span.end) return;
    openAnnotateForm(form, detail, span, handlers);
  });
}

function selectionOffsets(
  selection: Selection,
  textBox: HTMLElement,
): { start: number; end: number } | null {
  const toOffset = (node: Node, offset: number): number | null => {
    let segment: HTMLElement | null = null;
    if (node.nodeType === Node.TEXT_NODE) {
      segment = node.parentElement;
    } else if (node instanceof HTMLElement) {
      segment = node;
    }
    while (segment && segment !== textBox && !segment.dataset.start) {
      segment = segment.parentElement;
    }
    if (!segment || segment === textBox || !segment.dataset.start) return null;
    return Number(segment.dataset.start) + offset;
  };
  const range = selection.getRangeAt(0);
  const start = toOffset(range.startContainer, range.startOffset);
  const end = toOffset(range.endContainer, range.endOffset);
  if (start === null || end === null) return null;
  return { start: Math.min(start, end), end: Math.max(start, end) };
}

function openAnnotateForm(
  form: HTMLElement,
  detail: UnitDetail,
  span: { start: number; end: number },
  handlers: ReaderHandlers,
): void {
  clear(form);
  form.classList.remove("hidden");
  const surface = detail.text.slice(span.start, span.end);
  const overlapping = detail.annotations.filter(
    (a) => a.start < span.end && span.start < a.end,
  );
  const typeSelect = el("select", { class: "annotate-type" },
    MANUAL_TYPES.map((t) => el("option", { value: t }, [t])));
  const labelInput = el("input", {
    class: "annotate-label hidden",
    placeholder: "custom label",
  });
  typeSelect.addEventListener("change", () => {
    labelInput.classList.toggle("hidden", typeSelect.value !== "custom");
  });
  form.append(
    el("p", {}, [`annotate “${surface.length > 60 ? surface.slice(0, 57) + "…" : surface}”`]),
    ...(overlapping.length
      ? [el("p", { class: "conflict-note" }, [
          `overlaps ${overlapping.length} existing annotation${overlapping.length === 1 ? "" : "s"}: ` +
            overlapping.map((a) => a.a_type).join(", "),
        ])]
      : []),
    typeSelect,
    labelInput,
    el("button", {
      class: "small-btn",
      click: () => {
        const type = typeSelect.value;
        handlers.onAnnotate({
          start: span.start,
          end: span.end,
          type: type === "custom" ? "" : type,
          label: type === "custom" ? labelInput.value.trim() || "note" : undefined,
        });
        form.classList.add("hidden");
      },
    }, ["save annotation"]),
    el("button", { class: "small-btn", click: () => form.classList.add("hidden") }, ["cancel"]),
  );
}

function openEntityMenu(
  container: HTMLElement,
  anchor: HTMLElement,
  ann: AnnotationRecord,
  handlers: ReaderHandlers,
): void {
  container.querySelector(".entity-menu")?.remove();
  const entityId = ann.entity_id!;
  const mergeInput = el("input", { class: "merge-input", list: "entity-names", placeholder: "merge into…" });
  const dataList = el("datalist", { id: "entity-names" },
    handlers.entityNames.map((n) => el("option", { value: n })));
  const menu = el("div", { class: "entity-menu" }, [
    el("p", { class: "entity-menu-title" }, [`${ann.norm} (${ann.a_type})`]),
    el("button", {
      class: "small-btn",
      click: () => {
        handlers.onEntityFilter(entityId, ann.norm);
        menu.remove();
      },
    }, ["add to filter"]),
    mergeInput,
    dataList,
    el("button", {
      class: "small-btn",
      click: () => {
        if (mergeInput.value.trim()) handlers.onMerge(entityId, mergeInput.value.trim());
        menu.remove();
      },
    }, ["merge"]),
    el("button", {
      class: "small-btn danger",
      click: () => {
        handlers.onBlacklist(entityId);
        menu.remove();
      },
    }, ["blacklist"]),
    el("button", { class: "small-btn", click: () => menu.remove() }, ["close"]),
  ]);
  anchor.insertAdjacentElement("afterend", menu);
}
