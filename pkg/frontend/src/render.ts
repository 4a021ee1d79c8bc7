// DOM rendering. Cards render strictly in array order (server order);
// overlapping highlight spans split into segments so every span is
// visible, with a tooltip naming the stems that cover each segment.

import { CONFIDENCE_SCALE, canSubmit } from "./state";
import type { TaskView, View } from "./state";
import type { SuggestionCard } from "./types";

export interface Handlers {
  onDecision(card: SuggestionCard, action: "accept" | "reject"): void;
  onSubmit(): void;
  onConfidence(which: "correct" | "complete", value: number): void;
  onSearch(query: string): void;
  onAssociate(term: string, code: string): void;
  onRemoveAssociation(index: number): void;
}

export interface Segment {
  start: number;
  end: number;
  stems: string[];
}

/** Split text into segments at every span boundary; a segment is covered
 * by all spans containing it, so overlapping spans both stay visible. */
export function computeSegments(
  text: string,
  spans: { start: number; end: number; stem: string }[],
): Segment[] {
  const boundaries = new Set<number>([0, text.length]);
  for (const span of spans) {
    boundaries.add(span.start);
    boundaries.add(span.end);
  }
  const sorted = [...boundaries].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < sorted.length; i += 1) {
    const [start, end] = [sorted[i], sorted[i + 1]];
    const stems: string[] = [];
    for (const span of spans) {
      if (span.start <= start && span.end >= end && !stems.includes(span.stem)) {
        stems.push(span.stem);
      }
    }
    segments.push({ start, end, stems });
  }
  return segments;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function formatScore(value: number | null): string {
  return value === null ? "–" : value.toFixed(3);
}

function renderRequirement(doc: Document, view: TaskView, root: HTMLElement): void {
  const header = el(doc, "div", { class: "task-header" });
  header.appendChild(
    el(doc, "span", { "data-testid": "progress" }, `Task ${view.index + 1} of ${view.total}`),
  );
  header.appendChild(el(doc, "span", { "data-testid": "elapsed", class: "elapsed" }, "0:00"));
  root.appendChild(header);

  const paragraph = el(doc, "p", { class: "requirement", "data-testid": "requirement" });
  const spans = view.cards.map((card) => ({
    start: card.start,
    end: card.end,
    stem: card.stem,
  }));
  for (const segment of computeSegments(view.text, spans)) {
    const slice = view.text.slice(segment.start, segment.end);
    if (segment.stems.length === 0) {
      paragraph.appendChild(doc.createTextNode(slice));
    } else {
      paragraph.appendChild(
        el(doc, "mark", { class: "noun", title: segment.stems.join(", ") }, slice),
      );
    }
  }
  root.appendChild(paragraph);
}

function renderCards(doc: Document, view: TaskView, root: HTMLElement, handlers: Handlers): void {
  const list = el(doc, "div", { class: "cards", "data-testid": "cards" });
  for (const card of view.cards) {
    const box = el(doc, "div", {
      class: "card",
      "data-testid": "card",
      "data-stem": card.stem,
      "data-code": card.code,
    });
    box.appendChild(el(doc, "strong", {}, `${card.label} (${card.code})`));
    box.appendChild(
      el(doc, "span", { class: "confidence" }, ` confidence ${card.confidence.toFixed(3)}`),
    );
    const snippet =
      card.description.length > 120 ? `${card.description.slice(0, 117)}...` : card.description;
    box.appendChild(el(doc, "p", { class: "snippet" }, snippet));
    const breakdown =
      `noun "${card.stem}" · exact ${formatScore(card.predictors.exact)}` +
      ` · similarity ${formatScore(card.predictors.similarity)}` +
      (card.proxy ? ` (via "${card.proxy}")` : "") +
      ` · history ${formatScore(card.predictors.history)}`;
    box.appendChild(el(doc, "p", { class: "breakdown" }, breakdown));

    const accept = el(doc, "button", { "data-action": "accept" }, "Accept");
    const reject = el(doc, "button", { "data-action": "reject" }, "Reject");
    if (view.decisionInFlight) {
      accept.setAttribute("disabled", "disabled");
      reject.setAttribute("disabled", "disabled");
    }
    accept.addEventListener("click", () => handlers.onDecision(card, "accept"));
    reject.addEventListener("click", () => handlers.onDecision(card, "reject"));
    box.appendChild(accept);
    box.appendChild(reject);
    list.appendChild(box);
  }
  root.appendChild(list);
}

function renderSearch(doc: Document, view: TaskView, root: HTMLElement, handlers: Handlers): void {
  const box = el(doc, "div", { class: "search", "data-testid": "search" });
  const input = el(doc, "input", {
    type: "text",
    placeholder: "Search the taxonomy",
    "data-testid": "search-input",
  });
  input.value = view.searchQuery;
  const button = el(doc, "button", { "data-testid": "search-button" }, "Search");
  button.addEventListener("click", () => handlers.onSearch(input.value));
  box.appendChild(input);
  box.appendChild(button);

  const results = el(doc, "ul", { class: "results", "data-testid": "search-results" });
  for (const result of view.searchResults) {
    const item = el(doc, "li", { "data-code": result.code });
    item.appendChild(el(doc, "strong", {}, `${result.label} (${result.code})`));
    item.appendChild(el(doc, "span", {}, ` ${result.description}`));
    const associate = el(doc, "button", { "data-action": "associate" }, "Associate");
    associate.addEventListener("click", () =>
      handlers.onAssociate(input.value.trim() || result.label, result.code),
    );
    item.appendChild(associate);
    results.appendChild(item);
  }
  box.appendChild(results);
  root.appendChild(box);

  const chosen = el(doc, "ul", { class: "associations", "data-testid": "associations" });
  view.manualAssociations.forEach((assoc, i) => {
    const item = el(doc, "li", {}, `${assoc.term} -> ${assoc.code} `);
    const remove = el(doc, "button", { "data-action": "remove" }, "Remove");
    remove.addEventListener("click", () => handlers.onRemoveAssociation(i));
    item.appendChild(remove);
    chosen.appendChild(item);
  });
  root.appendChild(chosen);
}

function renderAccepted(doc: Document, view: TaskView, root: HTMLElement): void {
  const box = el(doc, "div", { class: "accepted", "data-testid": "accepted" });
  box.appendChild(el(doc, "h3", {}, "Accepted associations"));
  const list = el(doc, "ul", {});
  for (const pair of view.accepted) {
    list.appendChild(el(doc, "li", { "data-code": pair.code }, `${pair.stem} -> ${pair.code}`));
  }
  box.appendChild(list);
  root.appendChild(box);
}

function renderConfidence(
  doc: Document,
  view: TaskView,
  root: HTMLElement,
  handlers: Handlers,
): void {
  const box = el(doc, "div", { class: "confidence-box" });
  const scales: ["correct" | "complete", string, number | null][] = [
    ["correct", "How confident are you that the associations are correct?", view.confCorrect],
    ["complete", "How confident are you that no association is missing?", view.confComplete],
  ];
  for (const [which, label, selected] of scales) {
    const row = el(doc, "div", { class: "scale", "data-testid": `confidence-${which}` });
    row.appendChild(el(doc, "span", {}, label));
    for (const value of CONFIDENCE_SCALE) {
      const button = el(
        doc,
        "button",
        {
          "data-value": String(value),
          class: selected === value ? "point selected" : "point",
        },
        value > 0 ? `+${value}` : String(value),
      );
      button.addEventListener("click", () => handlers.onConfidence(which, value));
      row.appendChild(button);
    }
    box.appendChild(row);
  }

  if (view.prompt) {
    box.appendChild(el(doc, "p", { class: "prompt", "data-testid": "submit-prompt" }, view.prompt));
  }
  const submit = el(doc, "button", { class: "submit", "data-testid": "submit" }, "Submit task");
  if (!canSubmit(view)) {
    submit.setAttribute("aria-disabled", "true");
  }
  submit.addEventListener("click", () => handlers.onSubmit());
  box.appendChild(submit);
  root.appendChild(box);
}

export function renderView(root: HTMLElement, view: View, handlers: Handlers): void {
  const doc = root.ownerDocument;
  root.textContent = "";

  if (view.kind === "error") {
    root.appendChild(
      el(doc, "div", { class: "error-state", "data-testid": "error" }, view.message),
    );
    return;
  }
  if (view.kind === "done") {
    const box = el(doc, "div", { class: "done", "data-testid": "done" });
    box.appendChild(el(doc, "h2", {}, "All tasks completed"));
    box.appendChild(
      el(doc, "p", {}, `You annotated ${view.completed} of ${view.total} requirements.`),
    );
    root.appendChild(box);
    return;
  }

  renderRequirement(doc, view, root);
  if (view.treatment === "ccr") {
    renderCards(doc, view, root, handlers);
    renderAccepted(doc, view, root);
  } else {
    renderSearch(doc, view, root, handlers);
  }
  if (view.error) {
    root.appendChild(el(doc, "div", { class: "toast", "data-testid": "toast" }, view.error));
  }
  renderConfidence(doc, view, root, handlers);
}
