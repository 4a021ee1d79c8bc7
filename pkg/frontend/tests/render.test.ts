// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";

import { computeSegments, renderView } from "../src/render";
import type { Handlers } from "../src/render";
import { viewFromPayload } from "../src/state";
import type { TaskView } from "../src/state";
import type { SuggestionCard, TaskPayload } from "../src/types";

function handlers(overrides: Partial<Handlers> = {}): Handlers {
  return {
    onDecision: vi.fn(),
    onSubmit: vi.fn(),
    onConfidence: vi.fn(),
    onSearch: vi.fn(),
    onAssociate: vi.fn(),
    onRemoveAssociation: vi.fn(),
    ...overrides,
  };
}

function card(partial: Partial<SuggestionCard>): SuggestionCard {
  return {
    stem: "bro",
    surface: "Bron",
    start: 0,
    end: 4,
    source: "whole-token",
    code: "B01",
    label: "bro",
    description: "konstruktion som bär väg över hinder",
    confidence: 0.42,
    predictors: { exact: 0.2, similarity: null, history: null },
    proxy: null,
    ...partial,
  };
}

function ccrPayload(suggestions: SuggestionCard[]): TaskPayload {
  return {
    done: false,
    treatment: "ccr",
    requirement: { id: "R1", text: "Bron skall ha räcke", index: 0, total: 2 },
    suggestions,
    accepted: [],
  };
}

function mount(): HTMLElement {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}

describe("computeSegments", () => {
  it("marks identical spans once with both stems in the tooltip", () => {
    const segments = computeSegments("järnvägsbro", [
      { start: 0, end: 11, stem: "järnväg" },
      { start: 0, end: 11, stem: "bro" },
    ]);
    expect(segments).toEqual([{ start: 0, end: 11, stems: ["järnväg", "bro"] }]);
  });

  it("splits partially overlapping spans so both stay visible", () => {
    const segments = computeSegments("abcdef", [
      { start: 0, end: 4, stem: "x" },
      { start: 2, end: 6, stem: "y" },
    ]);
    expect(segments).toEqual([
      { start: 0, end: 2, stems: ["x"] },
      { start: 2, end: 4, stems: ["x", "y"] },
      { start: 4, end: 6, stems: ["y"] },
    ]);
  });
});

describe("renderView / task", () => {
  it("renders cards in payload order, never re-ranked", () => {
    const view = viewFromPayload(
      ccrPayload([
        card({ code: "B03", confidence: 0.1 }),
        card({ code: "B01", confidence: 0.9 }),
        card({ code: "B02", confidence: 0.5 }),
      ]),
    );
    const root = mount();
    renderView(root, view, handlers());
    const codes = [...root.querySelectorAll('[data-testid="card"]')].map((node) =>
      node.getAttribute("data-code"),
    );
    expect(codes).toEqual(["B03", "B01", "B02"]);
  });

  it("highlights server-provided spans with tooltips", () => {
    const view = viewFromPayload(ccrPayload([card({ start: 0, end: 4, stem: "bro" })]));
    const root = mount();
    renderView(root, view, handlers());
    const marks = root.querySelectorAll("mark.noun");
    expect(marks.length).toBe(1);
    expect(marks[0].textContent).toBe("Bron");
    expect(marks[0].getAttribute("title")).toBe("bro");
  });

  it("highlights overlapping spans and disambiguates via tooltip", () => {
    const view = viewFromPayload(
      ccrPayload([
        card({ start: 0, end: 4, stem: "bro" }),
        card({ start: 0, end: 4, stem: "bron", code: "B02" }),
      ]),
    );
    const root = mount();
    renderView(root, view, handlers());
    const mark = root.querySelector("mark.noun");
    expect(mark?.getAttribute("title")).toBe("bro, bron");
  });

  it("wires explicit accept and reject buttons per card", () => {
    const onDecision = vi.fn();
    const view = viewFromPayload(ccrPayload([card({})]));
    const root = mount();
    renderView(root, view, handlers({ onDecision }));
    const buttons = root.querySelectorAll('[data-testid="card"] button');
    expect([...buttons].map((b) => b.textContent)).toEqual(["Accept", "Reject"]);
    (buttons[1] as HTMLButtonElement).click();
    expect(onDecision).toHaveBeenCalledWith(expect.objectContaining({ code: "B01" }), "reject");
  });

  it("renders each confidence scale with exactly five points", () => {
    const view = viewFromPayload(ccrPayload([]));
    const root = mount();
    renderView(root, view, handlers());
    for (const which of ["correct", "complete"]) {
      const points = root.querySelectorAll(`[data-testid="confidence-${which}"] .point`);
      expect(points.length).toBe(5);
      expect([...points].map((p) => p.getAttribute("data-value"))).toEqual(
        ["-2", "-1", "0", "1", "2"],
      );
    }
  });

  it("search arm renders a query box and zero cards", () => {
    const payload = ccrPayload([]);
    payload.treatment = "search";
    delete payload.suggestions;
    const view = viewFromPayload(payload);
    const root = mount();
    renderView(root, view, handlers());
    expect(root.querySelector('[data-testid="search-input"]')).not.toBeNull();
    expect(root.querySelectorAll('[data-testid="card"]').length).toBe(0);
  });

  it("shows a toast for a flagged decision failure", () => {
    let view = viewFromPayload(ccrPayload([card({})]));
    if (view.kind === "task") {
      view = { ...view, error: "request failed (500): boom" } as TaskView;
    }
    const root = mount();
    renderView(root, view, handlers());
    expect(root.querySelector('[data-testid="toast"]')?.textContent).toContain("boom");
    // the card is still there: nothing was lost
    expect(root.querySelectorAll('[data-testid="card"]').length).toBe(1);
  });
});

describe("renderView / terminal states", () => {
  it("malformed payload produces a visible error state and no partial render", () => {
    const view = viewFromPayload(null as unknown as TaskPayload);
    const root = mount();
    renderView(root, view, handlers());
    expect(root.querySelector('[data-testid="error"]')).not.toBeNull();
    expect(root.querySelectorAll('[data-testid="card"]').length).toBe(0);
    expect(root.querySelector('[data-testid="requirement"]')).toBeNull();
  });

  it("completion screen reports the session summary", () => {
    const root = mount();
    renderView(root, { kind: "done", completed: 7, total: 7 }, handlers());
    expect(root.querySelector('[data-testid="done"]')?.textContent).toContain("7 of 7");
  });
});
