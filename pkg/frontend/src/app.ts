// Controller: wires the API client, view state and renderer together.
// Decisions are strictly sequential (at most one in flight) to respect the
// server's serialized feedback contract; a failed decision restores the
// card and shows a toast, so no input is ever lost silently.

import { ApiClient, ApiError } from "./api";
import {
  applyDecisionResult,
  associationsForSubmit,
  beginDecision,
  blockedSubmit,
  canSubmit,
  decisionFailed,
  removeAssociation,
  setConfidence,
  addAssociation,
  viewFromPayload,
  withSearchResults,
} from "./state";
import type { View } from "./state";
import { renderView } from "./render";
import type { Handlers } from "./render";
import type { SuggestionCard, Treatment } from "./types";

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status ? `request failed (${err.status}): ${err.message}` : err.message;
  }
  return String(err);
}

export class AnnotatorApp {
  view: View = { kind: "error", message: "not started" };
  private openedAt = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async start(participant: string, treatment?: Treatment): Promise<void> {
    try {
      await this.api.openSession(participant, treatment);
    } catch (err) {
      this.view = { kind: "error", message: describe(err) };
      this.render();
      return;
    }
    await this.loadTask();
  }

  async loadTask(): Promise<void> {
    try {
      const payload = await this.api.getTask();
      this.view = viewFromPayload(payload);
    } catch (err) {
      this.view = { kind: "error", message: describe(err) };
    }
    this.openedAt = Date.now();
    this.render();
  }

  private handlers(): Handlers {
    return {
      onDecision: (card, action) => void this.decide(card, action),
      onSubmit: () => void this.submit(),
      onConfidence: (which, value) => {
        if (this.view.kind === "task") {
          this.view = setConfidence(this.view, which, value);
          this.render();
        }
      },
      onSearch: (query) => void this.search(query),
      onAssociate: (term, code) => {
        if (this.view.kind === "task") {
          this.view = addAssociation(this.view, term, code);
          this.render();
        }
      },
      onRemoveAssociation: (index) => {
        if (this.view.kind === "task") {
          this.view = removeAssociation(this.view, index);
          this.render();
        }
      },
    };
  }

  async decide(card: SuggestionCard, action: "accept" | "reject"): Promise<void> {
    if (this.view.kind !== "task" || this.view.decisionInFlight) {
      return; // one decision in flight at most
    }
    this.view = beginDecision(this.view);
    this.render();
    try {
      const response = await this.api.postDecision(card.stem, card.code, action);
      if (this.view.kind === "task") {
        this.view = applyDecisionResult(this.view, response);
      }
    } catch (err) {
      if (this.view.kind === "task") {
        this.view = decisionFailed(this.view, describe(err));
      }
    }
    this.render();
  }

  async submit(): Promise<void> {
    if (this.view.kind !== "task") {
      return;
    }
    if (!canSubmit(this.view)) {
      this.view = blockedSubmit(this.view);
      this.render();
      return;
    }
    const view = this.view;
    try {
      const response = await this.api.postAnnotation(
        view.requirementId,
        view.confCorrect as number,
        view.confComplete as number,
        associationsForSubmit(view),
      );
      if (response.done) {
        this.view = { kind: "done", completed: response.completed, total: response.total };
        this.render();
      } else {
        await this.loadTask();
      }
    } catch (err) {
      this.view = decisionFailed(view, describe(err));
      this.render();
    }
  }

  async search(query: string): Promise<void> {
    if (this.view.kind !== "task") {
      return;
    }
    try {
      const results = await this.api.search(query);
      this.view = withSearchResults(this.view, query, results);
    } catch (err) {
      this.view = decisionFailed(this.view, describe(err));
    }
    this.render();
  }

  render(): void {
    renderView(this.root, this.view, this.handlers());
    this.tickElapsed();
    if (this.timer === null && this.view.kind === "task") {
      this.timer = setInterval(() => this.tickElapsed(), 1000);
    }
    if (this.view.kind !== "task" && this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private tickElapsed(): void {
    const node = this.root.querySelector('[data-testid="elapsed"]');
    if (node && this.view.kind === "task") {
      const seconds = Math.max(0, Math.floor((Date.now() - this.openedAt) / 1000));
      const minutes = Math.floor(seconds / 60);
      node.textContent = `${minutes}:${String(seconds % 60).padStart(2, "0")}`;
    }
  }
}
