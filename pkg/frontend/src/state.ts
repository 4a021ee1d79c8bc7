// Pure view-state transitions. The renderer never reorders cards: the
// card array always mirrors the latest server payload, so server-side
// re-ranking (or suppression) is what the user sees.

import type {
  AcceptedPair,
  DecisionResponse,
  SearchResult,
  SuggestionCard,
  TaskPayload,
  Treatment,
} from "./types";

export const CONFIDENCE_SCALE = [-2, -1, 0, 1, 2] as const;
export type Confidence = (typeof CONFIDENCE_SCALE)[number];

export interface Association {
  term: string;
  code: string;
}

export interface TaskView {
  kind: "task";
  treatment: Treatment;
  requirementId: string;
  text: string;
  index: number;
  total: number;
  cards: SuggestionCard[];
  accepted: AcceptedPair[];
  manualAssociations: Association[];
  searchResults: SearchResult[];
  searchQuery: string;
  confCorrect: Confidence | null;
  confComplete: Confidence | null;
  decisionInFlight: boolean;
  error: string | null;
  prompt: string | null;
}

export interface DoneView {
  kind: "done";
  completed: number;
  total: number;
}

export interface ErrorView {
  kind: "error";
  message: string;
}

export type View = TaskView | DoneView | ErrorView;

function isNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function validCard(card: unknown, textLength: number): card is SuggestionCard {
  if (typeof card !== "object" || card === null) {
    return false;
  }
  const c = card as Record<string, unknown>;
  return (
    typeof c.stem === "string" &&
    typeof c.code === "string" &&
    typeof c.label === "string" &&
    isNumber(c.confidence) &&
    isNumber(c.start) &&
    isNumber(c.end) &&
    c.start >= 0 &&
    c.end > (c.start as number) &&
    c.end <= textLength
  );
}

/** Build the task view from a server payload; malformed input yields an
 * error view and nothing is rendered partially. */
export function viewFromPayload(payload: TaskPayload | null | undefined): View {
  if (typeof payload !== "object" || payload === null || typeof payload.done !== "boolean") {
    return { kind: "error", message: "malformed task payload" };
  }
  if (payload.done) {
    if (!isNumber(payload.completed) || !isNumber(payload.total)) {
      return { kind: "error", message: "malformed completion payload" };
    }
    return { kind: "done", completed: payload.completed, total: payload.total };
  }
  const requirement = payload.requirement;
  if (
    requirement == null ||
    typeof requirement.id !== "string" ||
    typeof requirement.text !== "string" ||
    !isNumber(requirement.index) ||
    !isNumber(requirement.total) ||
    (payload.treatment !== "ccr" && payload.treatment !== "search")
  ) {
    return { kind: "error", message: "malformed task payload" };
  }
  let cards: SuggestionCard[] = [];
  if (payload.treatment === "ccr") {
    if (!Array.isArray(payload.suggestions)) {
      return { kind: "error", message: "malformed task payload" };
    }
    if (!payload.suggestions.every((card) => validCard(card, requirement.text.length))) {
      return { kind: "error", message: "malformed suggestion in task payload" };
    }
    cards = payload.suggestions;
  }
  return {
    kind: "task",
    treatment: payload.treatment,
    requirementId: requirement.id,
    text: requirement.text,
    index: requirement.index,
    total: requirement.total,
    cards,
    accepted: payload.accepted ?? [],
    manualAssociations: [],
    searchResults: [],
    searchQuery: "",
    confCorrect: null,
    confComplete: null,
    decisionInFlight: false,
    error: null,
    prompt: null,
  };
}

export function beginDecision(view: TaskView): TaskView {
  return { ...view, decisionInFlight: true, error: null };
}

/** Replace cards and accepted list with the server's re-ranked response. */
export function applyDecisionResult(view: TaskView, response: DecisionResponse): TaskView {
  return {
    ...view,
    cards: response.suggestions,
    accepted: response.accepted,
    decisionInFlight: false,
    error: null,
  };
}

/** A failed decision keeps every card in place and flags the failure. */
export function decisionFailed(view: TaskView, message: string): TaskView {
  return { ...view, decisionInFlight: false, error: message };
}

export function setConfidence(
  view: TaskView,
  which: "correct" | "complete",
  value: number,
): TaskView {
  if (!(CONFIDENCE_SCALE as readonly number[]).includes(value)) {
    throw new Error(`confidence ${value} is outside the five-point scale`);
  }
  const next = { ...view, prompt: null };
  if (which === "correct") {
    next.confCorrect = value as Confidence;
  } else {
    next.confComplete = value as Confidence;
  }
  return next;
}

export function canSubmit(view: TaskView): boolean {
  return view.confCorrect !== null && view.confComplete !== null;
}

export function blockedSubmit(view: TaskView): TaskView {
  return { ...view, prompt: "Select both confidence ratings before submitting." };
}

export function withSearchResults(
  view: TaskView,
  query: string,
  results: SearchResult[],
): TaskView {
  return { ...view, searchQuery: query, searchResults: results, error: null };
}

export function addAssociation(view: TaskView, term: string, code: string): TaskView {
  return { ...view, manualAssociations: [...view.manualAssociations, { term, code }] };
}

export function removeAssociation(view: TaskView, index: number): TaskView {
  const manualAssociations = view.manualAssociations.filter((_, i) => i !== index);
  return { ...view, manualAssociations };
}

/** What goes into the annotation record: accepted suggestions for the
 * recommender arm, hand-picked associations for the search arm. */
export function associationsForSubmit(view: TaskView): Association[] {
  if (view.treatment === "ccr") {
    return view.accepted.map((pair) => ({ term: pair.stem, code: pair.code }));
  }
  return view.manualAssociations;
}
