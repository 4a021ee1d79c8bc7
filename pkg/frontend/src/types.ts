// Payload types of the /v1 annotation service.

export type Treatment = "ccr" | "search";

export interface SessionInfo {
  token: string;
  participant: string;
  treatment: Treatment;
  total_tasks: number;
  completed: number;
}

export interface PredictorBreakdown {
  exact: number | null;
  similarity: number | null;
  history: number | null;
}

export interface SuggestionCard {
  stem: string;
  surface: string;
  start: number;
  end: number;
  source: string;
  code: string;
  label: string;
  description: string;
  confidence: number;
  predictors: PredictorBreakdown;
  proxy: string | null;
}

export interface AcceptedPair {
  stem: string;
  code: string;
}

export interface TaskRequirement {
  id: string;
  text: string;
  index: number;
  total: number;
}

export interface TaskPayload {
  done: boolean;
  completed?: number;
  total?: number;
  treatment?: Treatment;
  requirement?: TaskRequirement;
  suggestions?: SuggestionCard[];
  accepted?: AcceptedPair[];
}

export interface DecisionResponse {
  accepted: AcceptedPair[];
  suggestions: SuggestionCard[];
}

export interface AnnotationResponse {
  ok: boolean;
  completed: number;
  total: number;
  done: boolean;
}

export interface SearchResult {
  code: string;
  label: string;
  description: string;
  score: number;
}
