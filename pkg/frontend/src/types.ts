// Shapes of the documents the HTTP API serves. The UI renders these
// verbatim; it never derives densities, episodes, features, or predictions.

export interface GridDoc {
  start: number;
  step: number;
  n: number;
}

export interface KdeParamsDoc {
  mu: number;
  sigma: number;
  h: number;
}

export interface ProfileDoc {
  pair: [string, string] | null;
  grid: GridDoc;
  params: KdeParamsDoc;
  n_in: number;
  n_out: number;
  f_in: number[];
  f_out: number[];
}

export interface EpisodeDoc {
  pair: [string, string] | null;
  start: number;
  end: number;
  duration: number;
  n_in: number;
  n_out: number;
  ref: string | null;
  features?: Record<string, number>;
}

export interface EpisodesResponse {
  params: Record<string, unknown>;
  epsilon_resolved: number;
  episodes: EpisodeDoc[];
  residual_count: number;
}

export interface PairRow {
  a: string;
  b: string;
  count_ab: number;
  count_ba: number;
  total: number;
}

export interface CorpusInfo {
  ref: string;
  events: number;
  entities: number;
  directed_pairs: number;
  unordered_pairs: number;
  self_loops: number;
  span_days: number;
  t_min: number | null;
  t_max: number | null;
}

export interface HealthDoc {
  status: string;
  corpus: CorpusInfo;
}

export type Label = "positive" | "negative";

export interface PredictionRow {
  episode_ref: string;
  label: Label;
  confidence: number;
  pair: [string, string];
  start: number;
  end: number;
}

export interface PredictionsResponse {
  class_name: string;
  min_confidence: number;
  polarity: string;
  predictions: PredictionRow[];
}

export interface UncertainRow {
  episode_ref: string;
  confidence: number;
  pair: [string, string];
  start: number;
  end: number;
}

export interface UncertainResponse {
  class_name: string;
  uncertain: UncertainRow[];
}

export interface SessionLabelRow {
  episode_ref: string;
  label: Label;
  stale: boolean;
  pair: [string, string];
  start: number;
  end: number;
}

export interface SessionModelRow {
  class_name: string;
  kind: "forest" | "combined";
  version: number;
  trained_on: number | null;
}

export interface SessionDoc {
  id: string;
  corpus_ref: string;
  view_state: Record<string, unknown> | null;
  labels: SessionLabelRow[];
  models: SessionModelRow[];
}

export interface TrainResponse {
  class_name: string;
  version: number;
  trained_on: number;
  stale_labels: string[];
}
