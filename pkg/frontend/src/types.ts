// Payload shapes of the engine's HTTP API. The UI renders these verbatim;
// it never recomputes metrics client-side.

export interface TaxonomyRecord {
  id: string;
  name: string;
  category: string;
  description: string;
  dimensions: string[];
}

export interface TaxonomyResponse {
  errors: TaxonomyRecord[];
  dimensions: string[];
}

export interface QueueItem {
  sample_id: string;
  passage: string;
  answer: string;
  question: string;
  predicted: string[];
  confidences: number[];
  p_e: number;
  p_v: number;
  uncertainty: number;
  inconsistency: number;
  status: string;
}

export interface IterationRecord {
  index: number;
  added_reliable: number;
  added_human: number;
  train_size: number;
  pool_size: number;
  queue_pending: number;
  micro_f1: number;
  macro_f1: number;
  weighted_f1: number;
  emr: number;
  opr: number;
}

export interface ReviewResponse {
  sample_id: string;
  status: string;
  human_labels: string[] | null;
  reviewer: string | null;
  timestamp: string | null;
}

export interface EvaluateRequest {
  passage: string;
  answer: string;
  question: string;
  dimension: string;
  mode: "vanilla" | "error_aware";
}

export interface EvaluateResponse {
  ok: boolean;
  score?: number;
  reason?: string;
  diagnosed_errors: string[] | null;
  prompt: string;
  backend?: string;
  mode: string;
  dimension: string;
  error?: { code: string; message: string };
}

export interface DiagnoseResponse {
  sample_id: string;
  labels: string[];
  confidences: number[];
  p_e: number;
}
