/** Wire types mirroring the triage service's JSON bodies. */

export type Label = "low" | "medium" | "high";

export const LABELS: Label[] = ["low", "medium", "high"];

export interface TriageItem {
  id: string;
  rule: string;
  ref_text: string;
  per_class_scores: Record<string, number>;
  top_score: number;
  ensemble_score_std: number | null;
  status: "pending" | "labeled";
  created_at: number;
  assigned_label: string | null;
  labeled_at: number | null;
}

export interface ClassifyResponse {
  status: "classified" | "rejected";
  label: string | null;
  top_score: number;
  scores: Record<string, number>;
  ensemble_score_std: number | null;
  tau: number;
  triage_id?: string;
}

export interface Report {
  balanced_accuracy: number;
  balanced_accuracy_std: number;
  au_arc: number;
  au_arc_std: number;
  arc: [number, number][];
  trained_on: number;
  trained_at: number;
  tau: number;
  classes: string[];
  class_counts: Record<string, number>;
}

export interface RetrainResponse {
  trained_on: number;
  trained_at: number;
  model_kind: string;
  layout: string;
}
