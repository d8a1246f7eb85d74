/**
 * Shared types for the what-if explorer.
 *
 * The explorer is a pure client of the scoring service: every probability,
 * logit, delta or plausibility shown to the user comes verbatim from a
 * server response. The client never recomputes posteriors.
 */

/** One variable as described by GET /schema. */
export interface SchemaVariable {
  name: string;
  kind: 'numeric' | 'categorical';
  actionable: boolean;
  weight: number;
  /** Display labels for the variable's cells, indexed by cell number. */
  cells: string[];
}

export interface SchemaResponse {
  target: string;
  positive_label: string;
  classes: string[];
  variables: SchemaVariable[];
}

export interface PredictResponse {
  prob: number;
  logit: number;
  plausibility: number;
}

export interface PerChange {
  variable: string;
  cell: number;
  delta: number;
}

export interface WhatifResponse {
  delta: number;
  prob_before: number;
  prob_after: number;
  plausibility_after: number;
  per_change: PerChange[];
}

export interface TrajectoryStep {
  variable: string;
  from_cell: number;
  to_cell: number;
  delta: number;
  prob_after: number;
}

export type CounterfactualStatus =
  | 'counterfactual_found'
  | 'semi_factual_only'
  | 'no_change_possible';

export interface CounterfactualResponse {
  status: CounterfactualStatus;
  steps: TrajectoryStep[];
  final_instance: number[];
  initial_prob: number;
  final_prob: number;
  plausibility_final: number;
}

export interface KbRowResponse {
  id: string;
  /** "variable:cell" labels, one per knowledge-base column. */
  columns: string[];
  deltas: number[];
  factual_cells: number[];
  base_logit: number;
}

export interface ClusterProfile {
  cluster: number;
  size_fraction: number;
  positive_fraction: number;
  mean_delta: number[];
}

export interface ClustersResponse {
  k: number;
  seed?: number;
  low_confidence?: boolean;
  inertia_curve?: Record<string, number>;
  columns?: string[];
  short_labels?: string[];
  profiles: ClusterProfile[];
}

export interface ServiceError {
  error: string;
  message: string;
}

/** Client-side mirror of the service's constraint body. */
export interface ConstraintSet {
  frozen_variables: string[];
  adjacency_only: string[];
  forced_changes: { variable: string; cell: number }[];
  forbidden_cells: { variable: string; cell: number }[];
  max_changes: number | null;
}

export function emptyConstraints(): ConstraintSet {
  return {
    frozen_variables: [],
    adjacency_only: [],
    forced_changes: [],
    forbidden_cells: [],
    max_changes: null,
  };
}

/** A single applied change in the session (one per variable at most). */
export interface AppliedChange {
  variable: string;
  cell: number;
}

/**
 * One row of the on-screen trajectory table. Probability strings are the
 * raw JSON number tokens from the server response, kept verbatim so the
 * display can never drift from the service's own arithmetic.
 */
export interface TrajectoryRow {
  label: string;
  cells: number[];
  /** Which cells differ from the factual row. */
  changed: boolean[];
  probText: string;
  prob: number;
}
