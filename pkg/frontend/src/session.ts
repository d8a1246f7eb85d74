/**
 * Explorer session state: the ordered list of applied changes, the active
 * constraints, and the live probability as last reported by the service.
 *
 * Invariants
 *  - the applied-changes list mirrors exactly the cumulative change set sent
 *    to /whatif; displayed probabilities are raw server tokens, never
 *    recomputed client-side;
 *  - at most one /whatif request is in flight; later interactions are
 *    queued so the trajectory stays ordered.
 */

import type { ServiceClient } from './api';
import type {
  AppliedChange,
  ConstraintSet,
  CounterfactualResponse,
  SchemaResponse,
  SchemaVariable,
  TrajectoryRow,
} from './types';
import { emptyConstraints } from './types';

/** Raised when a step is blocked client-side; names the violated constraint. */
export class ConstraintViolation extends Error {
  readonly constraint: string;

  constructor(constraint: string, message: string) {
    super(message);
    this.constraint = constraint;
  }
}

export interface SessionView {
  /** Raw server token for the current probability (server authority). */
  probText: string;
  prob: number;
  probBeforeText: string;
  delta: number;
  plausibility: number;
  crossedThreshold: boolean;
  changes: AppliedChange[];
  trajectory: TrajectoryRow[];
}

export class ExplorerSession {
  readonly client: ServiceClient;
  readonly schema: SchemaResponse;
  threshold = 0.5;

  private factual: number[] = [];
  private rowId: string | null = null;
  private changes: AppliedChange[] = [];
  private constraints: ConstraintSet = emptyConstraints();
  private view: SessionView | null = null;
  /** Serializes /whatif traffic: one in-flight request, later ones queued. */
  private queue: Promise<unknown> = Promise.resolve();

  constructor(client: ServiceClient, schema: SchemaResponse) {
    this.client = client;
    this.schema = schema;
  }

  private variable(name: string): SchemaVariable {
    const v = this.schema.variables.find((s) => s.name === name);
    if (!v) throw new Error(`unknown variable: ${name}`);
    return v;
  }

  private varIndex(name: string): number {
    return this.schema.variables.findIndex((s) => s.name === name);
  }

  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /** Select a knowledge-base individual as the factual profile. */
  loadIndividual(id: string): Promise<SessionView> {
    return this.enqueue(async () => {
      const row = await this.client.kbRow(id);
      this.rowId = id;
      this.factual = [...row.factual_cells];
      this.changes = [];
      return this.refresh();
    });
  }

  /** Enter a profile manually (cell indices, one per variable). */
  setManualCells(cells: number[]): Promise<SessionView> {
    return this.enqueue(async () => {
      this.rowId = null;
      this.factual = [...cells];
      this.changes = [];
      return this.refresh();
    });
  }

  getConstraints(): ConstraintSet {
    return JSON.parse(JSON.stringify(this.constraints)) as ConstraintSet;
  }

  setFrozen(variable: string, frozen: boolean): Promise<SessionView> {
    return this.enqueue(async () => {
      const set = new Set(this.constraints.frozen_variables);
      if (frozen) set.add(variable);
      else set.delete(variable);
      this.constraints.frozen_variables = [...set];
      if (frozen) {
        // freezing retracts any change already applied to the variable
        this.changes = this.changes.filter((c) => c.variable !== variable);
      }
      return this.refresh();
    });
  }

  setAdjacencyOnly(variable: string, on: boolean): void {
    if (this.variable(variable).kind !== 'numeric') {
      throw new ConstraintViolation('adjacency_only', `${variable} is not numeric`);
    }
    const set = new Set(this.constraints.adjacency_only);
    if (on) set.add(variable);
    else set.delete(variable);
    this.constraints.adjacency_only = [...set];
  }

  setForbidden(variable: string, cell: number, forbidden: boolean): void {
    const rest = this.constraints.forbidden_cells.filter(
      (f) => !(f.variable === variable && f.cell === cell),
    );
    this.constraints.forbidden_cells = forbidden ? [...rest, { variable, cell }] : rest;
  }

  setMaxChanges(n: number | null): void {
    this.constraints.max_changes = n;
  }

  /**
   * Check a prospective step against the active constraints and the session
   * rules; throws ConstraintViolation naming the offending constraint.
   */
  checkAdmissible(variable: string, cell: number): void {
    const spec = this.variable(variable);
    const i = this.varIndex(variable);
    if (!spec.actionable) {
      throw new ConstraintViolation('actionable', `${variable} is not actionable`);
    }
    if (this.constraints.frozen_variables.includes(variable)) {
      throw new ConstraintViolation('frozen_variables', `${variable} is frozen`);
    }
    if (cell < 0 || cell >= spec.cells.length) {
      throw new ConstraintViolation('cell_range', `${variable} has no cell ${cell}`);
    }
    if (cell === this.factual[i]) {
      throw new ConstraintViolation('factual_noop', `${variable} already has that value`);
    }
    if (this.constraints.forbidden_cells.some((f) => f.variable === variable && f.cell === cell)) {
      throw new ConstraintViolation('forbidden_cells', `${variable} cell ${cell} is forbidden`);
    }
    if (
      this.constraints.adjacency_only.includes(variable) &&
      Math.abs(cell - this.factual[i]!) !== 1
    ) {
      throw new ConstraintViolation('adjacency_only', `${variable} may only move one bin`);
    }
    const replaces = this.changes.some((c) => c.variable === variable);
    if (
      this.constraints.max_changes !== null &&
      !replaces &&
      this.changes.length >= this.constraints.max_changes
    ) {
      throw new ConstraintViolation('max_changes', `at most ${this.constraints.max_changes} changes`);
    }
  }

  /**
   * Apply one change. A second change to an already-changed variable
   * replaces the first (the service's one-change-per-variable rule).
   */
  applyStep(variable: string, cell: number): Promise<SessionView> {
    this.checkAdmissible(variable, cell);
    return this.enqueue(async () => {
      const existing = this.changes.findIndex((c) => c.variable === variable);
      if (existing >= 0) this.changes[existing] = { variable, cell };
      else this.changes.push({ variable, cell });
      return this.refresh();
    });
  }

  /** Retract the applied change on one variable, if any. */
  retractStep(variable: string): Promise<SessionView> {
    return this.enqueue(async () => {
      this.changes = this.changes.filter((c) => c.variable !== variable);
      return this.refresh();
    });
  }

  /**
   * Ask the service for a full trajectory and replay it into the session,
   * step by step, so the user can inspect or edit it afterwards.
   */
  autoExplain(
    mode: 'counterfactual' | 'preventive' = 'counterfactual',
    steps = 1,
  ): Promise<{ response: CounterfactualResponse; view: SessionView }> {
    return this.enqueue(async () => {
      const response = await this.client.counterfactual({
        ...(this.rowId !== null ? { row_id: this.rowId } : { cells: this.factual }),
        constraints: this.constraints,
        threshold: this.threshold,
        mode,
        ...(mode === 'preventive' ? { steps } : {}),
      });
      this.changes = response.steps.map((s) => ({ variable: s.variable, cell: s.to_cell }));
      const view = await this.refresh();
      return { response, view };
    });
  }

  getView(): SessionView {
    if (!this.view) throw new Error('no profile loaded');
    return this.view;
  }

  /**
   * Re-query the service for every trajectory prefix so each on-screen row
   * carries the server's own probability token for that cumulative state.
   */
  private async refresh(): Promise<SessionView> {
    const names = this.schema.variables.map((v) => v.name);
    const rows: TrajectoryRow[] = [];
    let last = await this.client.whatif(this.factual, []);
    rows.push(this.makeRow('factual', this.factual, last.raw.prob_before, last.body.prob_before));
    const cells = [...this.factual];
    for (let n = 1; n <= this.changes.length; n++) {
      const prefix = this.changes.slice(0, n);
      last = await this.client.whatif(this.factual, prefix);
      const step = prefix[n - 1]!;
      cells[names.indexOf(step.variable)] = step.cell;
      rows.push(this.makeRow(`step ${n}`, cells, last.raw.prob_after, last.body.prob_after));
    }
    const final = this.changes.length === 0 ? last.raw.prob_before : last.raw.prob_after;
    const finalProb = this.changes.length === 0 ? last.body.prob_before : last.body.prob_after;
    this.view = {
      probText: final,
      prob: finalProb,
      probBeforeText: rows[0]!.probText,
      delta: this.changes.length === 0 ? 0 : last.body.delta,
      plausibility: last.body.plausibility_after,
      crossedThreshold: finalProb > this.threshold,
      changes: this.changes.map((c) => ({ ...c })),
      trajectory: rows,
    };
    return this.view;
  }

  private makeRow(label: string, cells: number[], probText: string, prob: number): TrajectoryRow {
    return {
      label,
      cells: [...cells],
      changed: cells.map((c, i) => c !== this.factual[i]),
      probText,
      prob,
    };
  }
}
