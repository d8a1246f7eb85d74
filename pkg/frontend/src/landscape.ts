/**
 * View model for the per-individual delta landscape: one bar group per
 * variable, one bar per cell, factual cell pinned at 0, groups ordered so
 * the most promising controls come first.
 */

import type { KbRowResponse, SchemaResponse } from './types';

export interface DeltaBar {
  cell: number;
  label: string;
  delta: number;
  factual: boolean;
}

export interface DeltaBarGroup {
  variable: string;
  /** Non-actionable variables render with their controls disabled. */
  disabled: boolean;
  maxDelta: number;
  bars: DeltaBar[];
}

/**
 * Group the knowledge-base row's deltas by variable and sort groups by
 * their best achievable delta, descending (ties: schema order).
 */
export function deltaLandscape(row: KbRowResponse, schema: SchemaResponse): DeltaBarGroup[] {
  const groups = new Map<string, DeltaBar[]>();
  row.columns.forEach((col, j) => {
    const sep = col.lastIndexOf(':');
    const variable = col.slice(0, sep);
    const cell = Number(col.slice(sep + 1));
    if (!groups.has(variable)) groups.set(variable, []);
    groups.get(variable)!.push({ cell, label: col, delta: row.deltas[j]!, factual: false });
  });

  const out: DeltaBarGroup[] = [];
  schema.variables.forEach((spec, i) => {
    const bars = groups.get(spec.name);
    if (!bars) return; // zero-weight variables have no KB columns
    for (const bar of bars) {
      bar.label = spec.cells[bar.cell] ?? bar.label;
      bar.factual = bar.cell === row.factual_cells[i];
    }
    out.push({
      variable: spec.name,
      disabled: !spec.actionable,
      maxDelta: Math.max(...bars.map((b) => b.delta)),
      bars: bars.sort((a, b) => a.cell - b.cell),
    });
  });
  return out.sort((a, b) => b.maxDelta - a.maxDelta);
}
