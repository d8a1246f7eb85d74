/**
 * View model for the cluster browser: one histogram panel per cluster
 * showing the mean delta over the clustered columns, with compact cell
 * labels and size / positive fractions.
 */

import type { ClustersResponse } from './types';

export interface ClusterPanel {
  cluster: number;
  title: string;
  sizePercent: string;
  positivePercent: string;
  bars: { label: string; value: number }[];
}

function pct(fraction: number): string {
  return `${(fraction * 100).toFixed(0)}%`;
}

export function clusterPanels(doc: ClustersResponse): ClusterPanel[] {
  const labels = doc.short_labels ?? doc.columns ?? [];
  return doc.profiles.map((p) => ({
    cluster: p.cluster,
    title: `cluster ${p.cluster + 1} of ${doc.k}`,
    sizePercent: pct(p.size_fraction),
    positivePercent: pct(p.positive_fraction),
    bars: p.mean_delta.map((value, j) => ({ label: labels[j] ?? `#${j}`, value })),
  }));
}

/**
 * Filter an individual list down to one cluster's members, given the
 * id -> cluster assignment map exported alongside the profiles.
 */
export function membersOf(
  assignments: Record<string, number>,
  cluster: number,
  ids: string[],
): string[] {
  return ids.filter((id) => assignments[id] === cluster);
}
