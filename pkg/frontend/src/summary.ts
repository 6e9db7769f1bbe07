// Ranking summary view model: one stacked bar per system, in the server's
// fixed system order, with the shared draw share as the last segment.

import type { RankingSummary } from "./types.js";

export interface BarSegment {
  label: string; // "rank 1" … "rank n" | "draw"
  pct: number; // width in percent, 0..100
}

export interface SummaryBar {
  system: string;
  segments: BarSegment[];
}

export interface SummaryView {
  empty: boolean;
  nRecords: number;
  bars: SummaryBar[];
}

export function toSummaryView(summary: RankingSummary): SummaryView {
  if (summary.n_records === 0) {
    return { empty: true, nRecords: 0, bars: [] };
  }
  const nRanks = summary.systems.length;
  const bars = summary.systems.map((system) => {
    const proportions = summary.proportions[system] ?? {};
    const segments: BarSegment[] = [];
    for (let rank = 1; rank <= nRanks; rank++) {
      segments.push({
        label: `rank ${rank}`,
        pct: round2((proportions[String(rank)] ?? 0) * 100),
      });
    }
    segments.push({ label: "draw", pct: round2(summary.draw * 100) });
    return { system, segments };
  });
  return { empty: false, nRecords: summary.n_records, bars };
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}
