// Click-to-label state and the prediction overlay model. Confidences are
// API values passed through untouched.

import { Overlay, OverlayEntry } from "./chart.js";
import { Label, PredictionRow, UncertainRow } from "./types.js";

export type LabelValue = Label | null;

// Clicking an episode cycles positive -> negative -> unlabeled.
export function cycleLabel(current: LabelValue): LabelValue {
  if (current === "positive") return "negative";
  if (current === "negative") return null;
  return "positive";
}

export function buildOverlay(
  predictions: PredictionRow[],
  minConfidence: number | null = null,
): Overlay {
  const byRef = new Map<string, OverlayEntry>();
  for (const p of predictions) {
    byRef.set(p.episode_ref, { label: p.label, confidence: p.confidence });
  }
  return { byRef, minConfidence };
}

export interface UncertainPanelRow {
  ref: string;
  confidence: number;
  pair: [string, string];
  start: number;
  end: number;
  caption: string;
}

// The panel preserves the server's most-uncertain-first order.
export function uncertainPanel(rows: UncertainRow[]): UncertainPanelRow[] {
  return rows.map((r) => ({
    ref: r.episode_ref,
    confidence: r.confidence,
    pair: r.pair,
    start: r.start,
    end: r.end,
    caption: `${r.pair[0]} ↔ ${r.pair[1]}  [${r.start} .. ${r.end}]  p=${r.confidence}`,
  }));
}
