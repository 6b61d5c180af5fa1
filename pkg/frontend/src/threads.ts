// Timeline threads: named lists of [from, to) second-intervals that are
// rendered side by side. Ranges inside one thread must not overlap; the
// presets cut a span on UTC calendar boundaries.

import { Layout } from "./chart.js";

export interface TimelineThread {
  label: string;
  ranges: Array<[number, number]>;
  layout: Layout;
}

export function validateThread(thread: TimelineThread): string | null {
  for (const [from, to] of thread.ranges) {
    if (!(from < to)) return `empty range [${from}, ${to}]`;
  }
  const sorted = [...thread.ranges].sort((p, q) => p[0] - q[0]);
  for (let i = 1; i < sorted.length; i++) {
    if (sorted[i][0] < sorted[i - 1][1]) {
      return (
        `overlapping ranges [${sorted[i - 1][0]}, ${sorted[i - 1][1]}] and ` +
        `[${sorted[i][0]}, ${sorted[i][1]}]`
      );
    }
  }
  return null;
}

// Presets. Timestamps are seconds; boundaries are UTC.

function cut(
  t0: number,
  t1: number,
  firstBoundary: (d: Date) => Date,
  next: (d: Date) => Date,
  label: (d: Date) => string,
): Array<{ label: string; from: number; to: number }> {
  const out: Array<{ label: string; from: number; to: number }> = [];
  let lo = firstBoundary(new Date(t0 * 1000));
  while (lo.getTime() / 1000 < t1) {
    const hi = next(lo);
    const from = Math.max(t0, lo.getTime() / 1000);
    const to = Math.min(t1, hi.getTime() / 1000);
    if (from < to) out.push({ label: label(lo), from, to });
    lo = hi;
  }
  return out;
}

const dayStart = (d: Date) =>
  new Date(Date.UTC(d.getUTCFullYear(), d.getUTCMonth(), d.getUTCDate()));

export function presetDays(t0: number, t1: number): Array<[number, number]> {
  return cut(
    t0,
    t1,
    dayStart,
    (d) => new Date(d.getTime() + 86_400_000),
    () => "",
  ).map((r) => [r.from, r.to]);
}

export function presetMonths(t0: number, t1: number): Array<[number, number]> {
  return cut(
    t0,
    t1,
    (d) => new Date(Date.UTC(d.getUTCFullYear(), d.getUTCMonth(), 1)),
    (d) => new Date(Date.UTC(d.getUTCFullYear(), d.getUTCMonth() + 1, 1)),
    () => "",
  ).map((r) => [r.from, r.to]);
}

export function presetYears(t0: number, t1: number): Array<[number, number]> {
  return cut(
    t0,
    t1,
    (d) => new Date(Date.UTC(d.getUTCFullYear(), 0, 1)),
    (d) => new Date(Date.UTC(d.getUTCFullYear() + 1, 0, 1)),
    () => "",
  ).map((r) => [r.from, r.to]);
}

// Every occurrence of one UTC weekday (0 = Sunday ... 6 = Saturday).
export function presetWeekday(
  t0: number,
  t1: number,
  weekday: number,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  let d = dayStart(new Date(t0 * 1000));
  while (d.getUTCDay() !== weekday) d = new Date(d.getTime() + 86_400_000);
  while (d.getTime() / 1000 < t1) {
    const from = Math.max(t0, d.getTime() / 1000);
    const to = Math.min(t1, d.getTime() / 1000 + 86_400);
    if (from < to) out.push([from, to]);
    d = new Date(d.getTime() + 7 * 86_400_000);
  }
  return out;
}

export function threadFromPreset(
  name: "days" | "months" | "years" | "weekday",
  t0: number,
  t1: number,
  layout: Layout = "horizontal",
  weekday = 1,
): TimelineThread {
  const ranges =
    name === "days"
      ? presetDays(t0, t1)
      : name === "months"
        ? presetMonths(t0, t1)
        : name === "years"
          ? presetYears(t0, t1)
          : presetWeekday(t0, t1, weekday);
  return { label: name, ranges, layout };
}

// Drag-reorder: move one element, leave the rest untouched.
export function reorder<T>(items: readonly T[], from: number, to: number): T[] {
  const out = [...items];
  const [moved] = out.splice(from, 1);
  out.splice(to, 0, moved);
  return out;
}

// Realignment: "absolute" keeps each range on the shared time axis;
// "start" anchors every range at zero so rhythms line up.
export function alignedDomains(
  thread: TimelineThread,
  anchor: "absolute" | "start",
): Array<[number, number]> {
  if (anchor === "absolute") return thread.ranges.map((r) => [r[0], r[1]]);
  return thread.ranges.map((r) => [0, r[1] - r[0]]);
}
