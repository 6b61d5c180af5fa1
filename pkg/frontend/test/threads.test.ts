import { describe, expect, it } from "vitest";

import {
  alignedDomains,
  presetDays,
  presetMonths,
  presetWeekday,
  presetYears,
  reorder,
  TimelineThread,
  validateThread,
} from "../src/threads.js";

const DAY = 86_400;

describe("validateThread", () => {
  const thread = (ranges: Array<[number, number]>): TimelineThread => ({
    label: "t",
    ranges,
    layout: "horizontal",
  });

  it("accepts disjoint and touching ranges", () => {
    expect(validateThread(thread([[0, 10], [10, 20], [30, 40]]))).toBeNull();
  });

  it("reports overlapping ranges", () => {
    const msg = validateThread(thread([[0, 10], [5, 20]]));
    expect(msg).toContain("overlapping");
    expect(msg).toContain("[0, 10]");
  });

  it("rejects empty ranges", () => {
    expect(validateThread(thread([[10, 10]]))).toContain("empty range");
  });
});

describe("presets", () => {
  it("per-day ranges tile the span without gaps", () => {
    const t0 = 3 * DAY + 5000;
    const t1 = 7 * DAY + 100;
    const ranges = presetDays(t0, t1);
    expect(ranges[0][0]).toBe(t0);
    expect(ranges[ranges.length - 1][1]).toBe(t1);
    for (let i = 1; i < ranges.length; i++) {
      expect(ranges[i][0]).toBe(ranges[i - 1][1]);
    }
    const t = { label: "d", ranges, layout: "horizontal" as const };
    expect(validateThread(t)).toBeNull();
  });

  it("weekday preset picks every Monday", () => {
    // epoch day 0 is a Thursday; days 4, 11, 18 are Mondays
    const ranges = presetWeekday(0, 21 * DAY, 1);
    expect(ranges).toHaveLength(3);
    for (const [from, to] of ranges) {
      expect(new Date(from * 1000).getUTCDay()).toBe(1);
      expect(to - from).toBeLessThanOrEqual(DAY);
    }
  });

  it("months and years cut on UTC calendar boundaries", () => {
    const span = 69_400_000; // a bit over 803 days from the epoch
    const months = presetMonths(0, span);
    const years = presetYears(0, span);
    expect(years).toHaveLength(3); // 1970, 1971, part of 1972
    expect(months).toHaveLength(27); // 12 + 12 + Jan..Mar
    expect(years[1][0]).toBe(Date.UTC(1971, 0, 1) / 1000);
    expect(months[1][0]).toBe(Date.UTC(1970, 1, 1) / 1000);
  });
});

describe("reorder and alignment", () => {
  it("moves one thread and keeps the data untouched", () => {
    const original = ["a", "b", "c"];
    const moved = reorder(original, 0, 2);
    expect(moved).toEqual(["b", "c", "a"]);
    expect(original).toEqual(["a", "b", "c"]); // immutable
  });

  it("start anchoring maps every range to [0, length]", () => {
    const thread: TimelineThread = {
      label: "t",
      ranges: [
        [100, 200],
        [500, 650],
      ],
      layout: "horizontal",
    };
    expect(alignedDomains(thread, "absolute")).toEqual([
      [100, 200],
      [500, 650],
    ]);
    expect(alignedDomains(thread, "start")).toEqual([
      [0, 100],
      [0, 150],
    ]);
  });
});
