// Geometry for one pair's mirrored density chart. Pure data in, pure data
// out: the DOM layer serializes the result to SVG, and the tests assert on
// the numbers directly. Incoming density is drawn on one side of the time
// axis, outgoing on the other; episodes are background bands spanning their
// server-reported intervals.

import { Palette, DEFAULT_PALETTE } from "./palette.js";
import { Scale, linearScale, gridPoints } from "./scale.js";
import { EpisodeDoc, ProfileDoc } from "./types.js";

export type Layout = "horizontal" | "vertical";

export interface OverlayEntry {
  label: "positive" | "negative";
  confidence: number;
}

// Episode ref -> latest prediction; minConfidence mirrors the confidence
// slider. Both come from the API untouched.
export interface Overlay {
  byRef: Map<string, OverlayEntry>;
  minConfidence: number | null;
}

export interface Band {
  ref: string | null;
  start: number; // data coordinates, exactly as served
  end: number;
  a: number; // pixels along the time axis
  b: number;
  fill: string;
  opacity: number;
  confidence: number | null;
  label: "positive" | "negative" | null;
  userLabel: "positive" | "negative" | null;
}

export interface ChartGeometry {
  layout: Layout;
  width: number;
  height: number;
  axisOffset: number; // pixels across the time axis (y for horizontal)
  timeScale: Scale;
  inPath: string;
  outPath: string;
  palette: Palette;
  bands: Band[];
  peak: number; // max sampled density, 0 for a silent pair
}

export interface ChartOptions {
  width?: number;
  height?: number;
  layout?: Layout;
  palette?: Palette;
  domain?: [number, number]; // defaults to the profile grid extent
  overlay?: Overlay | null;
  userLabels?: Map<string, "positive" | "negative"> | null;
}

export const FADED_OPACITY = 0.15;
export const PLAIN_BAND_OPACITY = 0.6;

// Opacity encodes the model's confidence verbatim; the slider fades
// everything below its floor instead of hiding it.
export function bandOpacity(confidence: number, minConfidence: number | null): number {
  if (minConfidence !== null && confidence < minConfidence) return FADED_OPACITY;
  return confidence;
}

function areaPath(
  times: number[],
  values: number[],
  timeScale: Scale,
  valuePx: (v: number) => number,
  layout: Layout,
): string {
  if (times.length === 0) return "";
  const pt = (t: number, v: number) => {
    const along = timeScale(t);
    const across = valuePx(v);
    return layout === "horizontal" ? `${along},${across}` : `${across},${along}`;
  };
  let d = `M${pt(times[0], 0)}`;
  for (let i = 0; i < times.length; i++) d += `L${pt(times[i], values[i])}`;
  d += `L${pt(times[times.length - 1], 0)}Z`;
  return d;
}

export function buildChart(
  profile: ProfileDoc,
  episodes: EpisodeDoc[],
  options: ChartOptions = {},
): ChartGeometry {
  const width = options.width ?? 960;
  const height = options.height ?? 220;
  const layout = options.layout ?? "horizontal";
  const palette = options.palette ?? DEFAULT_PALETTE;
  const overlay = options.overlay ?? null;
  const userLabels = options.userLabels ?? null;

  const grid = profile.grid;
  const end = grid.start + grid.step * (grid.n - 1);
  const domain = options.domain ?? ([grid.start, end] as [number, number]);

  const axisLength = layout === "horizontal" ? width : height;
  const crossLength = layout === "horizontal" ? height : width;
  const timeScale = linearScale(domain, [0, axisLength]);
  const axisOffset = crossLength / 2;

  const peak = Math.max(0, ...profile.f_in, ...profile.f_out);
  const half = crossLength / 2;
  const k = peak > 0 ? half / peak : 0;
  // incoming rises toward the top (smaller px) in horizontal layout and
  // toward the left in vertical; outgoing mirrors it
  const inPx = (v: number) => axisOffset - v * k;
  const outPx = (v: number) => axisOffset + v * k;

  const times = gridPoints(grid.start, grid.step, grid.n);
  const inPath = areaPath(times, profile.f_in, timeScale, inPx, layout);
  const outPath = areaPath(times, profile.f_out, timeScale, outPx, layout);

  const bands: Band[] = episodes.map((ep) => {
    const entry = ep.ref && overlay ? overlay.byRef.get(ep.ref) : undefined;
    const userLabel = (ep.ref && userLabels?.get(ep.ref)) || null;
    let fill = palette.band;
    let opacity = PLAIN_BAND_OPACITY;
    if (entry) {
      fill = entry.label === "positive" ? palette.positive : palette.negative;
      opacity = bandOpacity(entry.confidence, overlay?.minConfidence ?? null);
    }
    return {
      ref: ep.ref,
      start: ep.start,
      end: ep.end,
      a: timeScale(ep.start),
      b: timeScale(ep.end),
      fill,
      opacity,
      confidence: entry ? entry.confidence : null,
      label: entry ? entry.label : null,
      userLabel,
    };
  });

  return {
    layout,
    width,
    height,
    axisOffset,
    timeScale,
    inPath,
    outPath,
    palette,
    bands,
    peak,
  };
}
