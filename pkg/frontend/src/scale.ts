// Linear mappings between data coordinates and pixels.

export interface Scale {
  (t: number): number;
  invert(px: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1; // degenerate domain maps everything to r0
  const k = (r1 - r0) / span;
  const scale = ((t: number) => r0 + (t - d0) * k) as Scale;
  scale.invert = (px: number) => d0 + (px - r0) / k;
  scale.domain = [d0, d1];
  scale.range = [r0, r1];
  return scale;
}

// Initial view: the whole corpus on screen, widened so that density curves
// whose grids pad beyond the first/last event stay on screen too.
export function fitDomain(
  corpus: [number, number],
  gridExtents: Array<[number, number]>,
): [number, number] {
  let lo = corpus[0];
  let hi = corpus[1];
  for (const [a, b] of gridExtents) {
    lo = Math.min(lo, a);
    hi = Math.max(hi, b);
  }
  return [lo, hi];
}

export function fitToViewport(
  corpus: [number, number],
  gridExtents: Array<[number, number]>,
  widthPx: number,
): Scale {
  return linearScale(fitDomain(corpus, gridExtents), [0, widthPx]);
}

export function gridPoints(start: number, step: number, n: number): number[] {
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) out[i] = start + i * step;
  return out;
}
