// Serialize chart geometry to an SVG string. Kept separate from the
// geometry so tests can assert on numbers without parsing markup.

import { ChartGeometry } from "./chart.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

export function toSvg(g: ChartGeometry, title = ""): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${g.width} ${g.height}" ` +
      `width="${g.width}" height="${g.height}" class="chart ${g.layout}">`,
  );
  if (title) parts.push(`<title>${esc(title)}</title>`);

  for (const band of g.bands) {
    const lo = Math.min(band.a, band.b);
    const len = Math.abs(band.b - band.a);
    const rect =
      g.layout === "horizontal"
        ? `x="${lo}" y="0" width="${len}" height="${g.height}"`
        : `x="0" y="${lo}" width="${g.width}" height="${len}"`;
    const ref = band.ref ? ` data-ref="${esc(band.ref)}"` : "";
    const mark = band.userLabel ? ` data-user-label="${band.userLabel}"` : "";
    parts.push(
      `<rect class="band" ${rect} fill="${band.fill}" ` +
        `fill-opacity="${band.opacity}"${ref}${mark}/>`,
    );
  }

  const axis =
    g.layout === "horizontal"
      ? `x1="0" y1="${g.axisOffset}" x2="${g.width}" y2="${g.axisOffset}"`
      : `x1="${g.axisOffset}" y1="0" x2="${g.axisOffset}" y2="${g.height}"`;
  parts.push(`<line class="axis" ${axis} stroke="${g.palette.axis}"/>`);

  if (g.inPath) {
    parts.push(`<path class="in" d="${g.inPath}" fill="${g.palette.incoming}"/>`);
  }
  if (g.outPath) {
    parts.push(`<path class="out" d="${g.outPath}" fill="${g.palette.outgoing}"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
