import { describe, expect, it } from "vitest";

import { buildChart } from "../src/chart.js";
import { COLORBLIND_PALETTE, DEFAULT_PALETTE, togglePalette } from "../src/palette.js";
import { toSvg } from "../src/svg.js";
import { ProfileDoc } from "../src/types.js";

function miniProfile(fIn: number[], fOut: number[]): ProfileDoc {
  return {
    pair: ["a", "b"],
    grid: { start: 0, step: 1, n: fIn.length },
    params: { mu: 0, sigma: 1, h: 1 },
    n_in: 1,
    n_out: 1,
    f_in: fIn,
    f_out: fOut,
  };
}

describe("mirrored areas", () => {
  const profile = miniProfile([0, 1, 0], [0, 1, 0]);

  it("puts incoming above the axis and outgoing below (horizontal)", () => {
    const g = buildChart(profile, [], { width: 2, height: 100, layout: "horizontal" });
    expect(g.axisOffset).toBe(50);
    expect(g.inPath).toBe("M0,50L0,50L1,0L2,50L2,50Z");
    expect(g.outPath).toBe("M0,50L0,50L1,100L2,50L2,50Z");
  });

  it("swaps coordinates in the vertical layout", () => {
    const g = buildChart(profile, [], { width: 100, height: 2, layout: "vertical" });
    expect(g.axisOffset).toBe(50);
    expect(g.inPath).toBe("M50,0L50,0L0,1L50,2L50,2Z");
    expect(g.outPath).toBe("M50,0L50,0L100,1L50,2L50,2Z");
  });

  it("toggles layout from the same data, no refetch involved", () => {
    const episodes = [
      { pair: null, start: 0.5, end: 1.5, duration: 1, n_in: 1, n_out: 1, ref: "r1" },
    ];
    const h = buildChart(profile, episodes, { layout: "horizontal" });
    const v = buildChart(profile, episodes, { layout: "vertical" });
    expect(h.timeScale.invert(h.bands[0].a)).toBeCloseTo(0.5, 9);
    expect(v.timeScale.invert(v.bands[0].a)).toBeCloseTo(0.5, 9);
    expect(h.layout).toBe("horizontal");
    expect(v.layout).toBe("vertical");
  });
});

describe("degenerate inputs", () => {
  it("renders an axis and zero bands for a silent pair", () => {
    const g = buildChart(miniProfile([0, 0, 0], [0, 0, 0]), [], {
      width: 2,
      height: 100,
    });
    expect(g.peak).toBe(0);
    expect(g.bands).toHaveLength(0);
    expect(g.inPath).toBe("M0,50L0,50L1,50L2,50L2,50Z"); // flat on the axis
    const svg = toSvg(g);
    expect(svg).toContain('<line class="axis"');
    expect(svg).not.toContain('<rect class="band"');
  });
});

describe("palette", () => {
  it("toggle swaps colors without touching geometry", () => {
    const profile = miniProfile([0, 2, 0], [1, 0, 1]);
    const plain = buildChart(profile, [], { palette: DEFAULT_PALETTE });
    const alt = buildChart(profile, [], { palette: COLORBLIND_PALETTE });
    expect(alt.inPath).toBe(plain.inPath);
    expect(alt.outPath).toBe(plain.outPath);
    expect(alt.palette.incoming).not.toBe(plain.palette.incoming);
    expect(togglePalette(DEFAULT_PALETTE).name).toBe("colorblind");
    expect(togglePalette(COLORBLIND_PALETTE).name).toBe("default");
  });

  it("serializes band and path colors into the svg", () => {
    const profile = miniProfile([0, 1, 0], [0, 1, 0]);
    const episodes = [
      { pair: null, start: 0, end: 2, duration: 2, n_in: 1, n_out: 1, ref: "r1" },
    ];
    const svg = toSvg(buildChart(profile, episodes, {}));
    expect(svg).toContain(`fill="${DEFAULT_PALETTE.incoming}"`);
    expect(svg).toContain(`fill="${DEFAULT_PALETTE.outgoing}"`);
    expect(svg).toContain(`fill="${DEFAULT_PALETTE.band}"`);
    expect(svg).toContain('data-ref="r1"');
  });
});
