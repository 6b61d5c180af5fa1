// Incoming traffic is lime-green, outgoing orange; episodes sit on a light
// blue band. The alternate palette keeps the same roles with
// colorblind-safe hues (Okabe-Ito).

export interface Palette {
  name: string;
  incoming: string;
  outgoing: string;
  band: string;
  positive: string;
  negative: string;
  axis: string;
}

export const DEFAULT_PALETTE: Palette = {
  name: "default",
  incoming: "#9acd32",
  outgoing: "#ff8c00",
  band: "#add8e6",
  positive: "#2e8b57",
  negative: "#778899",
  axis: "#444444",
};

export const COLORBLIND_PALETTE: Palette = {
  name: "colorblind",
  incoming: "#0072b2",
  outgoing: "#e69f00",
  band: "#56b4e9",
  positive: "#009e73",
  negative: "#999999",
  axis: "#444444",
};

export function togglePalette(current: Palette): Palette {
  return current.name === "default" ? COLORBLIND_PALETTE : DEFAULT_PALETTE;
}
