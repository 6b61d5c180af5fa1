// Semantic zoom: each level ties the smoothing bandwidth to a fraction of
// the viewed range. The arithmetic must match the server's zoom table so a
// level change can be expressed as plain query parameters.

export interface ZoomLevelDef {
  name: string;
  rangeFraction: number;
}

export const ZOOM_LEVELS: Record<string, ZoomLevelDef> = {
  coarse: { name: "coarse", rangeFraction: 1 / 50 },
  medium: { name: "medium", rangeFraction: 1 / 200 },
  fine: { name: "fine", rangeFraction: 1 / 1000 },
};

export const ZOOM_ORDER = ["coarse", "medium", "fine"] as const;

export function bandwidthFor(level: ZoomLevelDef, viewRange: number): number {
  if (!(viewRange > 0)) throw new Error(`view range must be positive, got ${viewRange}`);
  return level.rangeFraction * viewRange;
}
