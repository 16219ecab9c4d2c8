/** Pure chart geometry for the arc view: a stacked area of per-universe
 * probabilities over steps, an entropy trace, and per-step hover data.
 * Everything is a function of the arc, so snapshots compare directly
 * against the service's arc JSON.
 */

import type { ArcPoint, NarrativeArc } from "./types.js";

export interface ChartData {
  labels: string[];
  /** One entry per arc point, fields copied verbatim from the arc. */
  points: ArcPoint[];
  /** stacked[u][i] = sum of probs[0..u] at point i (upper band edges). */
  stacked: number[][];
  maxEntropy: number;
}

export function chartData(arc: NarrativeArc): ChartData {
  const n = arc.labels.length;
  const stacked: number[][] = [];
  for (let u = 0; u < n; u++) {
    stacked.push(
      arc.points.map((p) =>
        p.probs.slice(0, u + 1).reduce((acc, x) => acc + x, 0),
      ),
    );
  }
  return {
    labels: [...arc.labels],
    points: arc.points.map((p) => ({ ...p })),
    stacked,
    maxEntropy: Math.log(n),
  };
}

/** X pixel positions, one per arc point. A single point spans the full
 * width (rendered as flat bands). */
export function xPositions(count: number, width: number): number[] {
  if (count === 1) return [0];
  const step = width / (count - 1);
  return Array.from({ length: count }, (_, i) => i * step);
}

function pathFrom(coords: Array<[number, number]>): string {
  return coords
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
    .join(" ");
}

/** One closed SVG path per universe, bottom band first. */
export function stackedAreaPaths(data: ChartData, width: number, height: number): string[] {
  const n = data.points.length;
  const xs = n === 1 ? [0, width] : xPositions(n, width);
  const rows = data.stacked.map((upper) => (n === 1 ? [upper[0]!, upper[0]!] : upper));
  const paths: string[] = [];
  for (let u = 0; u < rows.length; u++) {
    const upper = rows[u]!;
    const lower = u === 0 ? upper.map(() => 0) : rows[u - 1]!;
    const top: Array<[number, number]> = upper.map((v, i) => [xs[i]!, height * (1 - v)]);
    const bottom: Array<[number, number]> = lower
      .map((v, i): [number, number] => [xs[i]!, height * (1 - v)])
      .reverse();
    paths.push(`${pathFrom(top)} ${pathFrom(bottom).replace(/^M/, "L")} Z`);
  }
  return paths;
}

/** Entropy polyline, scaled so ln(universe count) is the top of the chart. */
export function entropyPath(data: ChartData, width: number, height: number): string {
  const n = data.points.length;
  const xs = n === 1 ? [0, width] : xPositions(n, width);
  const values = data.points.map((p) => p.entropy);
  const row = n === 1 ? [values[0]!, values[0]!] : values;
  const coords: Array<[number, number]> = row.map((h, i) => [
    xs[i]!,
    height * (1 - h / data.maxEntropy),
  ]);
  return pathFrom(coords);
}

export interface HoverInfo {
  step: number;
  delta: number;
  entropy: number;
  utteranceText: string | null;
  shares: Array<{ label: string; prob: number }>;
}

/** Hover payload for the point nearest pixel x. */
export function hoverInfo(data: ChartData, x: number, width: number): HoverInfo {
  const n = data.points.length;
  const index =
    n === 1 ? 0 : Math.min(n - 1, Math.max(0, Math.round((x / width) * (n - 1))));
  const point = data.points[index]!;
  return {
    step: point.step,
    delta: point.delta,
    entropy: point.entropy,
    utteranceText: point.utterance_text,
    shares: data.labels.map((label, u) => ({ label, prob: point.probs[u]! })),
  };
}
