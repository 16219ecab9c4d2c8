/** HTML/SVG rendering as pure functions of the UI state. */

import { chartData, entropyPath, stackedAreaPaths } from "./chart.js";
import type { UiSessionState } from "./state.js";

const BAND_COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
                     "#76b7b2", "#edc948", "#ff9da7"];

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTranscript(state: UiSessionState): string {
  if (state.transcript.length === 0) {
    return '<p class="empty">No lines yet. Say something to open the scene.</p>';
  }
  const rows = state.transcript.map(
    (line) =>
      `<div class="line ${line.speaker}"><span class="speaker">${line.speaker}</span>` +
      `<span class="text">${escapeHtml(line.text)}</span></div>`,
  );
  return rows.join("\n");
}

export function renderArcSvg(state: UiSessionState, width = 640, height = 240): string {
  if (state.arc.length === 0) return "<svg></svg>";
  const data = chartData({ labels: state.labels, points: state.arc });
  const bands = stackedAreaPaths(data, width, height)
    .map(
      (d, u) =>
        `<path class="band" data-label="${escapeHtml(data.labels[u] ?? "")}" ` +
        `d="${d}" fill="${BAND_COLORS[u % BAND_COLORS.length]}" fill-opacity="0.75"/>`,
    )
    .join("\n");
  const entropy = `<path class="entropy" d="${entropyPath(data, width, height)}" ` +
    `fill="none" stroke="#222" stroke-width="2" stroke-dasharray="5,3"/>`;
  return (
    `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}" ` +
    `role="img" aria-label="narrative arc">\n${bands}\n${entropy}\n</svg>`
  );
}

export function renderLegend(state: UiSessionState): string {
  return state.labels
    .map(
      (label, u) =>
        `<span class="legend-item"><span class="swatch" ` +
        `style="background:${BAND_COLORS[u % BAND_COLORS.length]}"></span>${escapeHtml(label)}</span>`,
    )
    .join(" ");
}

export function renderStatus(state: UiSessionState): string {
  if (state.error) return `error: ${escapeHtml(state.error)}`;
  if (!state.sessionId) return "no session";
  const cfg = state.config;
  const head = cfg ? `${cfg.mode} (alpha=${cfg.alpha})` : "session";
  const turns = `${Math.floor(state.transcript.length / 2)}/${cfg?.turn_limit ?? "?"} pairs`;
  if (state.sceneComplete) return `${head} - scene complete (${turns})`;
  if (state.pending) return `${head} - thinking... (${turns})`;
  return `${head} - your line (${turns})`;
}
