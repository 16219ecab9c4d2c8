/** Browser entry point: wires the API client, state transitions, and
 * renderers to the DOM. All randomness lives server-side. */

import { ApiClient, SceneCompleteError } from "./api.js";
import {
  canSend,
  failed,
  initialState,
  sceneCompleted,
  sessionStarted,
  turnCompleted,
  turnRequested,
  type UiSessionState,
} from "./state.js";
import { hoverInfo, chartData } from "./chart.js";
import { renderArcSvg, renderLegend, renderStatus, renderTranscript } from "./render.js";
import type { Mode } from "./types.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("service") ?? "http://127.0.0.1:8722");

let state: UiSessionState = initialState();

const el = (id: string) => document.getElementById(id)!;

function paint(): void {
  el("transcript").innerHTML = renderTranscript(state);
  el("chart").innerHTML = renderArcSvg(state);
  el("legend").innerHTML = renderLegend(state);
  el("status").textContent = renderStatus(state);
  const input = el("line-input") as HTMLInputElement;
  input.disabled = state.pending || state.sceneComplete || !state.sessionId;
  (el("send") as HTMLButtonElement).disabled = input.disabled;
  el("transcript").scrollTop = el("transcript").scrollHeight;
}

async function startSession(): Promise<void> {
  const mode = (el("mode") as HTMLSelectElement).value as Mode;
  const alphaRaw = (el("alpha") as HTMLInputElement).value.trim();
  try {
    const options = alphaRaw === "" ? { mode } : { mode, alpha: Number(alphaRaw) };
    const created = await api.startSession(options);
    const arc = await api.getArc(created.session_id);
    state = sessionStarted(state, created.session_id, created.config, arc);
    (el("alpha") as HTMLInputElement).value = String(created.config.alpha);
  } catch (err) {
    state = failed(state, err instanceof Error ? err.message : String(err));
  }
  paint();
}

async function sendLine(): Promise<void> {
  const input = el("line-input") as HTMLInputElement;
  const text = input.value.trim();
  if (!canSend(state, text)) return;
  state = turnRequested(state);
  paint();
  try {
    const turn = await api.sendUtterance(state.sessionId!, text);
    const arc = await api.getArc(state.sessionId!);
    state = turnCompleted(state, text, turn.response_text, arc, turn.pairs_done, turn.turn_limit);
    input.value = "";
  } catch (err) {
    if (err instanceof SceneCompleteError) {
      state = sceneCompleted(state);
    } else {
      state = failed(state, err instanceof Error ? err.message : String(err));
    }
  }
  paint();
}

function onHover(event: MouseEvent): void {
  if (state.arc.length === 0) return;
  const box = el("chart").getBoundingClientRect();
  const info = hoverInfo(
    chartData({ labels: state.labels, points: state.arc }),
    event.clientX - box.left,
    box.width,
  );
  const line = info.utteranceText ? ` "${info.utteranceText}"` : "";
  el("hover").textContent =
    `step ${info.step}: H=${info.entropy.toFixed(3)} delta=${info.delta >= 0 ? "+" : ""}` +
    `${info.delta.toFixed(3)}${line}`;
}

el("start").addEventListener("click", () => void startSession());
el("send").addEventListener("click", () => void sendLine());
el("line-input").addEventListener("keydown", (event) => {
  if ((event as KeyboardEvent).key === "Enter") void sendLine();
});
el("chart").addEventListener("mousemove", (event) => onHover(event as MouseEvent));
el("mode").addEventListener("change", () => {
  (el("alpha") as HTMLInputElement).value = "";
});

paint();
