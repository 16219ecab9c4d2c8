/** UI session state and its pure transitions.
 *
 * The arc always mirrors the service: after every turn the full arc is
 * re-fetched, so a refresh reconciles exactly. Invariants: arc length is
 * transcript length + 1 once a session exists, and at most one turn is in
 * flight at a time.
 */

import type { ArcPoint, ChatLine, NarrativeArc, SessionConfig } from "./types.js";

export interface UiSessionState {
  sessionId: string | null;
  config: SessionConfig | null;
  labels: string[];
  transcript: ChatLine[];
  arc: ArcPoint[];
  pending: boolean;
  sceneComplete: boolean;
  error: string | null;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    config: null,
    labels: [],
    transcript: [],
    arc: [],
    pending: false,
    sceneComplete: false,
    error: null,
  };
}

export function canSend(state: UiSessionState, text: string): boolean {
  return (
    state.sessionId !== null &&
    !state.pending &&
    !state.sceneComplete &&
    text.trim().length > 0
  );
}

export function sessionStarted(
  _state: UiSessionState,
  sessionId: string,
  config: SessionConfig,
  arc: NarrativeArc,
): UiSessionState {
  return {
    sessionId,
    config,
    labels: arc.labels,
    transcript: [],
    arc: arc.points,
    pending: false,
    sceneComplete: false,
    error: null,
  };
}

export function turnRequested(state: UiSessionState): UiSessionState {
  return { ...state, pending: true, error: null };
}

/** A completed exchange: the human line, the system reply, and the
 * authoritative arc re-fetched from the service. */
export function turnCompleted(
  state: UiSessionState,
  humanText: string,
  responseText: string,
  arc: NarrativeArc,
  pairsDone: number,
  turnLimit: number,
): UiSessionState {
  const transcript: ChatLine[] = [
    ...state.transcript,
    { speaker: "you", text: humanText },
    { speaker: "system", text: responseText },
  ];
  return {
    ...state,
    transcript,
    arc: arc.points,
    pending: false,
    sceneComplete: pairsDone >= turnLimit,
    error: null,
  };
}

export function sceneCompleted(state: UiSessionState): UiSessionState {
  return { ...state, pending: false, sceneComplete: true };
}

export function failed(state: UiSessionState, message: string): UiSessionState {
  return { ...state, pending: false, error: message };
}

/** Both invariants the rendering relies on; checked in tests and usable as
 * a runtime assertion. */
export function isConsistent(state: UiSessionState): boolean {
  if (state.sessionId === null) return state.transcript.length === 0 && state.arc.length === 0;
  return state.arc.length === state.transcript.length + 1;
}
