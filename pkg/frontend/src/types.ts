/** Wire types mirroring the session service's JSON bodies. */

export interface ArcPoint {
  step: number;
  probs: number[];
  entropy: number;
  delta: number;
  utterance_text: string | null;
}

export interface NarrativeArc {
  labels: string[];
  points: ArcPoint[];
}

export type Mode = "reveal" | "conceal" | "neutral";

export interface SessionConfig {
  mode: Mode;
  alpha: number;
  max_score: number;
  max_samples: number;
  method: string;
  seed: number;
  turn_limit: number;
  labels: string[];
}

export interface CreateSessionResponse {
  session_id: string;
  config: SessionConfig;
}

export interface CandidateDiagnostic {
  text: string;
  q: number;
  delta: number;
  sigma: number;
  q_tilde: number;
}

export interface TurnResponse {
  response_text: string;
  arc_point: ArcPoint;
  pairs_done: number;
  turn_limit: number;
  candidate_diagnostics?: CandidateDiagnostic[];
}

export interface ChatLine {
  speaker: "you" | "system";
  text: string;
}
