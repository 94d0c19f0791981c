// Mirrors of the service payloads. The client renders these verbatim and
// never derives game values of its own.

export interface InterventionView {
  recommended: "Solo" | "Call";
  feature: string;
  text: string;
}

export interface Positions {
  agent: [number, number];
  team: [number, number];
}

export interface View {
  session_id: string;
  trial: number;
  training: boolean;
  score: number;
  bombs_remaining: number;
  bombs_handled: number;
  time_remaining: number;
  bomb_type: number | null;
  distance_bin: number | null;
  positions: Positions | null;
  payoff: Record<string, number> | null;
  intervention: InterventionView | null;
  tip: string | null;
  grid_size: number;
  done: boolean;
}

export interface CreateSessionResponse {
  session_id: string;
  view: View;
}

export interface ActionResponse {
  reward: number;
  time_cost: number;
  done: boolean;
  next_view: View;
}

export type ActionName = "Solo" | "Call";
