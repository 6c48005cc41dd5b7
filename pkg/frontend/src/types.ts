/** Wire types mirroring the service JSON schemas. */

export interface AgentWeights {
  Conv: number;
  Pref: number;
  Ctx: number;
  Rank: number;
}

export type TierName = "Rapid" | "Reasoning" | "DeepCollab";

export interface TierInfo {
  tier: TierName;
  cache_hit: boolean;
  complexity: number;
  components: {
    history_length: number;
    profile_incompleteness: number;
    ambiguity: number;
  };
}

export interface RankedEntry {
  item_id: string;
  name: string;
  score: number;
}

export interface MessageResponse {
  session_id: string;
  turn_index: number;
  ranked: RankedEntry[];
  weights: AgentWeights;
  tier: TierInfo;
  explanation: Record<string, AgentWeights>;
  work_units: number;
}

export interface ProfileState {
  weights: number[];
  confidence: number[];
  coverage: number;
}

export interface StateResponse {
  session_id: string;
  turn_index: number;
  profile: ProfileState;
  weights: AgentWeights | null;
  last_tier: TierInfo | null;
  coordinator_baseline: number;
}

export interface RatingPayload {
  item_id: string;
  value: number;
}

export interface FeedbackPayload {
  liked_items: string[];
  disliked_items: string[];
  clicks: string[];
  dwell_ms: Record<string, number>;
  rating?: RatingPayload;
}

export interface ContextPayload {
  time_bucket?: "Morning" | "Afternoon" | "Evening" | "Night";
  location?: "Home" | "Work" | "Transit" | "Other";
  social?: "Alone" | "WithFriends" | "WithFamily";
  mood?: number;
}

export const AGENT_NAMES: (keyof AgentWeights)[] = ["Conv", "Pref", "Ctx", "Rank"];
