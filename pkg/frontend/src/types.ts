/**
 * Wire types mirroring the curation service JSON exactly; the client never
 * invents fields of its own.
 */

export type Channel = "caller" | "agent";
export type Scope = Channel | "both";

export interface CandidateView {
  id: string;
  channel: Channel;
  pattern: string;
  tokens: string[];
  frequency: number;
  kind: "full_utterance" | "substructure";
  sample_utterance_ids: string[];
  status: "pending" | "accepted" | "dismissed";
  correction: string | null;
}

export interface CandidatePage {
  items: CandidateView[];
  page: number;
  page_size: number;
  total: number;
}

export interface AcceptedRule {
  pattern: string;
  replacement: string;
  channel_scope: Scope;
  provenance: string;
}

export interface AcceptResponse {
  rule: AcceptedRule;
  candidate: CandidateView;
}

export interface RulesExport {
  rule_store: string;
  lm_additions: string[];
}

export interface ServiceStats {
  snapshot_id: string;
  pending: number;
  accepted: number;
  dismissed: number;
  rules: number;
}

export interface ApiError {
  code: string;
  message: string;
}
