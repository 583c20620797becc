// Payload shapes of the knowledge-navigator HTTP API.

export interface SuggestionChip {
  node_id: string;
  reason: string;
}

export interface Alternate {
  node_id: string;
  score: number;
  matched_terms: string[];
}

export interface Refinement {
  message: string;
  discriminating_terms: string[];
}

export interface AnswerPayload {
  primary_node: string | null;
  snippet: string;
  alternates: Alternate[];
  suggestions: SuggestionChip[];
  refinement: Refinement | null;
}

export interface AskResponse {
  session_id: string;
  state: string;
  answer: AnswerPayload;
}

export interface NodeChild {
  id: string;
  title: string;
  type: string;
}

export interface NodePayload {
  id: string;
  title: string;
  type: string;
  body: string;
  keywords: string[];
  parent: string | null;
  children: NodeChild[];
  related: string[];
  media: string[];
}

export interface TreeNode {
  id: string;
  title: string;
  type: string;
  children: TreeNode[];
}

export interface EventResponse {
  session_id: string;
  state: string;
  current_node: string | null;
}

export interface UsageReport {
  node_query_counts: Record<string, number>;
  session_question_counts: Record<string, number>;
  top_procedures: { node_id: string; count: number }[];
}

export interface HealthPayload {
  status: string;
  corpus_version: number;
  doc_count: number;
  api_version: number;
}
