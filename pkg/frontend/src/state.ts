import type { Phase } from "./fsm.js";
import type { AnswerPayload, NodePayload, TreeNode, UsageReport } from "./types.js";

export type View = "Chat" | "NodeView" | "TreeBrowser" | "Analytics";

export type TurnStatus = "pending" | "answered" | "failed";

export interface TranscriptTurn {
  question: string;
  status: TurnStatus;
  answer?: AnswerPayload;
  error?: string;
}

export interface ConsoleState {
  sessionId: string;
  phase: Phase;
  view: View;
  transcript: TranscriptTurn[];
  pending: boolean;
  queued: string | null;
  currentNode: NodePayload | null;
  tree: TreeNode | null;
  collapsed: Set<string>;
  usage: UsageReport | null;
  notice: string | null;
  sessionEnded: boolean;
  chipErrors: Set<string>;
}

export function initialState(sessionId: string): ConsoleState {
  return {
    sessionId,
    phase: "Idle",
    view: "Chat",
    transcript: [],
    pending: false,
    queued: null,
    currentNode: null,
    tree: null,
    collapsed: new Set(),
    usage: null,
    notice: null,
    sessionEnded: false,
    chipErrors: new Set(),
  };
}

export function lastAnswer(state: ConsoleState): AnswerPayload | null {
  for (let i = state.transcript.length - 1; i >= 0; i--) {
    const turn = state.transcript[i];
    if (turn.status === "answered" && turn.answer) {
      return turn.answer;
    }
  }
  return null;
}
