// Client-side mirror of the server session state machine. The console
// checks this table before sending any event, so it never issues one the
// server would reject.

export type Phase =
  | "Idle"
  | "QuestionPending"
  | "AnswerDelivered"
  | "ContentViewing"
  | "ManualSearch"
  | "Ended";

export type EventKind =
  | "AskQuestion"
  | "AnswerReady"
  | "OpenContent"
  | "FollowSuggestion"
  | "TypeKeywords"
  | "Back"
  | "EndSession";

const PHASES: Phase[] = [
  "Idle",
  "QuestionPending",
  "AnswerDelivered",
  "ContentViewing",
  "ManualSearch",
  "Ended",
];

const ROWS: [Phase, EventKind, Phase][] = [
  ["Idle", "AskQuestion", "QuestionPending"],
  ["QuestionPending", "AnswerReady", "AnswerDelivered"],
  ["AnswerDelivered", "OpenContent", "ContentViewing"],
  ["AnswerDelivered", "FollowSuggestion", "ContentViewing"],
  ["AnswerDelivered", "TypeKeywords", "ManualSearch"],
  ["AnswerDelivered", "AskQuestion", "QuestionPending"],
  ["ContentViewing", "Back", "AnswerDelivered"],
  ["ContentViewing", "AskQuestion", "QuestionPending"],
  ["ManualSearch", "AnswerReady", "AnswerDelivered"],
  ["ManualSearch", "AskQuestion", "QuestionPending"],
];

const TABLE = new Map<string, Phase>();
for (const [from, kind, to] of ROWS) {
  TABLE.set(`${from}|${kind}`, to);
}
for (const phase of PHASES) {
  TABLE.set(`${phase}|EndSession`, "Ended");
}

export function nextPhase(phase: Phase, kind: EventKind): Phase | null {
  return TABLE.get(`${phase}|${kind}`) ?? null;
}

export function canSend(phase: Phase, kind: EventKind): boolean {
  return TABLE.has(`${phase}|${kind}`);
}

export function transitionRows(): [Phase, EventKind, Phase][] {
  return [...TABLE.entries()].map(([key, to]) => {
    const [from, kind] = key.split("|") as [Phase, EventKind];
    return [from, kind, to];
  });
}
