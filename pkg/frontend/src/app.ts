import { ApiClient, ApiError } from "./api.js";
import { canSend, nextPhase } from "./fsm.js";
import {
  initialState,
  lastAnswer,
  type ConsoleState,
  type TranscriptTurn,
} from "./state.js";

// Controller for the operator console. Holds all state and talks to the
// service; rendering is left to pure view functions so the whole flow is
// testable without a DOM. One ask may be in flight per session; a question
// submitted meanwhile is queued and fired when the current one resolves.
export class Console {
  state: ConsoleState;
  private askCounter = 0;

  constructor(
    private api: ApiClient,
    sessionId: string = `console-${Date.now().toString(36)}`,
    private onChange: (state: ConsoleState) => void = () => {},
  ) {
    this.state = initialState(sessionId);
  }

  private changed(): void {
    this.onChange(this.state);
  }

  async submitQuestion(text: string): Promise<boolean> {
    const question = text.trim();
    if (!question || this.state.sessionEnded) {
      return false;
    }
    if (this.state.pending) {
      this.state.queued = question; // single-flight: latest waits its turn
      this.changed();
      return true;
    }
    if (!canSend(this.state.phase, "AskQuestion")) {
      this.state.notice = `cannot ask right now (state ${this.state.phase})`;
      this.changed();
      return false;
    }

    const turn: TranscriptTurn = { question, status: "pending" };
    this.state.transcript.push(turn);
    this.state.pending = true;
    this.state.notice = null;
    this.state.view = "Chat";
    this.changed();

    try {
      const response = await this.api.ask(
        this.state.sessionId,
        question,
        this.askCounter++,
      );
      turn.status = "answered";
      turn.answer = response.answer;
      this.state.phase = response.state as ConsoleState["phase"];
      this.state.chipErrors = new Set();
    } catch (err) {
      turn.status = "failed";
      turn.error = err instanceof Error ? err.message : String(err);
      if (err instanceof ApiError && err.status === 409) {
        this.state.sessionEnded = true;
        this.state.notice = "This session has ended.";
      } else {
        this.state.notice = "Request failed; you can retry.";
      }
    } finally {
      this.state.pending = false;
      this.changed();
    }

    const queued = this.state.queued;
    this.state.queued = null;
    if (queued && !this.state.sessionEnded) {
      await this.submitQuestion(queued);
    }
    return true;
  }

  async followSuggestion(nodeId: string): Promise<boolean> {
    const answer = lastAnswer(this.state);
    const known = answer?.suggestions.some((chip) => chip.node_id === nodeId);
    if (!known || !canSend(this.state.phase, "OpenContent")) {
      return false;
    }
    try {
      await this.api.sendEvent(this.state.sessionId, "OpenContent", nodeId);
      this.state.phase = nextPhase(this.state.phase, "OpenContent")!;
      this.state.currentNode = await this.api.node(nodeId);
      this.state.view = "NodeView";
      this.changed();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.state.chipErrors.add(nodeId); // inline not-found on the chip
      } else {
        this.state.notice = "Could not open the resource; you can retry.";
      }
      this.changed();
      return false;
    }
  }

  async openNode(nodeId: string): Promise<boolean> {
    try {
      const node = await this.api.node(nodeId);
      this.state.currentNode = node;
      this.state.view = "NodeView";
      this.changed();
      return true;
    } catch {
      this.state.notice = `Resource ${nodeId} was not found.`;
      this.changed();
      return false;
    }
  }

  async back(): Promise<void> {
    if (this.state.phase === "ContentViewing" && canSend(this.state.phase, "Back")) {
      try {
        await this.api.sendEvent(this.state.sessionId, "Back");
        this.state.phase = nextPhase(this.state.phase, "Back")!;
      } catch {
        // view navigation still proceeds; the server keeps its own state
      }
    }
    this.state.currentNode = null;
    this.state.view = "Chat";
    this.changed();
  }

  async showTree(): Promise<void> {
    try {
      this.state.tree = await this.api.tree();
      this.state.view = "TreeBrowser";
    } catch {
      this.state.notice = "Could not load the knowledge tree; retry.";
    }
    this.changed();
  }

  toggleBranch(nodeId: string): void {
    if (this.state.collapsed.has(nodeId)) {
      this.state.collapsed.delete(nodeId);
    } else {
      this.state.collapsed.add(nodeId);
    }
    this.changed();
  }

  async showAnalytics(): Promise<void> {
    try {
      this.state.usage = await this.api.usage();
      this.state.view = "Analytics";
    } catch {
      this.state.notice = "Could not load usage analytics; retry.";
    }
    this.changed();
  }

  showChat(): void {
    this.state.view = "Chat";
    this.changed();
  }

  async endSession(): Promise<void> {
    try {
      await this.api.sendEvent(this.state.sessionId, "EndSession");
    } finally {
      this.state.phase = "Ended";
      this.state.sessionEnded = true;
      this.state.notice = "This session has ended.";
      this.changed();
    }
  }

  restartSession(): void {
    const fresh = initialState(`${this.state.sessionId}-r${Date.now().toString(36)}`);
    fresh.transcript = this.state.transcript; // history stays readable
    this.state = fresh;
    this.changed();
  }
}
