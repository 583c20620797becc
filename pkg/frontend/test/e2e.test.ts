// End-to-end: the console against the live Python service spawned by the
// global setup. Telemetry assertions read the service's log file directly.
import { readFileSync, writeFileSync } from "node:fs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Console } from "../src/app.js";
import { renderApp } from "../src/views.js";
import { SERVER_INFO_PATH } from "./global-setup.js";

interface ServerInfo {
  baseUrl: string;
  telemetryPath: string;
  corpusPath: string;
  originalCorpus: string;
}

let info: ServerInfo;
let api: ApiClient;

beforeAll(() => {
  info = JSON.parse(readFileSync(SERVER_INFO_PATH, "utf-8"));
  api = new ApiClient(info.baseUrl);
});

function telemetryEvents(): { ts: number; session: string; kind: string; payload: string }[] {
  try {
    return readFileSync(info.telemetryPath, "utf-8")
      .split("\n")
      .filter((line) => line.trim())
      .map((line) => JSON.parse(line));
  } catch {
    return [];
  }
}

describe("chat flow against the live service", () => {
  it("renders an answer with suggestion chips", async () => {
    const console_ = new Console(api, "e2e-chat");
    await console_.submitQuestion("how do I check chuck pressure");
    const turn = console_.state.transcript[0];
    expect(turn.status).toBe("answered");
    expect(turn.answer?.primary_node).toBe("chuck-pressure");
    expect(turn.answer!.suggestions.length).toBeGreaterThanOrEqual(1);
    expect(turn.answer!.suggestions.length).toBeLessThanOrEqual(5);
    const html = renderApp(console_.state);
    expect(html).toContain("Check the chuck pressure");
    expect(html).toContain('data-action="follow"');
    expect(html).toContain("Hydraulic Pressure");
  });

  it("follows a chip into NodeView and logs OpenContent server-side", async () => {
    const console_ = new Console(api, "e2e-follow");
    await console_.submitQuestion("how do I check chuck pressure");
    const chip = console_.state.transcript[0].answer!.suggestions[0];
    const opened = await console_.followSuggestion(chip.node_id);
    expect(opened).toBe(true);
    expect(console_.state.view).toBe("NodeView");
    expect(console_.state.phase).toBe("ContentViewing");
    const html = renderApp(console_.state);
    expect(html).toContain('class="node-view"');
    expect(html).toContain('data-action="back"');

    const events = telemetryEvents().filter((e) => e.session === "e2e-follow");
    expect(events.map((e) => e.kind)).toEqual([
      "AskQuestion",
      "AnswerReady",
      "OpenContent",
    ]);
    expect(events[2].payload).toBe(chip.node_id);

    await console_.back();
    expect(console_.state.view).toBe("Chat");
    expect(console_.state.phase).toBe("AnswerDelivered");
    expect(console_.state.transcript).toHaveLength(1);
  });

  it("keeps asking legal after viewing content (no 409s across the flow)", async () => {
    const console_ = new Console(api, "e2e-followup");
    await console_.submitQuestion("lubrication warning");
    await console_.submitQuestion("clean the filter");
    expect(
      console_.state.transcript.every((turn) => turn.status === "answered"),
    ).toBe(true);
    const chip = console_.state.transcript[1].answer!.suggestions[0];
    await console_.followSuggestion(chip.node_id);
    await console_.back();
    await console_.submitQuestion("swarf handling");
    expect(console_.state.transcript[2].status).toBe("answered");
  });

  it("shows the refinement banner for an over-broad question", async () => {
    const console_ = new Console(api, "e2e-broad");
    await console_.submitQuestion("machine check system");
    const answer = console_.state.transcript[0].answer!;
    if (answer.refinement) {
      const html = renderApp(console_.state);
      expect(html).toContain("refinement-banner");
    }
    expect(console_.state.transcript[0].status).toBe("answered");
  });
});

describe("tree browser against the live service", () => {
  it("renders the corpus hierarchy with type badges", async () => {
    const console_ = new Console(api, "e2e-tree");
    await console_.showTree();
    expect(console_.state.view).toBe("TreeBrowser");
    expect(console_.state.tree!.children.length).toBeGreaterThanOrEqual(3);
    const types = new Set(console_.state.tree!.children.map((c) => c.type));
    expect(types.has("safety")).toBe(true);
    expect(types.has("operation")).toBe(true);
    expect(types.has("maintenance")).toBe(true);
    const html = renderApp(console_.state);
    expect(html).toContain('class="tree"');
    expect(html).toContain("Safety");
    expect(html).toContain("Maintenance");
  });

  it("collapses and expands branches", async () => {
    const console_ = new Console(api, "e2e-tree2");
    await console_.showTree();
    const expanded = renderApp(console_.state);
    expect(expanded).toContain("Chuck pressure");
    console_.toggleBranch("maintenance");
    const collapsed = renderApp(console_.state);
    expect(collapsed).not.toContain("Chuck pressure");
    console_.toggleBranch("maintenance");
    expect(renderApp(console_.state)).toContain("Chuck pressure");
  });

  it("opens a node from the tree", async () => {
    const console_ = new Console(api, "e2e-tree3");
    await console_.showTree();
    await console_.openNode("lubricate-way-covers");
    expect(console_.state.view).toBe("NodeView");
    expect(renderApp(console_.state)).toContain("Lubricate way covers");
  });
});

describe("analytics view against the live service", () => {
  it("renders usage aggregated from this run's questions", async () => {
    const console_ = new Console(api, "e2e-usage");
    await console_.submitQuestion("chuck pressure");
    await console_.showAnalytics();
    expect(console_.state.view).toBe("Analytics");
    expect(console_.state.usage!.session_question_counts["e2e-usage"]).toBe(1);
    const html = renderApp(console_.state);
    expect(html).toContain("Most queried procedures");
    expect(html).toContain("Chuck Pressure");
  });
});

describe("corpus reload between render and click", () => {
  afterAll(async () => {
    writeFileSync(info.corpusPath, readFileSync(info.originalCorpus, "utf-8"));
    await fetch(`${info.baseUrl}/admin/reload`, { method: "POST" });
  });

  it("marks a chip for a deleted node inline, transcript preserved", async () => {
    const console_ = new Console(api, "e2e-stale");
    await console_.submitQuestion("quality control inspection");
    const answer = console_.state.transcript[0].answer!;
    const stale = "first-piece-approval";
    const chipIds = answer.suggestions.map((chip) => chip.node_id);
    expect(chipIds).toContain(stale);

    const original = readFileSync(info.originalCorpus, "utf-8");
    const start = original.indexOf(`<node id="${stale}"`);
    const end = original.indexOf("</node>", start) + "</node>".length;
    expect(start).toBeGreaterThan(0);
    writeFileSync(info.corpusPath, original.slice(0, start) + original.slice(end));
    const reload = await fetch(`${info.baseUrl}/admin/reload`, { method: "POST" });
    expect(reload.ok).toBe(true);

    const opened = await console_.followSuggestion(stale);
    expect(opened).toBe(false);
    expect(console_.state.chipErrors.has(stale)).toBe(true);
    expect(console_.state.view).toBe("Chat");
    expect(console_.state.transcript).toHaveLength(1);
    expect(renderApp(console_.state)).toContain("(not found)");
  });
});
