import type { ConsoleState, TranscriptTurn } from "./state.js";
import type { AnswerPayload, NodePayload, TreeNode, UsageReport } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function chipLabel(nodeId: string): string {
  return nodeId
    .split("-")
    .map((part) => (part ? part[0].toUpperCase() + part.slice(1) : part))
    .join(" ");
}

export function renderAnswer(answer: AnswerPayload, chipErrors: Set<string>): string {
  const parts: string[] = ['<div class="answer">'];
  if (answer.primary_node) {
    parts.push(
      `<div class="snippet" data-node="${escapeHtml(answer.primary_node)}">` +
        `<strong>${escapeHtml(chipLabel(answer.primary_node))}</strong>` +
        `<p>${escapeHtml(answer.snippet)}</p></div>`,
    );
  } else {
    parts.push('<div class="snippet empty">No matching resource.</div>');
  }
  const chips = answer.suggestions.slice(0, 5);
  if (chips.length) {
    parts.push('<div class="chips">');
    for (const chip of chips) {
      const failed = chipErrors.has(chip.node_id) ? " chip-error" : "";
      const label = chipErrors.has(chip.node_id)
        ? `${chipLabel(chip.node_id)} (not found)`
        : chipLabel(chip.node_id);
      parts.push(
        `<button class="chip${failed}" data-action="follow" ` +
          `data-node="${escapeHtml(chip.node_id)}" ` +
          `data-reason="${escapeHtml(chip.reason)}">${escapeHtml(label)}</button>`,
      );
    }
    parts.push("</div>");
  }
  if (answer.refinement) {
    parts.push(
      `<div class="refinement-banner">${escapeHtml(answer.refinement.message)}</div>`,
    );
  }
  parts.push("</div>");
  return parts.join("");
}

export function renderTurn(turn: TranscriptTurn, chipErrors: Set<string>): string {
  const parts = [
    `<div class="turn turn-${turn.status}">`,
    `<div class="question">${escapeHtml(turn.question)}</div>`,
  ];
  if (turn.status === "pending") {
    parts.push('<div class="pending-marker">…</div>');
  } else if (turn.status === "failed") {
    parts.push(
      `<div class="turn-error">${escapeHtml(turn.error ?? "request failed")}` +
        ` <button data-action="retry" data-question="${escapeHtml(turn.question)}">retry</button></div>`,
    );
  } else if (turn.answer) {
    parts.push(renderAnswer(turn.answer, chipErrors));
  }
  parts.push("</div>");
  return parts.join("");
}

export function renderChat(state: ConsoleState): string {
  const turns = state.transcript.map((t) => renderTurn(t, state.chipErrors)).join("");
  const notice = state.notice
    ? `<div class="notice">${escapeHtml(state.notice)}` +
      (state.sessionEnded
        ? ' <button data-action="restart">start a new session</button>'
        : "") +
      "</div>"
    : "";
  return `<div class="transcript">${turns}</div>${notice}`;
}

export function renderNodeView(node: NodePayload): string {
  const crumbs: string[] = [];
  if (node.parent) {
    crumbs.push(
      `<a href="#" data-action="open-node" data-node="${escapeHtml(node.parent)}">` +
        `${escapeHtml(chipLabel(node.parent))}</a> / `,
    );
  }
  const children = node.children
    .map(
      (child) =>
        `<li><a href="#" data-action="open-node" data-node="${escapeHtml(child.id)}">` +
        `${escapeHtml(child.title)}</a> <span class="badge">${escapeHtml(child.type)}</span></li>`,
    )
    .join("");
  const media = node.media
    .map((path) => `<li class="media-ref">${escapeHtml(path)}</li>`)
    .join("");
  return (
    `<div class="node-view" data-node="${escapeHtml(node.id)}">` +
    `<div class="breadcrumb">${crumbs.join("")}<strong>${escapeHtml(node.title)}</strong></div>` +
    `<span class="badge">${escapeHtml(node.type)}</span>` +
    `<p class="body">${escapeHtml(node.body)}</p>` +
    (children ? `<h4>Steps and subtopics</h4><ul>${children}</ul>` : "") +
    (media ? `<h4>Attachments</h4><ul>${media}</ul>` : "") +
    '<button data-action="back">Back</button></div>'
  );
}

function renderTreeNode(node: TreeNode, collapsed: Set<string>, depth: number): string {
  const isCollapsed = collapsed.has(node.id);
  const toggle = node.children.length
    ? `<button class="toggle" data-action="toggle" data-node="${escapeHtml(node.id)}">` +
      `${isCollapsed ? "+" : "-"}</button>`
    : '<span class="toggle-spacer"></span>';
  const children =
    node.children.length && !isCollapsed
      ? `<ul>${node.children
          .map((c) => `<li>${renderTreeNode(c, collapsed, depth + 1)}</li>`)
          .join("")}</ul>`
      : "";
  return (
    `<div class="tree-node" data-depth="${depth}">${toggle}` +
    `<a href="#" data-action="open-node" data-node="${escapeHtml(node.id)}">` +
    `${escapeHtml(node.title)}</a> <span class="badge">${escapeHtml(node.type)}</span>` +
    `${children}</div>`
  );
}

export function renderTree(state: ConsoleState): string {
  if (!state.tree) {
    return '<div class="empty-state">No corpus loaded.</div>';
  }
  return `<div class="tree">${renderTreeNode(state.tree, state.collapsed, 0)}</div>`;
}

export function renderAnalytics(usage: UsageReport | null): string {
  if (!usage) {
    return '<div class="empty-state">No usage recorded yet.</div>';
  }
  const rows = usage.top_procedures
    .map(
      (row) =>
        `<tr><td>${escapeHtml(chipLabel(row.node_id))}</td><td>${row.count}</td></tr>`,
    )
    .join("");
  const sessions = Object.entries(usage.session_question_counts)
    .map(([session, count]) => `<tr><td>${escapeHtml(session)}</td><td>${count}</td></tr>`)
    .join("");
  return (
    '<div class="analytics"><h3>Most queried procedures</h3>' +
    `<table><thead><tr><th>procedure</th><th>queries</th></tr></thead><tbody>${rows}</tbody></table>` +
    "<h3>Questions per session</h3>" +
    `<table><thead><tr><th>session</th><th>questions</th></tr></thead><tbody>${sessions}</tbody></table></div>`
  );
}

export function renderApp(state: ConsoleState): string {
  const tabs = (["Chat", "TreeBrowser", "Analytics"] as const)
    .map(
      (view) =>
        `<button class="tab${state.view === view ? " active" : ""}" ` +
        `data-action="view" data-view="${view}">${view === "TreeBrowser" ? "Browse" : view}</button>`,
    )
    .join("");
  let body: string;
  switch (state.view) {
    case "NodeView":
      body = state.currentNode
        ? renderNodeView(state.currentNode)
        : '<div class="empty-state">Nothing open.</div>';
      break;
    case "TreeBrowser":
      body = renderTree(state);
      break;
    case "Analytics":
      body = renderAnalytics(state.usage);
      break;
    default:
      body = renderChat(state);
  }
  return `<nav>${tabs}</nav><main>${body}</main>`;
}
