/** DOM rendering for the chat view; full redraw per state change. */

import type { ChatViewState, Card, FeedbackAction } from "./state.js";
import { AGENT_NAMES, type AgentWeights } from "./types.js";

const AGENT_CLASSES: Record<keyof AgentWeights, string> = {
  Conv: "agent-conv",
  Pref: "agent-pref",
  Ctx: "agent-ctx",
  Rank: "agent-rank",
};

export function formatPercent(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderTierBadge(state: ChatViewState): HTMLElement {
  const badge = el("span", "tier-badge");
  if (state.tier) {
    badge.classList.add(`tier-${state.tier.tier.toLowerCase()}`);
    badge.textContent = state.tier.cache_hit ? `${state.tier.tier} (cached)` : state.tier.tier;
    badge.title = `complexity ${state.tier.complexity.toFixed(3)}`;
  } else {
    badge.textContent = "no turn yet";
  }
  return badge;
}

export function renderWeightPanel(state: ChatViewState): HTMLElement {
  const panel = el("div", "weight-panel");
  panel.appendChild(el("h3", undefined, "agent weights"));
  for (const agent of AGENT_NAMES) {
    const row = el("div", "weight-row");
    row.appendChild(el("span", "weight-label", agent));
    const track = el("div", "bar-track");
    const bar = el("div", `bar-fill ${AGENT_CLASSES[agent]}`);
    // width is the raw server weight: the four bars visually sum to 100%
    const value = state.weights ? state.weights[agent] : 0;
    bar.style.width = formatPercent(value);
    track.appendChild(bar);
    row.appendChild(track);
    row.appendChild(el("span", "weight-value", state.weights ? formatPercent(value) : "-"));
    panel.appendChild(row);
  }
  return panel;
}

function renderContributionBar(card: Card): HTMLElement {
  const track = el("div", "contribution-bar");
  const total = card.score;
  for (const agent of AGENT_NAMES) {
    const segment = el("div", `bar-segment ${AGENT_CLASSES[agent]}`);
    const share = total > 0 ? card.contributions[agent] / total : 0;
    segment.style.width = formatPercent(Math.max(share, 0));
    segment.title = `${agent}: ${card.contributions[agent].toFixed(4)}`;
    track.appendChild(segment);
  }
  return track;
}

export function renderCards(
  state: ChatViewState,
  onFeedback: (itemId: string, action: FeedbackAction) => void,
): HTMLElement {
  const list = el("div", "cards");
  for (const card of state.cards) {
    const box = el("div", "card");
    if (card.liked) box.classList.add("liked");
    if (card.disliked) box.classList.add("disliked");
    box.addEventListener("click", () => onFeedback(card.itemId, "click"));

    const head = el("div", "card-head");
    head.appendChild(el("span", "card-name", card.name));
    head.appendChild(el("span", "card-score", card.score.toFixed(3)));
    box.appendChild(head);
    box.appendChild(renderContributionBar(card));

    const actions = el("div", "card-actions");
    for (const [label, action] of [["like", "like"], ["dislike", "dislike"]] as const) {
      const button = el("button", `btn-${action}`, label);
      button.addEventListener("click", (ev) => {
        ev.stopPropagation();
        onFeedback(card.itemId, action);
      });
      actions.appendChild(button);
    }
    box.appendChild(actions);
    list.appendChild(box);
  }
  return list;
}

export function renderMessages(state: ChatViewState): HTMLElement {
  const feed = el("div", "messages");
  for (const bubble of state.messages) {
    feed.appendChild(el("div", `bubble bubble-${bubble.kind}`, bubble.text));
  }
  return feed;
}

export interface ViewHooks {
  onSend: (text: string) => void;
  onFeedback: (itemId: string, action: FeedbackAction) => void;
  onRestart: () => void;
}

export function renderApp(root: HTMLElement, state: ChatViewState, hooks: ViewHooks): void {
  const input = root.querySelector<HTMLInputElement>("#chat-input");
  const previous = input?.value ?? "";

  root.textContent = "";
  const header = el("header", "top-bar");
  header.appendChild(el("h2", undefined, "convrec chat"));
  header.appendChild(renderTierBadge(state));
  root.appendChild(header);

  const main = el("div", "layout");
  const left = el("div", "chat-column");
  left.appendChild(renderMessages(state));

  const inputRow = el("div", "input-row");
  const box = el("input", "chat-input");
  box.id = "chat-input";
  box.placeholder = state.sessionExpired ? "session expired" : "tell me what you like...";
  box.value = previous; // validation errors keep the typed text
  box.disabled = state.pending || state.sessionExpired;
  const send = el("button", "btn-send", state.pending ? "..." : "send");
  send.disabled = state.pending || state.sessionExpired || !previous.trim();
  box.addEventListener("input", () => {
    send.disabled = state.pending || state.sessionExpired || !box.value.trim();
  });
  const submit = () => {
    if (box.value.trim()) hooks.onSend(box.value);
  };
  send.addEventListener("click", submit);
  box.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") submit();
  });
  inputRow.appendChild(box);
  inputRow.appendChild(send);
  if (state.sessionExpired) {
    const restart = el("button", "btn-restart", "start new session");
    restart.addEventListener("click", hooks.onRestart);
    inputRow.appendChild(restart);
  }
  left.appendChild(inputRow);
  main.appendChild(left);

  const right = el("div", "side-column");
  right.appendChild(renderWeightPanel(state));
  right.appendChild(renderCards(state, hooks.onFeedback));
  main.appendChild(right);
  root.appendChild(main);
}
