import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { ChatStore } from "../src/state.js";
import type { MessageResponse } from "../src/types.js";

function messageResponse(overrides: Partial<MessageResponse> = {}): MessageResponse {
  return {
    session_id: "s1",
    turn_index: 0,
    ranked: [
      { item_id: "a", name: "Alpha", score: 0.9 },
      { item_id: "b", name: "Beta", score: 0.7 },
    ],
    weights: { Conv: 0.1, Pref: 0.4, Ctx: 0.2, Rank: 0.3 },
    tier: {
      tier: "Reasoning",
      cache_hit: false,
      complexity: 0.5,
      components: { history_length: 0, profile_incompleteness: 1, ambiguity: 0.5 },
    },
    explanation: {
      a: { Conv: 0.09, Pref: 0.36, Ctx: 0.18, Rank: 0.27 },
      b: { Conv: 0.07, Pref: 0.28, Ctx: 0.14, Rank: 0.21 },
    },
    work_units: 3,
    ...overrides,
  };
}

function storeWith(api: Partial<ApiClient>): ChatStore {
  return new ChatStore(api as ApiClient);
}

async function startedStore(api: Partial<ApiClient>): Promise<ChatStore> {
  const store = storeWith({
    createSession: vi.fn(async () => "s1"),
    ...api,
  });
  await store.start();
  return store;
}

describe("ChatStore", () => {
  it("renders server weights without renormalization", async () => {
    // deliberately off-sum weights: the panel must show them untouched
    const weights = { Conv: 0.5, Pref: 0.3, Ctx: 0.1, Rank: 0.05 };
    const post = vi.fn(async () => messageResponse({ weights }));
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("hello there");
    expect(store.state.weights).toEqual(weights);
  });

  it("maps the tier badge 1:1 from the server enum", async () => {
    const post = vi.fn(async () =>
      messageResponse({
        tier: {
          tier: "DeepCollab",
          cache_hit: false,
          complexity: 0.9,
          components: { history_length: 0, profile_incompleteness: 1, ambiguity: 1 },
        },
      }),
    );
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("hi");
    expect(store.state.tier?.tier).toBe("DeepCollab");
  });

  it("allows only one in-flight request", async () => {
    let release: (value: MessageResponse) => void = () => {};
    const gate = new Promise<MessageResponse>((resolve) => (release = resolve));
    const post = vi.fn(() => gate);
    const store = await startedStore({ postMessage: post });

    const first = store.sendMessage("first");
    const second = await store.sendMessage("second"); // refused while pending
    expect(second).toBe(false);
    expect(post).toHaveBeenCalledTimes(1);
    expect(store.state.pending).toBe(true);

    release(messageResponse());
    expect(await first).toBe(true);
    expect(store.state.pending).toBe(false);
  });

  it("refuses empty input", async () => {
    const post = vi.fn(async () => messageResponse());
    const store = await startedStore({ postMessage: post });
    expect(await store.sendMessage("   ")).toBe(false);
    expect(post).not.toHaveBeenCalled();
  });

  it("queues feedback and attaches it to the next message", async () => {
    const post = vi.fn(async () => messageResponse());
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("show me things");

    expect(store.giveFeedback("a", "like")).toBe(true);
    expect(store.giveFeedback("a", "click")).toBe(true);
    await store.sendMessage("more please");

    const feedback = post.mock.calls[1]?.[2];
    expect(feedback).toEqual({
      liked_items: ["a"],
      disliked_items: [],
      clicks: ["a"],
      dwell_ms: {},
    });
    // queue drains after a successful send
    expect(store.pendingFeedback()).toBeUndefined();
  });

  it("makes like and dislike mutually exclusive, last action wins", async () => {
    const post = vi.fn(async () => messageResponse());
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("show me things");

    store.giveFeedback("a", "like");
    store.giveFeedback("a", "dislike");
    expect(store.pendingFeedback()).toEqual({
      liked_items: [],
      disliked_items: ["a"],
      clicks: [],
      dwell_ms: {},
    });
    const card = store.state.cards.find((c) => c.itemId === "a");
    expect(card?.disliked).toBe(true);
    expect(card?.liked).toBe(false);
  });

  it("ignores feedback for items not on screen, with a console warning", async () => {
    const warn = vi.spyOn(console, "warn").mockImplementation(() => {});
    const post = vi.fn(async () => messageResponse());
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("show me things");

    expect(store.giveFeedback("ghost", "like")).toBe(false);
    expect(store.pendingFeedback()).toBeUndefined();
    expect(warn).toHaveBeenCalledOnce();
    warn.mockRestore();
  });

  it("shows an inline error bubble on validation failure and keeps the queue", async () => {
    const post = vi.fn(async () => {
      throw new ApiError(422, "text must be non-empty");
    });
    const store = await startedStore({ postMessage: post });
    const ok = await store.sendMessage("anything");
    expect(ok).toBe(false);
    const last = store.state.messages.at(-1);
    expect(last?.kind).toBe("error");
    expect(last?.text).toContain("non-empty");
    expect(store.state.sessionExpired).toBe(false);
  });

  it("flags the session as expired on 404", async () => {
    const post = vi.fn(async () => {
      throw new ApiError(404, "unknown session");
    });
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("hello");
    expect(store.state.sessionExpired).toBe(true);
    expect(store.state.messages.at(-1)?.text).toContain("session expired");
    // further sends are refused until restart
    expect(await store.sendMessage("again")).toBe(false);
  });

  it("builds cards with per-agent contribution breakdowns", async () => {
    const post = vi.fn(async () => messageResponse());
    const store = await startedStore({ postMessage: post });
    await store.sendMessage("hello");
    const card = store.state.cards[0];
    expect(card?.itemId).toBe("a");
    expect(card?.contributions.Pref).toBeCloseTo(0.36);
    const sum =
      (card?.contributions.Conv ?? 0) +
      (card?.contributions.Pref ?? 0) +
      (card?.contributions.Ctx ?? 0) +
      (card?.contributions.Rank ?? 0);
    expect(sum).toBeCloseTo(card?.score ?? 0, 9);
  });
});
