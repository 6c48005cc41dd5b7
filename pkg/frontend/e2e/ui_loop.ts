/**
 * Scripted end-to-end chat loop against a live service.
 *
 * Spawns the Python service, then drives the real store + client through:
 * send "I like jazz" -> like a returned card -> send a follow-up. Asserts
 * the weight panel equals GET /state and the profile gained positive weight
 * on the jazz attribute (attribute 0 in the demo catalog).
 */

import { spawn } from "node:child_process";
import process from "node:process";

import { ApiClient } from "../src/api.js";
import { ChatStore } from "../src/state.js";

const PORT = 8973;
const BASE = `http://127.0.0.1:${PORT}`;

function fail(message: string): never {
  console.error(`[FAIL] ${message}`);
  process.exit(1);
}

function assert(condition: boolean, message: string): void {
  if (!condition) fail(message);
}

async function waitForHealth(api: ApiClient, attempts = 50): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      const res = await api.health();
      if (res.status === "ok") return;
    } catch {
      // service not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  fail("service did not become healthy");
}

async function main(): Promise<void> {
  const service = spawn(
    "python3",
    ["-m", "convrec.cli", "serve", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  const stop = () => {
    if (!service.killed) service.kill();
  };
  process.on("exit", stop);

  try {
    const api = new ApiClient(BASE);
    await waitForHealth(api);

    const store = new ChatStore(api);
    const sessionId = await store.start();

    assert(await store.sendMessage("I like jazz"), "first message failed");
    const afterFirst = store.state;
    assert(afterFirst.cards.length > 0, "no recommendation cards returned");
    assert(afterFirst.weights !== null, "no weights rendered");

    const firstCard = afterFirst.cards[0]!;
    assert(store.giveFeedback(firstCard.itemId, "like"), "like on visible card refused");

    assert(await store.sendMessage("more like this please"), "follow-up message failed");
    const view = store.state;

    const server = await api.getState(sessionId);
    assert(server.weights !== null, "server reported no weights");
    for (const agent of ["Conv", "Pref", "Ctx", "Rank"] as const) {
      const panel = view.weights![agent];
      const reported = server.weights![agent];
      assert(
        Math.abs(panel - reported) < 1e-12,
        `weight panel ${agent}=${panel} != GET /state ${reported}`,
      );
    }

    const jazzWeight = server.profile.weights[0]!;
    assert(jazzWeight > 0, `expected positive jazz weight, got ${jazzWeight}`);

    console.log(
      `[PASS] UI loop: weight panel matches GET /state; jazz weight ${jazzWeight.toFixed(3)} > 0`,
    );
  } finally {
    stop();
  }
}

main().catch((err) => fail(String(err)));
