/** Bootstrap: wire the store to the DOM against the configured server. */
import { ApiClient } from "./api.js";
import { ChatStore } from "./state.js";
import { renderApp } from "./render.js";
function serverBase() {
    const params = new URLSearchParams(window.location.search);
    return params.get("api") ?? "";
}
function boot() {
    const root = document.getElementById("app");
    if (!root)
        throw new Error("missing #app container");
    const api = new ApiClient(serverBase());
    const store = new ChatStore(api, (state) => {
        renderApp(root, state, {
            onSend: (text) => {
                void store.sendMessage(text).then((ok) => {
                    if (ok) {
                        const input = root.querySelector("#chat-input");
                        if (input)
                            input.value = "";
                    }
                });
            },
            onFeedback: (itemId, action) => {
                store.giveFeedback(itemId, action);
            },
            onRestart: () => {
                void store.start();
            },
        });
    });
    void store.start().catch((err) => {
        root.textContent = `cannot reach the recommendation service: ${err}`;
    });
}
boot();
