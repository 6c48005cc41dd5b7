/** Chat view state and transitions.
 *
 * Framework-free store: the render layer subscribes and redraws. Invariants
 * enforced here: at most one in-flight message request, weights taken from
 * the last server response without renormalization, exclusive like/dislike
 * per item, feedback queued until the next message.
 */
import { ApiError } from "./api.js";
export class ChatStore {
    constructor(api, listener = () => { }) {
        this.api = api;
        this.listener = listener;
        this.messages = [];
        this.cards = [];
        this.weights = null;
        this.tier = null;
        this.pending = false;
        this.sessionExpired = false;
        this.sessionId = null;
        this.likes = new Set();
        this.dislikes = new Set();
        this.clicks = [];
    }
    get state() {
        return {
            messages: [...this.messages],
            cards: this.cards.map((c) => ({ ...c })),
            weights: this.weights ? { ...this.weights } : null,
            tier: this.tier ? { ...this.tier } : null,
            pending: this.pending,
            sessionExpired: this.sessionExpired,
            sessionId: this.sessionId,
        };
    }
    emit() {
        this.listener(this.state);
    }
    async start(context) {
        this.sessionId = await this.api.createSession({ context });
        this.sessionExpired = false;
        this.messages.push({ kind: "banner", text: "session started" });
        this.emit();
        return this.sessionId;
    }
    /** Queue feedback for the next message; item must be visible in the cards. */
    giveFeedback(itemId, action) {
        const card = this.cards.find((c) => c.itemId === itemId);
        if (!card) {
            console.warn(`feedback for stale item ${itemId} ignored`);
            return false;
        }
        if (action === "like") {
            this.dislikes.delete(itemId); // exclusive: second action replaces first
            this.likes.add(itemId);
            card.liked = true;
            card.disliked = false;
        }
        else if (action === "dislike") {
            this.likes.delete(itemId);
            this.dislikes.add(itemId);
            card.disliked = true;
            card.liked = false;
        }
        else {
            this.clicks.push(itemId);
        }
        this.emit();
        return true;
    }
    /** Feedback attached to the next message, or undefined when empty. */
    pendingFeedback() {
        if (!this.likes.size && !this.dislikes.size && !this.clicks.length) {
            return undefined;
        }
        return {
            liked_items: [...this.likes],
            disliked_items: [...this.dislikes],
            clicks: [...this.clicks],
            dwell_ms: {},
        };
    }
    /**
     * Send one message. Returns true when the server response was applied;
     * false when the call was refused (empty text, in-flight request, no
     * session) or failed (error bubble / expiry banner added instead).
     */
    async sendMessage(text) {
        if (this.pending || !text.trim() || !this.sessionId || this.sessionExpired) {
            return false;
        }
        this.pending = true;
        this.messages.push({ kind: "user", text });
        this.emit();
        const feedback = this.pendingFeedback();
        try {
            const response = await this.api.postMessage(this.sessionId, text, feedback);
            this.likes.clear();
            this.dislikes.clear();
            this.clicks = [];
            this.applyResponse(response);
            return true;
        }
        catch (err) {
            if (err instanceof ApiError && err.status === 404) {
                this.sessionExpired = true;
                this.messages.push({ kind: "banner", text: "session expired, start new" });
            }
            else {
                const detail = err instanceof Error ? err.message : String(err);
                this.messages.push({ kind: "error", text: detail });
            }
            return false;
        }
        finally {
            this.pending = false;
            this.emit();
        }
    }
    applyResponse(response) {
        // weights and tier come straight from the server; no client-side math
        this.weights = response.weights;
        this.tier = response.tier;
        this.cards = response.ranked.map((entry) => ({
            itemId: entry.item_id,
            name: entry.name,
            score: entry.score,
            contributions: response.explanation[entry.item_id] ?? {
                Conv: 0,
                Pref: 0,
                Ctx: 0,
                Rank: 0,
            },
            liked: false,
            disliked: false,
        }));
        this.messages.push({
            kind: "system",
            text: `${response.ranked.length} recommendations (${response.tier.tier})`,
        });
    }
}
