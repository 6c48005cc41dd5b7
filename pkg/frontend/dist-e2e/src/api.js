/** Typed fetch client for the session service. */
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
        this.name = "ApiError";
    }
}
async function asJson(res) {
    if (!res.ok) {
        let detail = res.statusText;
        try {
            const body = await res.json();
            if (typeof body?.detail === "string")
                detail = body.detail;
            else if (body?.detail)
                detail = JSON.stringify(body.detail);
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(res.status, detail);
    }
    return (await res.json());
}
export class ApiClient {
    constructor(baseUrl = "", fetchFn = fetch) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
    }
    post(path, body) {
        return this.fetchFn(`${this.baseUrl}${path}`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        }).then((res) => asJson(res));
    }
    get(path) {
        return this.fetchFn(`${this.baseUrl}${path}`).then((res) => asJson(res));
    }
    async createSession(options) {
        const body = {
            catalog: options?.catalog ?? null,
            client_token: options?.clientToken ?? null,
            context: options?.context ?? null,
        };
        const res = await this.post("/sessions", body);
        return res.session_id;
    }
    postMessage(sessionId, text, feedback) {
        return this.post(`/sessions/${sessionId}/messages`, {
            text,
            feedback: feedback ?? null,
        });
    }
    getState(sessionId) {
        return this.get(`/sessions/${sessionId}/state`);
    }
    health() {
        return this.get("/healthz");
    }
}
