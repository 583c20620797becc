import type {
  AskResponse,
  EventResponse,
  HealthPayload,
  NodePayload,
  TreeNode,
  UsageReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

// Thin typed client; every non-2xx response surfaces as ApiError with the
// machine-readable code the service always includes.
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "network", String(err));
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "internal";
      const message = typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  health(): Promise<HealthPayload> {
    return this.request("/health");
  }

  ask(sessionId: string, question: string, nonce?: number): Promise<AskResponse> {
    return this.request("/ask", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session_id: sessionId, question, nonce }),
    });
  }

  node(id: string): Promise<NodePayload> {
    return this.request(`/nodes/${encodeURIComponent(id)}`);
  }

  tree(): Promise<TreeNode> {
    return this.request("/tree");
  }

  sendEvent(sessionId: string, kind: string, payload = ""): Promise<EventResponse> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/events`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, payload }),
    });
  }

  usage(): Promise<UsageReport> {
    return this.request("/reports/usage");
  }
}
