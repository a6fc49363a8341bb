// Thin client for the pqa JSON API. The UI consumes these endpoints only.

export type ReplyKind =
  | "answer"
  | "candidate_card"
  | "train_offer"
  | "algorithm_menu"
  | "clarification"
  | "guide"
  | "error";

export interface Reply {
  kind: ReplyKind;
  text: string;
  payload: Record<string, unknown> | null;
}

export class ApiError extends Error {
  constructor(message: string, readonly code: string = "error") {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ChatApi {
  createSession(): Promise<string>;
  sendMessage(sessionId: string, text: string): Promise<Reply>;
}

export class ApiClient implements ChatApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async createSession(): Promise<string> {
    const body = await this.request("POST", "/v1/sessions");
    return body.session_id as string;
  }

  async sendMessage(sessionId: string, text: string): Promise<Reply> {
    const body = await this.request(
      "POST",
      `/v1/sessions/${encodeURIComponent(sessionId)}/messages`,
      { text },
    );
    return body as unknown as Reply;
  }

  private async request(
    method: string,
    path: string,
    json?: unknown,
  ): Promise<Record<string, unknown>> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: json === undefined ? {} : { "Content-Type": "application/json" },
        body: json === undefined ? undefined : JSON.stringify(json),
      });
    } catch (err) {
      throw new ApiError(`network error: ${(err as Error).message}`, "network");
    }
    const body = (await response.json().catch(() => ({}))) as Record<string, unknown>;
    if (!response.ok) {
      const error = (body.error ?? {}) as { code?: string; message?: string };
      throw new ApiError(error.message ?? `HTTP ${response.status}`, error.code ?? "http");
    }
    return body;
  }
}
