/** REST client for the labeling service.
 *
 * Every call is JSON over fetch. Failures are split into two kinds so
 * the session layer can decide between "retry later" and "skip":
 * NetworkError (the request never got an answer) and ApiError (the
 * service answered with an error payload).
 */

export interface Item {
  item_id: string;
  text: string;
}

export interface VoteReceipt {
  verdict: string;
  vote_count: number;
}

export interface ProgressSnapshot {
  items_total: number;
  completed: number;
  pending: number;
  votes_total: number;
  per_labeler: Record<string, number>;
}

export type NextResult = { kind: "item"; item: Item } | { kind: "done" };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail ? `${code}: ${detail}` : code);
    this.name = "ApiError";
  }
}

export class NetworkError extends Error {
  constructor() {
    super("labeling service unreachable");
    this.name = "NetworkError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch {
      throw new NetworkError();
    }
    if (response.ok) {
      return response;
    }
    let code = `HTTP ${response.status}`;
    let detail = "";
    try {
      const payload = (await response.json()) as { error?: string; detail?: string };
      code = payload.error ?? code;
      detail = payload.detail ?? "";
    } catch {
      // non-JSON error body; keep the bare status code
    }
    throw new ApiError(response.status, code, detail);
  }

  async nextItem(labeler: string): Promise<NextResult> {
    const response = await this.request(
      `/api/items/next?labeler=${encodeURIComponent(labeler)}`,
    );
    if (response.status === 204) {
      return { kind: "done" };
    }
    return { kind: "item", item: (await response.json()) as Item };
  }

  async submitVote(itemId: string, labeler: string, hasNeed: boolean): Promise<VoteReceipt> {
    const response = await this.request("/api/votes", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, labeler, has_need: hasNeed }),
    });
    return (await response.json()) as VoteReceipt;
  }

  async progress(): Promise<ProgressSnapshot> {
    const response = await this.request("/api/progress");
    return (await response.json()) as ProgressSnapshot;
  }
}
