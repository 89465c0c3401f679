/** Thin service client.
 *
 * Two rules the UI depends on:
 *  - at most one action post is in flight; further requests queue in
 *    arrival order (clicks during a round-trip are not lost or raced);
 *  - patient data travels only in POST bodies — never in URLs, so it can
 *    never reach the browser history or server logs via query strings.
 */

import type { PatientValue, StatePayload, TreeDoc } from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

interface Enveloped {
  state: StatePayload;
}

export class ApiClient {
  private chain: Promise<unknown> = Promise.resolve();

  constructor(
    private fetchImpl: FetchLike,
    private base = "",
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await response.json()) as Record<string, unknown>;
    if (response.status >= 400) {
      const detail =
        typeof payload?.detail === "string"
          ? payload.detail
          : JSON.stringify(payload?.detail ?? payload);
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  /** Serialize posts: each waits for the previous to settle. */
  private enqueue<T>(job: () => Promise<T>): Promise<T> {
    const next = this.chain.then(job, job);
    this.chain = next.catch(() => undefined);
    return next;
  }

  listTrees(): Promise<{ trees: { id: string; title: string }[] }> {
    return this.request("GET", "/api/trees");
  }

  getTree(treeId: string): Promise<TreeDoc> {
    return this.request("GET", `/api/trees/${encodeURIComponent(treeId)}`);
  }

  createSession(treeId: string): Promise<StatePayload> {
    return this.enqueue(async () => {
      const out = await this.request<Enveloped>("POST", "/api/sessions", {
        tree_id: treeId,
      });
      return out.state;
    });
  }

  getState(sessionId: string, viewport?: string): Promise<StatePayload> {
    const query = viewport ? `?viewport=${encodeURIComponent(viewport)}` : "";
    return this.request<Enveloped>(
      "GET",
      `/api/sessions/${encodeURIComponent(sessionId)}/state${query}`,
    ).then((out) => out.state);
  }

  postAnswer(
    sessionId: string,
    revision: number,
    node: string,
    choices: string[],
  ): Promise<StatePayload> {
    return this.postAction(sessionId, revision, {
      kind: "answer",
      node,
      choices,
    });
  }

  postGoto(
    sessionId: string,
    revision: number,
    node: string,
  ): Promise<StatePayload> {
    return this.postAction(sessionId, revision, { kind: "goto", node });
  }

  postReset(sessionId: string, revision: number): Promise<StatePayload> {
    return this.postAction(sessionId, revision, { kind: "reset" });
  }

  private postAction(
    sessionId: string,
    revision: number,
    action: Record<string, unknown>,
  ): Promise<StatePayload> {
    return this.enqueue(async () => {
      const out = await this.request<Enveloped>(
        "POST",
        `/api/sessions/${encodeURIComponent(sessionId)}/actions`,
        { revision, action },
      );
      return out.state;
    });
  }

  postAutonav(
    sessionId: string,
    revision: number,
    values: Record<string, PatientValue>,
  ): Promise<{
    state: StatePayload;
    auto: {
      steps: { node: string; answer: string }[];
      stop: { reason: string; node?: string; missing_fields?: string[] };
    };
  }> {
    return this.enqueue(() =>
      this.request(
        "POST",
        `/api/sessions/${encodeURIComponent(sessionId)}/autonav`,
        { revision, patient: { format_version: 1, values } },
      ),
    );
  }
}
