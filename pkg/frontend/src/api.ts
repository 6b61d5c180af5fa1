// Typed client over the JSON API. Every method maps one-to-one onto a
// server route; errors surface the server's machine-readable code.

import {
  EpisodesResponse,
  HealthDoc,
  Label,
  PairRow,
  PredictionsResponse,
  ProfileDoc,
  SessionDoc,
  TrainResponse,
  UncertainResponse,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export interface ViewParams {
  mu?: number;
  sigma?: number;
  h?: number;
  grid_n?: number;
  from?: number;
  to?: number;
}

export interface DetectionParams extends ViewParams {
  epsilon?: number;
  epsilon_mode?: string;
  min_duration?: number;
  merge_gap?: number;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function query(params: object): string {
  const q = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== null) q.set(key, String(value));
  }
  const s = q.toString();
  return s ? `?${s}` : "";
}

export class ApiClient {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (u, i) => fetch(u, i)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async go<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (e) {
      throw new ApiError("network", String(e), 0);
    }
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const code = body && typeof body.code === "string" ? body.code : "error";
      const message =
        body && typeof body.message === "string" ? body.message : `HTTP ${resp.status}`;
      throw new ApiError(code, message, resp.status);
    }
    return body as T;
  }

  private json(method: string, payload: unknown): RequestInit {
    return {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  health(): Promise<HealthDoc> {
    return this.go("/api/health");
  }

  pairs(min = 1, limit = 500): Promise<{ pairs: PairRow[] }> {
    return this.go(`/api/pairs${query({ min, limit })}`);
  }

  profile(a: string, b: string, params: ViewParams = {}): Promise<ProfileDoc> {
    return this.go(
      `/api/pairs/${encodeURIComponent(a)}/${encodeURIComponent(b)}/profile${query(params)}`,
    );
  }

  episodes(a: string, b: string, params: DetectionParams = {}): Promise<EpisodesResponse> {
    return this.go(
      `/api/pairs/${encodeURIComponent(a)}/${encodeURIComponent(b)}/episodes${query(params)}`,
    );
  }

  createSession(): Promise<SessionDoc> {
    return this.go("/api/sessions", { method: "POST" });
  }

  getSession(id: string): Promise<SessionDoc> {
    return this.go(`/api/sessions/${encodeURIComponent(id)}`);
  }

  putView(id: string, view: Record<string, unknown>): Promise<SessionDoc> {
    return this.go(`/api/sessions/${encodeURIComponent(id)}/view`, this.json("PUT", view));
  }

  putLabel(
    id: string,
    episodeRef: string,
    label: Label,
  ): Promise<{ episode_ref: string; label: Label; labels_total: number; stale: boolean }> {
    return this.go(
      `/api/sessions/${encodeURIComponent(id)}/labels`,
      this.json("PUT", { episode_ref: episodeRef, label }),
    );
  }

  train(
    id: string,
    className: string,
    config: Record<string, unknown> = {},
  ): Promise<TrainResponse> {
    return this.go(
      `/api/sessions/${encodeURIComponent(id)}/models/${encodeURIComponent(className)}/train`,
      this.json("POST", { config }),
    );
  }

  predictions(
    id: string,
    className: string,
    minConfidence = 0,
    polarity: "positive" | "negative" | "any" = "any",
  ): Promise<PredictionsResponse> {
    return this.go(
      `/api/sessions/${encodeURIComponent(id)}/models/${encodeURIComponent(className)}` +
        `/predictions${query({ min_confidence: minConfidence, polarity })}`,
    );
  }

  uncertain(id: string, className: string, limit = 20): Promise<UncertainResponse> {
    return this.go(
      `/api/sessions/${encodeURIComponent(id)}/models/${encodeURIComponent(className)}` +
        `/uncertain${query({ limit })}`,
    );
  }

  combine(
    id: string,
    members: string[],
    mode: "and" | "or",
    name = "combined",
  ): Promise<{ class_name: string; members: string[]; mode: string }> {
    return this.go(
      `/api/sessions/${encodeURIComponent(id)}/models/combined`,
      this.json("POST", { members, mode, name }),
    );
  }
}
