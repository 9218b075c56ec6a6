/**
 * Client for the local engine service. All requests carry the shared secret
 * from the handshake file ({port, secret}); the panel never talks to a model
 * directly.
 */

export interface Handshake {
  port: number;
  secret: string;
}

export interface SpanInfo {
  start: number;
  end: number;
  tier: string;
  score: number;
}

export interface CitationInfo {
  element_id: number;
  phrase: string;
  answer_offset: number;
  span: SpanInfo | null;
  color_slot: number;
}

export interface PlanEntry {
  element_id: number;
  span: SpanInfo | null;
  color_slot: number;
}

export interface FindResponse {
  display_text: string;
  highlight_plan: { entries: PlanEntry[]; scroll_target: number | null };
  citations: CitationInfo[];
  unresolved: { element_id: number; phrase: string; answer_offset: number }[];
  external_links: { label: string; url: string }[];
  not_on_page: boolean;
}

export interface RouteResponse {
  handler: string;
  confidence: number;
  reason: string;
  fallback_applied: boolean;
}

export interface StepCard {
  step_no: number;
  instruction: string;
  hint: string;
  highlight: { element_id: number; text: string } | null;
  wait_for: string;
  controls: string[];
}

export interface GuideNextResponse {
  state: string;
  step: {
    step: number;
    instruction: string;
    highlight: { element_id: number; text: string } | null;
    wait_for: string;
    is_last: boolean;
    next_hint: string;
  };
  card: StepCard;
}

export interface GuideConfirmResponse {
  state: string;
  divergence: {
    expected_element: { element_id: number; text: string } | null;
    found_in_new_index: boolean;
    url_changed: boolean;
    verdict: string;
  };
}

export interface HideCandidate {
  rank: number;
  element_id: number;
  reason: string;
  snippet: string;
  checked: boolean;
}

export interface HideProposal {
  proposal_ref: string;
  candidates: HideCandidate[];
  message: string;
  source_index_ref: string;
}

export interface HideDirective {
  node_path: string;
  set_style: string;
}

export interface HideApplyResponse {
  directives: HideDirective[];
  mutated_snapshot_id: string;
}

export interface SnapshotUpload {
  html: string;
  url: string;
  title: string;
  captured_at?: string;
  layout?: {
    path: string;
    x: number;
    y: number;
    w: number;
    h: number;
    visible: boolean;
  }[];
}

export type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class EngineClient {
  private base: string;
  private secret: string;
  private fetchFn: FetchLike;

  constructor(handshake: Handshake, fetchFn: FetchLike = fetch.bind(globalThis)) {
    this.base = `http://127.0.0.1:${handshake.port}`;
    this.secret = handshake.secret;
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string,
                           body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        "Content-Type": "application/json",
        "X-PageGuide-Secret": this.secret,
      },
    };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(`${this.base}${path}`, init);
    if (!response.ok) {
      let detail = "";
      try {
        const payload = await response.json();
        detail = payload?.detail?.message ?? payload?.detail?.code ?? "";
      } catch {
        // non-JSON error body; status alone will have to do
      }
      throw new Error(`engine ${path} failed (${response.status}) ${detail}`);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }

  uploadSnapshot(upload: SnapshotUpload): Promise<{ snapshot_id: string }> {
    return this.post("/v1/snapshot", upload);
  }

  getIndex(snapshotId: string): Promise<{
    snapshot_ref: string;
    elements: { id: number; node_path: string; tag: string; text: string;
                interactive: boolean }[];
  }> {
    return this.request("GET", `/v1/snapshot/${snapshotId}/index`);
  }

  route(snapshotId: string, query: string): Promise<RouteResponse> {
    return this.post("/v1/route", { snapshot_id: snapshotId, query });
  }

  find(snapshotId: string, query: string, history?: [string, string][]):
      Promise<FindResponse> {
    return this.post("/v1/find", {
      snapshot_id: snapshotId, query, history: history ?? [],
    });
  }

  guideStart(snapshotId: string, query: string): Promise<{ session_id: string; state: string }> {
    return this.post("/v1/guide/start", { snapshot_id: snapshotId, query });
  }

  guideNext(sessionId: string): Promise<GuideNextResponse> {
    return this.post(`/v1/guide/${sessionId}/next`, {});
  }

  guideConfirm(sessionId: string, snapshotId?: string): Promise<GuideConfirmResponse> {
    const body = snapshotId ? { snapshot_id: snapshotId } : {};
    return this.post(`/v1/guide/${sessionId}/confirm`, body);
  }

  guideStop(sessionId: string): Promise<{ state: string }> {
    return this.post(`/v1/guide/${sessionId}/stop`, {});
  }

  hidePropose(snapshotId: string, request: string): Promise<HideProposal> {
    return this.post("/v1/hide/propose", { snapshot_id: snapshotId, request });
  }

  hideApply(snapshotId: string, confirmedIds: number[]): Promise<HideApplyResponse> {
    return this.post("/v1/hide/apply", {
      snapshot_id: snapshotId, confirmed_ids: confirmedIds,
    });
  }
}
