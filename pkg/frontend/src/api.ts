/** Thin typed client over the service routes.
 *
 * The fetch implementation is injectable so tests can run against a fake
 * service; every displayed number in the UI comes through here.
 */

import type {
  ClassEntry,
  ClassProportion,
  CorrectionEvent,
  DetectionPage,
  EventKind,
  GraphDoc,
  GroupDoc,
  MappingReport,
  ProjectionSnapshot,
  SessionInfo,
  SimilarityDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  url(path: string, params?: Record<string, string | number | undefined>): string {
    const query = Object.entries(params ?? {})
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
      .join("&");
    return this.base + path + (query ? `?${query}` : "");
  }

  private async request(path: string, init?: RequestInit,
                        params?: Record<string, string | number | undefined>): Promise<Response> {
    const response = await this.fetchImpl(this.url(path, params), init);
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return response;
  }

  private async json<T>(path: string,
                        params?: Record<string, string | number | undefined>): Promise<T> {
    return (await this.request(path, undefined, params)).json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return response.json() as Promise<T>;
  }

  listDatasets() {
    return this.json<{ datasets: { dataset_id: string }[] }>("/datasets");
  }

  classes(datasetId: string) {
    return this.json<{ classes: ClassEntry[] }>(`/datasets/${datasetId}/classes`);
  }

  classProportions(datasetId: string) {
    return this.json<{ proportions: ClassProportion[] }>(
      `/datasets/${datasetId}/class-proportions`);
  }

  createSession(datasetId: string) {
    return this.post<{ session_id: string }>("/sessions", { dataset_id: datasetId });
  }

  session(sessionId: string) {
    return this.json<SessionInfo>(`/sessions/${sessionId}`);
  }

  postEvent(sessionId: string, kind: EventKind, payload: Record<string, unknown>,
            actor = "webui") {
    return this.post<CorrectionEvent>(`/sessions/${sessionId}/events`,
                                      { kind, payload, actor });
  }

  sessionDetections(sessionId: string,
                    filter: { image_id?: string; class?: string;
                              limit?: number; offset?: number } = {}) {
    return this.json<DetectionPage>(`/sessions/${sessionId}/detections`, filter);
  }

  projection(sessionId: string, classLabel: string) {
    return this.json<{ class: string; series: ProjectionSnapshot[] }>(
      `/sessions/${sessionId}/projection/${encodeURIComponent(classLabel)}`);
  }

  mapping(sessionId: string, imageId: string) {
    return this.json<MappingReport>(`/sessions/${sessionId}/mapping/${imageId}`);
  }

  /** Raw export bytes; served verbatim so downloads match the CLI output. */
  async exportText(sessionId: string): Promise<string> {
    const response = await this.request(`/sessions/${sessionId}/export`);
    return response.text();
  }

  totemGraph(datasetId: string, threshold: number) {
    return this.json<GraphDoc>(`/datasets/${datasetId}/totem/graph`, { threshold });
  }

  totemSimilarity(datasetId: string) {
    return this.json<SimilarityDoc>(`/datasets/${datasetId}/totem/similarity`);
  }

  totemGroups(datasetId: string, threshold: number, size: number) {
    return this.json<{ groups: GroupDoc[] }>(
      `/datasets/${datasetId}/totem/groups`, { threshold, size });
  }

  imageUrl(imageId: string): string {
    return this.url(`/images/${imageId}`);
  }
}
