/** View state: URL-hash round-tripping and grid selection rules.
 *
 * The UI keeps no authoritative data; everything here is reconstructible
 * from the server plus these URL parameters.
 */

export type ViewName = "classes" | "triage" | "annotate" | "totem";

export interface ViewState {
  view: ViewName;
  datasetId?: string;
  sessionId?: string;
  classLabel?: string;
  imageId?: string;
  page: number;
  graphThreshold: number;
  groupThreshold: number;
  groupSize: number;
}

export const DEFAULT_STATE: ViewState = {
  view: "classes",
  page: 0,
  graphThreshold: 1,
  groupThreshold: 0.8,
  groupSize: 8,
};

export function encodeHash(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("view", state.view);
  if (state.datasetId) params.set("dataset", state.datasetId);
  if (state.sessionId) params.set("session", state.sessionId);
  if (state.classLabel) params.set("class", state.classLabel);
  if (state.imageId) params.set("image", state.imageId);
  if (state.page) params.set("page", String(state.page));
  if (state.graphThreshold !== 1) params.set("gt", String(state.graphThreshold));
  if (state.groupThreshold !== 0.8) params.set("st", String(state.groupThreshold));
  if (state.groupSize !== 8) params.set("gs", String(state.groupSize));
  return "#" + params.toString();
}

export function decodeHash(hash: string): ViewState {
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  const view = params.get("view");
  return {
    view: (["classes", "triage", "annotate", "totem"].includes(view ?? "")
      ? view : "classes") as ViewName,
    datasetId: params.get("dataset") ?? undefined,
    sessionId: params.get("session") ?? undefined,
    classLabel: params.get("class") ?? undefined,
    imageId: params.get("image") ?? undefined,
    page: Number(params.get("page") ?? 0),
    graphThreshold: Number(params.get("gt") ?? 1),
    groupThreshold: Number(params.get("st") ?? 0.8),
    groupSize: Number(params.get("gs") ?? 8),
  };
}

/** Multi-select over the currently displayed grid page only. */
export class Selection {
  private ids = new Set<string>();

  toggle(id: string): void {
    if (this.ids.has(id)) this.ids.delete(id);
    else this.ids.add(id);
  }

  /** Drop selections that are no longer displayed (pagination, refresh). */
  prune(visible: Iterable<string>): void {
    const keep = new Set(visible);
    for (const id of this.ids) if (!keep.has(id)) this.ids.delete(id);
  }

  clear(): void {
    this.ids.clear();
  }

  has(id: string): boolean {
    return this.ids.has(id);
  }

  get size(): number {
    return this.ids.size;
  }

  list(): string[] {
    return [...this.ids].sort();
  }
}
