/** View models: everything a view displays, assembled from API calls.
 *
 * No client-side aggregation: eliminations and annotations go to the
 * server as events and the models are re-fetched, so a refresh after any
 * action shows exactly what the server derived.
 */

import { ApiClient } from "./api.js";
import { Selection } from "./state.js";
import { proportionBars, projectionChart, type Bar, type ProjectionChart } from "./charts.js";
import { heatmapCells, type HeatCell } from "./heatmap.js";
import { forceLayout, type Layout } from "./graph.js";
import { isValidBox, toArray, type Box } from "./boxedit.js";
import type { DetectionRecord, GroupDoc, ProjectionSnapshot } from "./types.js";

export interface ClassGuidanceModel {
  bars: Bar[];
}

export async function classGuidance(api: ApiClient, datasetId: string,
                                    width = 640, height = 240): Promise<ClassGuidanceModel> {
  const { proportions } = await api.classProportions(datasetId);
  return { bars: proportionBars(proportions, width, height) };
}

export interface TriageModel {
  classLabel: string;
  detections: DetectionRecord[];
  total: number;
  page: number;
  pageSize: number;
  series: ProjectionSnapshot[];
  chart: ProjectionChart;
}

export class TriageController {
  readonly selection = new Selection();

  constructor(private readonly api: ApiClient,
              private readonly sessionId: string,
              private readonly classLabel: string,
              private readonly pageSize = 24) {}

  async load(page = 0): Promise<TriageModel> {
    const [detections, projection] = await Promise.all([
      this.api.sessionDetections(this.sessionId, {
        class: this.classLabel,
        limit: this.pageSize,
        offset: page * this.pageSize,
      }),
      this.api.projection(this.sessionId, this.classLabel),
    ]);
    this.selection.prune(detections.detections.map((d) => d.id));
    return {
      classLabel: this.classLabel,
      detections: detections.detections,
      total: detections.total,
      page,
      pageSize: this.pageSize,
      series: projection.series,
      chart: projectionChart(projection.series, 640, 240),
    };
  }

  get canEliminate(): boolean {
    return this.selection.size > 0;
  }

  /** Post one atomic elimination for the selection, then refetch. */
  async eliminate(page = 0): Promise<TriageModel> {
    if (!this.canEliminate) throw new Error("nothing selected");
    await this.api.postEvent(this.sessionId, "eliminate_fp",
                             { detection_ids: this.selection.list() });
    this.selection.clear();
    return this.load(page);
  }
}

export class AnnotateController {
  constructor(private readonly api: ApiClient,
              private readonly sessionId: string) {}

  async detectionsForImage(imageId: string): Promise<DetectionRecord[]> {
    const page = await this.api.sessionDetections(this.sessionId,
                                                  { image_id: imageId, limit: 500 });
    return page.detections;
  }

  /** Reject invalid boxes locally; valid ones become events. */
  async resize(detectionId: string, box: Box): Promise<boolean> {
    if (!isValidBox(box)) return false;
    await this.api.postEvent(this.sessionId, "reannotate_bbox",
                             { detection_id: detectionId, bbox: toArray(box) });
    return true;
  }

  async addMissing(imageId: string, classLabel: string, box: Box): Promise<boolean> {
    if (!isValidBox(box)) return false;
    await this.api.postEvent(this.sessionId, "add_false_negative",
                             { image_id: imageId, class: classLabel, bbox: toArray(box) });
    return true;
  }

  /** Export bytes exactly as served; the download must not re-encode them. */
  async exportDownload(): Promise<{ filename: string; text: string }> {
    const text = await this.api.exportText(this.sessionId);
    return { filename: `${this.sessionId}-export.jsonl`, text };
  }
}

export interface TotemModel {
  layout: Layout;
  heatmap: HeatCell[];
  personIds: string[];
  groups: GroupDoc[];
  highlighted: ReadonlySet<string>;
}

export class TotemController {
  private highlight = new Set<string>();

  constructor(private readonly api: ApiClient,
              private readonly datasetId: string) {}

  selectGroup(group: GroupDoc | null): void {
    this.highlight = new Set(group?.members ?? []);
  }

  get highlightedMembers(): ReadonlySet<string> {
    return this.highlight;
  }

  async load(graphThreshold: number, groupThreshold: number,
             groupSize: number, size = 560): Promise<TotemModel> {
    const [graph, similarity, groups] = await Promise.all([
      this.api.totemGraph(this.datasetId, graphThreshold),
      this.api.totemSimilarity(this.datasetId),
      this.api.totemGroups(this.datasetId, groupThreshold, groupSize),
    ]);
    return {
      layout: forceLayout(graph, size, size, {}, this.highlight),
      heatmap: heatmapCells(similarity, size, this.highlight),
      personIds: similarity.person_ids,
      groups: groups.groups,
      highlighted: this.highlight,
    };
  }
}
