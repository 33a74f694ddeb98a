/** Browser bootstrap: hash routing, view rendering, canvas interactions. */

import { ApiClient, ApiError } from "./api.js";
import { applyDrag, boxFromDrag, hitHandle, isValidBox, toBox,
         type Box, type Handle } from "./boxedit.js";
import { bandPath, polylinePath } from "./charts.js";
import { decodeHash, encodeHash, type ViewState } from "./state.js";
import { banner, clear, el, svg } from "./render.js";
import { AnnotateController, TotemController, TriageController,
         classGuidance } from "./views.js";
import type { DetectionRecord } from "./types.js";

const api = new ApiClient(
  (window as unknown as { DETLENS_API?: string }).DETLENS_API ?? "http://127.0.0.1:8000");
const root = document.getElementById("app") as HTMLElement;

let state: ViewState = decodeHash(location.hash);

function navigate(patch: Partial<ViewState>): void {
  state = { ...state, ...patch };
  location.hash = encodeHash(state);
}

window.addEventListener("hashchange", () => {
  state = decodeHash(location.hash);
  void render();
});

function header(): HTMLElement {
  const bar = el("header");
  for (const view of ["classes", "triage", "annotate", "totem"] as const) {
    const link = el("button", { class: state.view === view ? "active" : "" }, view);
    link.onclick = () => navigate({ view });
    bar.append(link);
  }
  return bar;
}

async function ensureSession(): Promise<string> {
  if (state.sessionId) return state.sessionId;
  if (!state.datasetId) throw new ApiError(0, "no_dataset", "pick a dataset first");
  const created = await api.createSession(state.datasetId);
  navigate({ sessionId: created.session_id });
  return created.session_id;
}

async function renderDatasets(container: HTMLElement): Promise<void> {
  const { datasets } = await api.listDatasets();
  if (datasets.length === 0) {
    container.append(banner("No datasets loaded yet. POST /datasets on the service, " +
      "then refresh.", "info"));
    return;
  }
  const picker = el("div", { class: "datasets" });
  for (const entry of datasets) {
    const button = el("button",
      { class: state.datasetId === entry.dataset_id ? "active" : "" },
      entry.dataset_id);
    button.onclick = () => navigate({ datasetId: entry.dataset_id,
                                      sessionId: undefined });
    picker.append(button);
  }
  container.append(picker);
}

async function renderClasses(container: HTMLElement): Promise<void> {
  if (!state.datasetId) return;
  const model = await classGuidance(api, state.datasetId);
  if (model.bars.length === 0) {
    container.append(banner("Dataset has no detections.", "info"));
    return;
  }
  const chart = svg("svg", { viewBox: "0 0 640 270", class: "chart" });
  for (const bar of model.bars) {
    const g = svg("g", { transform: `translate(${bar.x},0)` });
    const rect = svg("rect", { x: 0, y: bar.y, width: bar.width, height: bar.height,
                               class: "bar" });
    rect.addEventListener("click", () => navigate({ view: "triage",
                                                    classLabel: bar.label, page: 0 }));
    g.append(rect,
             svg("text", { x: bar.width / 2, y: 262, "text-anchor": "middle" },
                 `${bar.label} ${(bar.value * 100).toFixed(0)}%`));
    chart.append(g);
  }
  container.append(el("h2", {}, "classes most likely to hide false positives"), chart);
}

function drawProjection(container: HTMLElement,
                        chart: ReturnType<typeof import("./charts.js").projectionChart>): void {
  const plot = svg("svg", { viewBox: "-30 -10 700 270", class: "chart" });
  for (const y of chart.gridY) {
    plot.append(svg("line", { x1: 0, y1: y, x2: 640, y2: y, class: "grid" }));
  }
  plot.append(svg("path", { d: bandPath(chart.band), class: "band" }));
  plot.append(svg("path", { d: polylinePath(chart.points), class: "series" }));
  for (const point of chart.points) {
    plot.append(svg("circle", { cx: point.x, cy: point.y, r: 4, class: "dot" }));
    plot.append(svg("text", { x: point.x, y: point.y - 10, "text-anchor": "middle" },
                    `${point.mean.toFixed(3)} (n=${point.n})`));
  }
  container.append(plot);
}

async function renderTriage(container: HTMLElement): Promise<void> {
  if (!state.datasetId || !state.classLabel) {
    container.append(banner("Pick a class from the classes view first.", "info"));
    return;
  }
  const sessionId = await ensureSession();
  const controller = new TriageController(api, sessionId, state.classLabel);
  let model = await controller.load(state.page);

  const redraw = () => {
    clear(container);
    container.append(el("h2", {}, `triage: ${model.classLabel} ` +
      `(${model.total} active detections)`));
    const grid = el("div", { class: "grid" });
    for (const det of model.detections) {
      grid.append(detectionCard(det, controller));
    }
    const actions = el("div", { class: "actions" });
    const eliminate = el("button", {}, `Eliminate ${controller.selection.size} selected`);
    (eliminate as HTMLButtonElement).disabled = !controller.canEliminate;
    eliminate.onclick = async () => {
      try {
        model = await controller.eliminate(model.page);
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          model = await controller.load(model.page);
          container.prepend(banner("Someone already eliminated part of the " +
            "selection; grid refreshed."));
        } else {
          throw error;
        }
      }
      redraw();
    };
    const pager = el("div", { class: "pager" });
    const prev = el("button", {}, "prev");
    const next = el("button", {}, "next");
    (prev as HTMLButtonElement).disabled = model.page === 0;
    (next as HTMLButtonElement).disabled =
      (model.page + 1) * model.pageSize >= model.total;
    prev.onclick = async () => { model = await controller.load(model.page - 1); redraw(); };
    next.onclick = async () => { model = await controller.load(model.page + 1); redraw(); };
    pager.append(prev, next);
    actions.append(eliminate, pager);
    container.append(grid, actions,
                     el("h3", {}, "projected class confidence"),);
    drawProjection(container, model.chart);
  };

  function detectionCard(det: DetectionRecord, ctl: TriageController): HTMLElement {
    const card = el("div", { class: ctl.selection.has(det.id) ? "card selected" : "card" });
    const crop = el("div", { class: "crop" });
    const img = el("img", { src: api.imageUrl(det.image_id), alt: det.image_id });
    img.onerror = () => { img.replaceWith(el("div", { class: "noimg" }, det.image_id)); };
    img.onload = () => {
      const [x1, y1, x2, y2] = det.bbox;
      const overlay = svg("svg", {
        viewBox: `0 0 ${img.naturalWidth} ${img.naturalHeight}`, class: "overlay" });
      overlay.append(svg("rect", { x: x1, y: y1, width: x2 - x1, height: y2 - y1,
                                   class: "bbox" }));
      crop.append(overlay);
    };
    crop.append(img);
    card.append(crop, el("div", { class: "meta" },
                         `${det.id} conf=${det.confidence.toFixed(2)}`));
    card.onclick = () => { ctl.selection.toggle(det.id); redraw(); };
    return card;
  }

  redraw();
}

async function renderAnnotate(container: HTMLElement): Promise<void> {
  const sessionId = await ensureSession();
  const controller = new AnnotateController(api, sessionId);
  const imageId = state.imageId
    ?? (await api.sessionDetections(sessionId, { limit: 1 })).detections[0]?.image_id;
  if (!imageId) {
    container.append(banner("No detections to annotate.", "info"));
    return;
  }

  container.append(el("h2", {}, `re-annotate ${imageId}`));
  const canvas = el("canvas", { width: "720", height: "480" }) as HTMLCanvasElement;
  const context = canvas.getContext("2d")!;
  const image = new Image();
  image.src = api.imageUrl(imageId);
  let detections = await controller.detectionsForImage(imageId);
  let scale = 1;

  function paint(extra?: Box): void {
    context.clearRect(0, 0, canvas.width, canvas.height);
    if (image.complete && image.naturalWidth) {
      scale = Math.min(canvas.width / image.naturalWidth,
                       canvas.height / image.naturalHeight);
      context.drawImage(image, 0, 0, image.naturalWidth * scale,
                        image.naturalHeight * scale);
    }
    context.lineWidth = 2;
    for (const det of detections) {
      const [x1, y1, x2, y2] = det.bbox;
      context.strokeStyle = "#d9480f";
      context.strokeRect(x1 * scale, y1 * scale, (x2 - x1) * scale, (y2 - y1) * scale);
      context.fillStyle = "#d9480f";
      context.fillText(`${det.class} ${det.confidence.toFixed(2)}`,
                       x1 * scale + 2, y1 * scale + 12);
    }
    if (extra) {
      context.strokeStyle = "#1864ab";
      context.strokeRect(extra.x1 * scale, extra.y1 * scale,
                         (extra.x2 - extra.x1) * scale, (extra.y2 - extra.y1) * scale);
    }
  }

  image.onload = () => paint();
  paint();

  let dragging: { det: DetectionRecord; handle: Handle; startX: number; startY: number;
                  box: Box } | null = null;
  let drawing: { startX: number; startY: number } | null = null;

  const toImage = (event: MouseEvent): { x: number; y: number } => {
    const rect = canvas.getBoundingClientRect();
    return { x: (event.clientX - rect.left) / scale,
             y: (event.clientY - rect.top) / scale };
  };

  canvas.onmousedown = (event) => {
    const { x, y } = toImage(event);
    for (const det of detections) {
      const handle = hitHandle(toBox(det.bbox), x, y, 8 / scale);
      if (handle) {
        dragging = { det, handle, startX: x, startY: y, box: toBox(det.bbox) };
        return;
      }
    }
    drawing = { startX: x, startY: y };
  };

  canvas.onmousemove = (event) => {
    const { x, y } = toImage(event);
    if (dragging) {
      const candidate = applyDrag(dragging.box, dragging.handle,
                                  x - dragging.startX, y - dragging.startY);
      detections = detections.map((d) => d.id === dragging!.det.id
        ? { ...d, bbox: [candidate.x1, candidate.y1, candidate.x2, candidate.y2] } : d);
      paint();
    } else if (drawing) {
      const candidate = boxFromDrag(drawing.startX, drawing.startY, x, y);
      paint(candidate ?? undefined);
    }
  };

  canvas.onmouseup = async (event) => {
    const { x, y } = toImage(event);
    if (dragging) {
      const candidate = applyDrag(dragging.box, dragging.handle,
                                  x - dragging.startX, y - dragging.startY);
      if (isValidBox(candidate) && await controller.resize(dragging.det.id, candidate)) {
        detections = await controller.detectionsForImage(imageId);
      } else {
        detections = await controller.detectionsForImage(imageId);
        container.prepend(banner("Invalid box rejected."));
      }
      dragging = null;
      paint();
    } else if (drawing) {
      const candidate = boxFromDrag(drawing.startX, drawing.startY, x, y);
      drawing = null;
      if (candidate) {
        const classLabel = classPicker.value;
        if (classLabel && await controller.addMissing(imageId, classLabel, candidate)) {
          detections = await controller.detectionsForImage(imageId);
        }
      }
      paint();
    }
  };

  const classPicker = el("select") as HTMLSelectElement;
  if (state.datasetId) {
    const { classes } = await api.classes(state.datasetId);
    for (const entry of classes) {
      classPicker.append(el("option", { value: entry.class }, entry.class));
    }
  }
  const exportButton = el("button", {}, "Export annotations");
  exportButton.onclick = async () => {
    const { filename, text } = await controller.exportDownload();
    const link = el("a", {
      href: URL.createObjectURL(new Blob([text], { type: "application/x-ndjson" })),
      download: filename,
    });
    link.click();
  };
  container.append(canvas,
                   el("div", { class: "actions" }, "draw on empty space to add a "
                     + "missed object as:"),
                   classPicker, exportButton);
}

async function renderTotem(container: HTMLElement): Promise<void> {
  if (!state.datasetId) return;
  const controller = new TotemController(api, state.datasetId);
  let model = await controller.load(state.graphThreshold, state.groupThreshold,
                                    state.groupSize);

  const redraw = () => {
    clear(container);
    container.append(el("h2", {}, "shared-object graph and similarity"));

    const controls = el("div", { class: "actions" });
    const slider = el("input", { type: "range", min: "1", max: "5",
                                 value: String(state.graphThreshold) }) as HTMLInputElement;
    slider.onchange = () => navigate({ graphThreshold: Number(slider.value) });
    controls.append(el("span", {}, `edge threshold ${state.graphThreshold}`), slider);

    const graphSvg = svg("svg", { viewBox: "0 0 560 560", class: "chart graph" });
    for (const edge of model.layout.edges) {
      graphSvg.append(svg("line", { x1: edge.x1, y1: edge.y1, x2: edge.x2, y2: edge.y2,
                                    class: "edge", "stroke-width": edge.weight }));
    }
    for (const node of model.layout.nodes) {
      graphSvg.append(svg("circle", { cx: node.x, cy: node.y, r: 8,
        class: node.highlighted ? "node highlighted" : "node" }));
      graphSvg.append(svg("text", { x: node.x, y: node.y - 11,
                                    "text-anchor": "middle" }, node.id));
    }

    const heat = svg("svg", { viewBox: "0 0 560 560", class: "chart heat" });
    for (const cell of model.heatmap) {
      heat.append(svg("rect", { x: cell.x, y: cell.y, width: cell.size,
        height: cell.size, fill: cell.color,
        class: cell.highlighted ? "cell highlighted" : "cell" }));
    }

    const groupsPanel = el("div", { class: "groups" });
    groupsPanel.append(el("h3", {}, `candidate groups (size >= ${state.groupSize}, ` +
      `similarity >= ${state.groupThreshold})`));
    if (model.groups.length === 0) {
      groupsPanel.append(el("p", {}, "none at these settings"));
    }
    for (const group of model.groups) {
      const button = el("button", {},
        `${group.members.join(", ")} (weakest ${group.min_similarity.toFixed(2)})`);
      button.onclick = async () => {
        controller.selectGroup(group);
        model = await controller.load(state.graphThreshold, state.groupThreshold,
                                      state.groupSize);
        redraw();
      };
      groupsPanel.append(button);
    }

    const split = el("div", { class: "split" });
    split.append(graphSvg, heat);
    container.append(controls, split, groupsPanel);
  };

  redraw();
}

async function render(): Promise<void> {
  clear(root);
  root.append(header());
  const container = el("main");
  root.append(container);
  try {
    await renderDatasets(container);
    if (state.view === "classes") await renderClasses(container);
    else if (state.view === "triage") await renderTriage(container);
    else if (state.view === "annotate") await renderAnnotate(container);
    else await renderTotem(container);
  } catch (error) {
    if (error instanceof ApiError) {
      const note = banner(`${error.code}: ${error.message}`);
      const retry = el("button", {}, "retry");
      retry.onclick = () => void render();
      note.append(retry);
      container.append(note);
    } else {
      container.append(banner(`unexpected error: ${String(error)}`));
      throw error;
    }
  }
}

void render();
