// Wires the pure modules to the DOM: fetch, render, handle clicks. All
// analysis numbers come from the API; this file only places them on screen.

import { ApiClient, ApiError } from "./api.js";
import { Band, buildChart, Layout, Overlay } from "./chart.js";
import { buildOverlay, cycleLabel, LabelValue, uncertainPanel } from "./labeling.js";
import { DEFAULT_PALETTE, Palette, togglePalette } from "./palette.js";
import { fitDomain } from "./scale.js";
import { toSvg } from "./svg.js";
import { alignedDomains, reorder, threadFromPreset, TimelineThread, validateThread } from "./threads.js";
import { EpisodesResponse, HealthDoc, Label, PairRow, ProfileDoc } from "./types.js";
import { bandwidthFor, ZOOM_LEVELS, ZOOM_ORDER } from "./zoom.js";

const MAX_VISIBLE_SEQUENCES = 64;
const MODEL_NAME = "relevant";

interface PairData {
  pair: PairRow;
  profile: ProfileDoc;
  episodes: EpisodesResponse;
}

interface AppState {
  corpus: HealthDoc["corpus"] | null;
  sessionId: string | null;
  zoom: (typeof ZOOM_ORDER)[number];
  layout: Layout;
  palette: Palette;
  minConfidence: number | null;
  overlay: Overlay | null;
  userLabels: Map<string, Label>;
  pairs: PairRow[];
  selected: PairRow[];
  data: Map<string, PairData>;
  thread: TimelineThread | null;
  anchor: "absolute" | "start";
  generation: number;
  message: string;
}

const state: AppState = {
  corpus: null,
  sessionId: null,
  zoom: "medium",
  layout: "horizontal",
  palette: DEFAULT_PALETTE,
  minConfidence: null,
  overlay: null,
  userLabels: new Map(),
  pairs: [],
  selected: [],
  data: new Map(),
  thread: null,
  anchor: "absolute",
  generation: 0,
  message: "",
};

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function pairKey(p: PairRow): string {
  return `${p.a}|${p.b}`;
}

function corpusDomain(): [number, number] {
  const c = state.corpus;
  if (!c || c.t_min === null || c.t_max === null) return [0, 1];
  return [c.t_min, c.t_max];
}

function setMessage(text: string): void {
  state.message = text;
  el("message").textContent = text;
}

async function loadPair(p: PairRow, generation: number): Promise<void> {
  const [t0, t1] = corpusDomain();
  const h = bandwidthFor(ZOOM_LEVELS[state.zoom], t1 - t0);
  const params = { h, from: t0, to: t1, grid_n: 1024 };
  try {
    const [profile, episodes] = await Promise.all([
      api.profile(p.a, p.b, params),
      api.episodes(p.a, p.b, params),
    ]);
    if (generation !== state.generation) return; // stale response, discard
    state.data.set(pairKey(p), { pair: p, profile, episodes });
  } catch (e) {
    if (generation !== state.generation) return;
    state.data.delete(pairKey(p));
    renderFailure(p, e as Error);
  }
}

async function refetchAll(): Promise<void> {
  const generation = ++state.generation;
  await Promise.all(state.selected.map((p) => loadPair(p, generation)));
  if (generation === state.generation) renderCharts();
}

function renderFailure(p: PairRow, err: Error): void {
  const container = el("charts");
  const row = document.createElement("div");
  row.className = "chart-row error";
  row.innerHTML =
    `<span>${p.a} ↔ ${p.b}: ${err.message} </span>` +
    `<button data-retry="${pairKey(p)}">retry</button>`;
  container.appendChild(row);
}

function chartFor(data: PairData, domain: [number, number]): string {
  const geometry = buildChart(data.profile, data.episodes.episodes, {
    width: 960,
    height: 180,
    layout: state.layout,
    palette: state.palette,
    domain,
    overlay: state.overlay
      ? { ...state.overlay, minConfidence: state.minConfidence }
      : null,
    userLabels: state.userLabels,
  });
  return toSvg(geometry, `${data.pair.a} ↔ ${data.pair.b}`);
}

function renderCharts(): void {
  const container = el("charts");
  container.innerHTML = "";
  const grids: Array<[number, number]> = [];
  for (const d of state.data.values()) {
    const g = d.profile.grid;
    grids.push([g.start, g.start + g.step * (g.n - 1)]);
  }
  const fullDomain = fitDomain(corpusDomain(), grids);

  const ranges: Array<{ caption: string; domain: [number, number] }> = [];
  if (state.thread) {
    const domains = alignedDomains(state.thread, state.anchor);
    state.thread.ranges.forEach((r, i) => {
      ranges.push({
        caption: `${state.thread!.label} ${i + 1}: [${r[0]} .. ${r[1]}]`,
        domain: state.anchor === "absolute" ? domains[i] : [r[0], r[1]],
      });
    });
  } else {
    ranges.push({ caption: "", domain: fullDomain });
  }

  for (const p of state.selected) {
    const data = state.data.get(pairKey(p));
    if (!data) continue;
    const row = document.createElement("div");
    row.className = "pair-block";
    const head = document.createElement("div");
    head.className = "pair-head";
    head.textContent = `${p.a} ↔ ${p.b} (${p.total} messages)`;
    row.appendChild(head);
    for (const r of ranges) {
      const slot = document.createElement("div");
      slot.className = "chart-row";
      if (r.caption) {
        const cap = document.createElement("div");
        cap.className = "thread-caption";
        cap.textContent = r.caption;
        slot.appendChild(cap);
      }
      const holder = document.createElement("div");
      holder.innerHTML = chartFor(data, r.domain);
      slot.appendChild(holder);
      row.appendChild(slot);
    }
    container.appendChild(row);
  }
}

function renderPairPicker(): void {
  const picker = el("pair-picker");
  const needle = (el<HTMLInputElement>("pair-search").value || "").toLowerCase();
  const matching = state.pairs.filter(
    (p) => p.a.toLowerCase().includes(needle) || p.b.toLowerCase().includes(needle),
  );
  picker.innerHTML = "";
  for (const p of matching.slice(0, 200)) {
    const item = document.createElement("button");
    item.className = "pick";
    item.dataset.pick = pairKey(p);
    const on = state.selected.some((s) => pairKey(s) === pairKey(p));
    item.textContent = `${on ? "✓ " : ""}${p.a} ↔ ${p.b} (${p.total})`;
    picker.appendChild(item);
  }
}

async function refreshOverlay(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const preds = await api.predictions(state.sessionId, MODEL_NAME, 0, "any");
    state.overlay = buildOverlay(preds.predictions, state.minConfidence);
    const uncertain = await api.uncertain(state.sessionId, MODEL_NAME, 20);
    const panel = el("uncertain");
    panel.innerHTML = "";
    for (const row of uncertainPanel(uncertain.uncertain)) {
      const item = document.createElement("button");
      item.className = "uncertain-row";
      item.dataset.goto = row.ref;
      item.textContent = row.caption;
      panel.appendChild(item);
    }
    renderCharts();
  } catch (e) {
    if ((e as ApiError).code === "unknown-class") return; // nothing trained yet
    setMessage((e as Error).message);
  }
}

async function onTrain(): Promise<void> {
  if (!state.sessionId) return;
  setMessage("training…");
  try {
    const result = await api.train(state.sessionId, MODEL_NAME, {});
    const stale = result.stale_labels.length
      ? `, ${result.stale_labels.length} stale label(s) included`
      : "";
    setMessage(`model v${result.version} trained on ${result.trained_on}${stale}`);
    await refreshOverlay();
  } catch (e) {
    const err = e as ApiError;
    if (err.code === "needs-both-classes" || err.code === "empty-training") {
      setMessage(
        "label at least one relevant and one irrelevant episode, then train again",
      );
    } else {
      setMessage(err.message);
    }
  }
}

async function onBandClick(ref: string): Promise<void> {
  if (!state.sessionId) {
    const session = await api.createSession();
    state.sessionId = session.id;
  }
  const current: LabelValue = state.userLabels.get(ref) ?? null;
  const next = cycleLabel(current);
  if (next === null) {
    state.userLabels.delete(ref); // cleared locally; the store keeps history
    renderCharts();
    return;
  }
  state.userLabels.set(ref, next);
  renderCharts();
  try {
    await api.putLabel(state.sessionId, ref, next);
  } catch (e) {
    setMessage((e as Error).message);
  }
}

function bandAt(target: EventTarget | null): string | null {
  if (!(target instanceof Element)) return null;
  const rect = target.closest("rect.band");
  return rect ? rect.getAttribute("data-ref") : null;
}

async function applyThreadPreset(name: string): Promise<void> {
  const [t0, t1] = corpusDomain();
  if (name === "none") {
    state.thread = null;
  } else {
    const thread = threadFromPreset(
      name as "days" | "months" | "years" | "weekday",
      t0,
      t1,
      state.layout,
    );
    const problem = validateThread(thread);
    if (problem) {
      setMessage(problem);
      return;
    }
    state.thread = thread;
  }
  if (state.sessionId) {
    await api
      .putView(state.sessionId, {
        zoom: state.zoom,
        thread: state.thread,
        anchor: state.anchor,
      })
      .catch(() => undefined);
  }
  renderCharts();
}

function moveThreadRange(delta: number): void {
  if (!state.thread || state.thread.ranges.length < 2) return;
  const from = 0;
  const to = Math.min(state.thread.ranges.length - 1, Math.max(0, from + delta));
  state.thread = { ...state.thread, ranges: reorder(state.thread.ranges, from, to) };
  renderCharts();
}

export async function start(): Promise<void> {
  const health = await api.health();
  state.corpus = health.corpus;
  el("corpus-info").textContent =
    `${health.corpus.events} events, ${health.corpus.unordered_pairs} pairs, ` +
    `${health.corpus.span_days} days`;

  const pairsDoc = await api.pairs(1, 2000);
  state.pairs = pairsDoc.pairs;
  state.selected = state.pairs.slice(0, Math.min(8, MAX_VISIBLE_SEQUENCES));
  if (state.pairs.length > MAX_VISIBLE_SEQUENCES) {
    el("picker-wrap").classList.remove("hidden");
    renderPairPicker();
  }

  el("zoom").addEventListener("change", (e) => {
    state.zoom = (e.target as HTMLSelectElement).value as AppState["zoom"];
    void refetchAll();
  });
  el("layout").addEventListener("click", () => {
    state.layout = state.layout === "horizontal" ? "vertical" : "horizontal";
    renderCharts(); // pure re-render, no refetch
  });
  el("palette").addEventListener("click", () => {
    state.palette = togglePalette(state.palette);
    renderCharts();
  });
  el("confidence").addEventListener("input", (e) => {
    const raw = parseFloat((e.target as HTMLInputElement).value);
    state.minConfidence = raw <= 0 ? null : raw;
    el("confidence-value").textContent = raw.toFixed(2);
    renderCharts();
  });
  el("train").addEventListener("click", () => void onTrain());
  el("thread-preset").addEventListener("change", (e) => {
    void applyThreadPreset((e.target as HTMLSelectElement).value);
  });
  el("anchor").addEventListener("change", (e) => {
    state.anchor = (e.target as HTMLSelectElement).value as AppState["anchor"];
    renderCharts();
  });
  el("thread-demote").addEventListener("click", () => moveThreadRange(1));
  el("pair-search").addEventListener("input", renderPairPicker);

  el("pair-picker").addEventListener("click", (e) => {
    const btn = (e.target as Element).closest("button.pick") as HTMLButtonElement | null;
    if (!btn || !btn.dataset.pick) return;
    const key = btn.dataset.pick;
    const found = state.pairs.find((p) => pairKey(p) === key);
    if (!found) return;
    const at = state.selected.findIndex((p) => pairKey(p) === key);
    if (at >= 0) state.selected.splice(at, 1);
    else if (state.selected.length < MAX_VISIBLE_SEQUENCES) state.selected.push(found);
    renderPairPicker();
    void refetchAll();
  });

  el("charts").addEventListener("click", (e) => {
    const retry = (e.target as Element).closest("[data-retry]");
    if (retry) {
      void refetchAll();
      return;
    }
    const ref = bandAt(e.target);
    if (ref) void onBandClick(ref);
  });

  el("uncertain").addEventListener("click", (e) => {
    const btn = (e.target as Element).closest("[data-goto]") as HTMLElement | null;
    if (!btn || !btn.dataset.goto) return;
    const target = document.querySelector(`rect.band[data-ref="${btn.dataset.goto}"]`);
    target?.scrollIntoView({ behavior: "smooth", block: "center" });
  });

  await refetchAll();
}

if (typeof document !== "undefined" && document.getElementById("charts")) {
  void start().catch((e) => {
    const msg = document.getElementById("message");
    if (msg) msg.textContent = `startup failed: ${(e as Error).message}`;
  });
}
