// Learner workspace: node-link canvas, parameter panel (basic/advanced),
// trait lookup, clone/exemplar pickers, simulate control, and result charts.
// Every gated control is rendered only when the group's flag is on; the
// server remains the source of truth and the UI offers no hidden paths.

import {
  ABIOTIC_PARAMETERS,
  ADVANCED_PARAMETERS,
  BASIC_PARAMETERS,
  ComponentDoc,
  FlagMap,
  ModelDoc,
} from "../types.js";
import { html, raw } from "../html.js";

const NODE_RADIUS = 42;

function nodePositions(components: ComponentDoc[], width = 560, height = 360) {
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) / 2 - NODE_RADIUS - 8;
  return new Map(
    components.map((c, i) => {
      const angle = (2 * Math.PI * i) / Math.max(1, components.length) - Math.PI / 2;
      return [c.id, { x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle) }];
    }),
  );
}

export function renderCanvas(model: ModelDoc): string {
  const pos = nodePositions(model.components);
  const edges = model.relationships
    .map((r) => {
      const a = pos.get(r.source);
      const b = pos.get(r.target);
      if (!a || !b) return "";
      return html`<g class="edge edge-${r.kind}" data-rel="${r.id}">
        <line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)" />
        <text x="${(a.x + b.x) / 2}" y="${(a.y + b.y) / 2 - 4}">${r.kind} ${r.rate}</text>
      </g>`;
    })
    .join("");
  const nodes = model.components
    .map((c) => {
      const p = pos.get(c.id)!;
      return html`<g class="node node-${c.kind}" data-component="${c.id}">
        <circle cx="${p.x}" cy="${p.y}" r="${NODE_RADIUS}" />
        <text x="${p.x}" y="${p.y}" text-anchor="middle">${c.name}</text>
      </g>`;
    })
    .join("");
  return html`<svg class="canvas" viewBox="0 0 560 360" role="img" aria-label="model canvas">
    <defs>
      <marker id="arrow" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto">
        <path d="M0,0 L8,4 L0,8 z" />
      </marker>
    </defs>
    ${raw(edges)}${raw(nodes)}
  </svg>`;
}

function parameterInputs(component: ComponentDoc, names: readonly string[]): string {
  return names
    .filter((n) => n in component.params)
    .map(
      (n) => html`<label class="param">
        <span>${n.replace(/_/g, " ")}</span>
        <input name="param:${component.id}:${n}" value="${component.params[n]}" />
      </label>`,
    )
    .join("");
}

export function renderParameterPanel(component: ComponentDoc, flags: FlagMap): string {
  if (component.kind === "abiotic") {
    return html`<div class="parameter-panel" data-component="${component.id}">
      <h4>${component.name}</h4>
      <section class="basic-params">${raw(parameterInputs(component, ABIOTIC_PARAMETERS))}</section>
    </div>`;
  }
  const advanced = flags.advanced_parameters
    ? html`<details class="advanced-params">
        <summary>Advanced parameters</summary>
        ${raw(parameterInputs(component, ADVANCED_PARAMETERS))}
      </details>`
    : "";
  return html`<div class="parameter-panel" data-component="${component.id}">
    <h4>${component.name}</h4>
    <section class="basic-params">${raw(parameterInputs(component, BASIC_PARAMETERS))}</section>
    ${raw(advanced)}
  </div>`;
}

export interface WorkspaceState {
  model: ModelDoc | null;
  flags: FlagMap;
  selectedComponent: string | null;
  welcomeDocUrl: string | null;
  exitDocUrl: string | null;
}

export function renderWorkspace(state: WorkspaceState): string {
  const { model, flags } = state;

  const pickers = [
    html`<button type="button" id="new-model">New blank model</button>`,
    flags.exemplar_models
      ? html`<button type="button" id="pick-exemplar">Start from exemplar</button>`
      : "",
    flags.cloning && model
      ? html`<button type="button" id="clone-model" data-model="${model.id}">Clone model</button>`
      : "",
  ].join("");

  const traitControl =
    flags.lookup_eol && model
      ? html`<div class="trait-lookup">
          <input id="trait-name" placeholder="Species name" />
          <button type="button" id="lookup-traits">Look up traits</button>
          <button type="button" id="apply-traits">Apply to selected</button>
        </div>`
      : "";

  const simulateControl =
    flags.simulation && model
      ? html`<div class="simulate">
          <label>runs <input id="sim-runs" type="number" value="10" /></label>
          <label>months <input id="sim-steps" type="number" value="24" /></label>
          <label>seed <input id="sim-seed" type="number" value="0" /></label>
          <button type="button" id="run-simulation" data-model="${model.id}">Simulate</button>
        </div>`
      : "";

  const selected = model?.components.find((c) => c.id === state.selectedComponent) ?? null;
  const panel = selected ? renderParameterPanel(selected, flags) : "";

  const docLinks = [
    state.welcomeDocUrl
      ? html`<a id="welcome-doc" href="${state.welcomeDocUrl}">Welcome page</a>`
      : "",
    state.exitDocUrl ? html`<a id="exit-doc" href="${state.exitDocUrl}">Exit page</a>` : "",
  ].join(" ");

  return html`<section class="workspace">
    <header class="docs">${raw(docLinks)}</header>
    <div class="toolbar">${raw(pickers)}${raw(traitControl)}${raw(simulateControl)}</div>
    <div class="editor">
      ${raw(model ? renderCanvas(model) : html`<p class="empty">No model yet.</p>`)}
      <aside>${raw(panel)}</aside>
    </div>
    <div id="charts"></div>
  </section>`;
}

// -- charts -------------------------------------------------------------------

export function renderSeriesChart(series: Record<string, number[][]>): string {
  const width = 560;
  const height = 220;
  const names = Object.keys(series).sort();
  const all = names.flatMap((n) => series[n].flat());
  const peak = Math.max(1, ...all);
  const colors = ["#4878a8", "#e08a3c", "#5ca05c", "#b05454", "#8064a2"];
  const lines = names
    .map((name, idx) => {
      const runs = series[name];
      const paths = runs
        .map((run) => {
          const points = run
            .map((v, t) => {
              const x = (t / Math.max(1, run.length - 1)) * (width - 60) + 50;
              const y = height - 30 - (v / peak) * (height - 50);
              return `${x.toFixed(1)},${y.toFixed(1)}`;
            })
            .join(" ");
          return html`<polyline fill="none" stroke="${colors[idx % colors.length]}"
            opacity="0.6" points="${points}" data-component="${name}" />`;
        })
        .join("");
      return paths;
    })
    .join("");
  const legend = names
    .map(
      (name, idx) =>
        html`<text x="55" y="${16 + idx * 14}" fill="${colors[idx % colors.length]}">${name}</text>`,
    )
    .join("");
  return html`<svg class="series-chart" viewBox="0 0 ${width} ${height}">
    ${raw(lines)}${raw(legend)}
  </svg>`;
}

export function renderHistogram(bins: { lo: number; hi: number; count: number }[]): string {
  const width = 560;
  const height = 160;
  const peak = Math.max(1, ...bins.map((b) => b.count));
  const barWidth = (width - 60) / Math.max(1, bins.length);
  const bars = bins
    .map((b, i) => {
      const h = (b.count / peak) * (height - 40);
      const x = 50 + i * barWidth;
      return html`<rect class="hist-bar" x="${x.toFixed(1)}" y="${(height - 20 - h).toFixed(1)}"
        width="${(barWidth - 2).toFixed(1)}" height="${h.toFixed(1)}"
        data-count="${b.count}"><title>[${b.lo}, ${b.hi}) -> ${b.count}</title></rect>`;
    })
    .join("");
  return html`<svg class="histogram" viewBox="0 0 ${width} ${height}">${raw(bars)}</svg>`;
}

/** Edge-creation affordance mirrors the server's relationship typing so the
 * picker never offers an edge the API would reject. */
export function allowedTargets(
  source: ComponentDoc,
  kind: "consumes" | "produces" | "destroys",
  components: ComponentDoc[],
): ComponentDoc[] {
  return components.filter((target) => {
    if (target.id === source.id) return false;
    if (kind === "consumes") return source.kind === "biotic";
    if (kind === "produces") return source.kind === "biotic" && target.kind === "abiotic";
    return source.kind === "abiotic" && target.kind === "biotic";
  });
}
