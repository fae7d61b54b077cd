// SPA shell: hash routing between the researcher screens and the learner
// workspace. State refreshes from server responses after every mutation;
// there is no optimistic rendering.

import { ApiClient, ApiError } from "./api.js";
import { errorNotice } from "./html.js";
import { renderDashboard } from "./views/dashboard.js";
import {
  collectFormValues,
  emptyFormState,
  readFormState,
  renderExperimentForm,
  toCreateRequest,
} from "./views/experimentForm.js";
import { renderLinks } from "./views/links.js";
import {
  WorkspaceState,
  renderHistogram,
  renderSeriesChart,
  renderWorkspace,
} from "./views/workspace.js";
import { JoinResponse } from "./types.js";

const ANALYTICS_POLL_MS = 10_000;

const api = new ApiClient("");
let pollTimer: number | null = null;

const workspace: WorkspaceState = {
  model: null,
  flags: {
    advanced_parameters: false,
    cloning: false,
    exemplar_models: false,
    lookup_eol: false,
    simulation: false,
  },
  selectedComponent: null,
  welcomeDocUrl: null,
  exitDocUrl: null,
};
let session: JoinResponse | null = null;

function root(): HTMLElement {
  return document.getElementById("app")!;
}

function showError(err: unknown): void {
  const box = document.getElementById("messages")!;
  if (err instanceof ApiError) {
    box.innerHTML = errorNotice(err.body.code, err.body.message);
  } else {
    box.innerHTML = errorNotice("validation_error", String(err));
  }
}

function clearMessages(): void {
  document.getElementById("messages")!.innerHTML = "";
}

async function routeResearcherNew(): Promise<void> {
  const token = window.sessionStorage.getItem("researcherToken") ?? "";
  if (!token) {
    const entered = window.prompt("Researcher token:") ?? "";
    window.sessionStorage.setItem("researcherToken", entered);
  }
  api.setToken(window.sessionStorage.getItem("researcherToken"));
  root().innerHTML = renderExperimentForm(emptyFormState());
  const form = document.getElementById("experiment-form") as HTMLFormElement;
  document.getElementById("add-phase")!.addEventListener("click", () => {
    const index = form.querySelectorAll(".phase-row").length;
    const holder = document.createElement("div");
    holder.innerHTML = `<fieldset class="phase-row">
      <input name="phase:${index}:name" placeholder="Phase name" />
      <input name="phase:${index}:start" placeholder="start (RFC 3339)" />
      <input name="phase:${index}:end" placeholder="end (RFC 3339)" />
    </fieldset>`;
    document.getElementById("phases")!.appendChild(holder.firstElementChild!);
  });
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearMessages();
    try {
      const state = readFormState(collectFormValues(form));
      for (const [slot, name] of [["welcome_doc", "welcomeDocB64"], ["exit_doc", "exitDocB64"]] as const) {
        const input = form.querySelector<HTMLInputElement>(`input[name="${slot}"]`);
        const file = input?.files?.[0];
        if (file) {
          (state as unknown as Record<string, unknown>)[name] = await fileToB64(file);
        }
      }
      const created = await api.createExperiment(toCreateRequest(state));
      root().innerHTML = renderLinks(created.experiment, created.links);
      window.location.hash = `#/researcher/${created.experiment.id}/links`;
    } catch (err) {
      showError(err);
    }
  });
}

async function fileToB64(file: File): Promise<string> {
  const bytes = new Uint8Array(await file.arrayBuffer());
  let binary = "";
  bytes.forEach((b) => (binary += String.fromCharCode(b)));
  return btoa(binary);
}

async function routeLinks(experimentId: string): Promise<void> {
  api.setToken(window.sessionStorage.getItem("researcherToken"));
  const [experiment, links] = await Promise.all([
    api.getExperiment(experimentId),
    api.getLinks(experimentId),
  ]);
  root().innerHTML = renderLinks(experiment, links.links);
  root().addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("copy-link")) {
      void navigator.clipboard.writeText(target.dataset["link"] ?? "");
    }
  });
}

async function routeDashboard(experimentId: string): Promise<void> {
  api.setToken(window.sessionStorage.getItem("researcherToken"));
  const refresh = async () => {
    const report = await api.getAnalytics(experimentId);
    root().innerHTML =
      renderDashboard(report) +
      `<p><a href="${api.exportUrl(experimentId)}" id="export-link">Download export bundle</a></p>`;
  };
  await refresh();
  if (pollTimer !== null) window.clearInterval(pollTimer);
  pollTimer = window.setInterval(() => void refresh().catch(showError), ANALYTICS_POLL_MS);
}

async function routeJoin(params: URLSearchParams): Promise<void> {
  session = await api.join(params);
  api.setToken(session.token);
  workspace.flags = session.flags;
  workspace.welcomeDocUrl = session.welcome_doc;
  workspace.exitDocUrl = session.exit_doc;
  window.location.hash = "#/workspace";
}

function redrawWorkspace(): void {
  root().innerHTML = renderWorkspace(workspace);
  wireWorkspace();
}

function wireWorkspace(): void {
  const modelId = workspace.model?.id;
  document.getElementById("new-model")?.addEventListener("click", async () => {
    try {
      workspace.model = await api.createModel({ name: `model ${Date.now()}` });
      workspace.selectedComponent = null;
      redrawWorkspace();
    } catch (err) {
      showError(err);
    }
  });
  document.getElementById("pick-exemplar")?.addEventListener("click", async () => {
    try {
      const { exemplars } = await api.listExemplars();
      const name = window.prompt(
        `Exemplar name (${exemplars.map((e) => e.name).join(", ")}):`,
        exemplars[0]?.name ?? "",
      );
      if (!name) return;
      workspace.model = await api.createModel({ exemplar: name });
      workspace.selectedComponent = null;
      redrawWorkspace();
    } catch (err) {
      showError(err);
    }
  });
  document.getElementById("clone-model")?.addEventListener("click", async () => {
    if (!modelId) return;
    try {
      workspace.model = await api.cloneModel(modelId);
      redrawWorkspace();
    } catch (err) {
      showError(err);
    }
  });
  document.querySelectorAll<SVGGElement>(".node").forEach((node) => {
    node.addEventListener("click", () => {
      workspace.selectedComponent = node.dataset["component"] ?? null;
      redrawWorkspace();
    });
  });
  document.querySelectorAll<HTMLInputElement>("input[name^='param:']").forEach((input) => {
    input.addEventListener("change", async () => {
      const [, componentId, parameter] = input.name.split(":");
      if (!modelId) return;
      clearMessages();
      try {
        await api.setParameter(modelId, {
          component: componentId,
          parameter,
          value: Number(input.value),
        });
        workspace.model = await api.getModel(modelId);
        redrawWorkspace();
      } catch (err) {
        showError(err);
      }
    });
  });
  document.getElementById("lookup-traits")?.addEventListener("click", async () => {
    const name = (document.getElementById("trait-name") as HTMLInputElement).value;
    clearMessages();
    try {
      const record = await api.lookupTraits(name);
      window.alert(`${record.canonical_name}: ${JSON.stringify(record.params)}`);
    } catch (err) {
      showError(err);
    }
  });
  document.getElementById("apply-traits")?.addEventListener("click", async () => {
    if (!modelId || !workspace.selectedComponent) return;
    clearMessages();
    try {
      await api.applyTraits(modelId, { component: workspace.selectedComponent });
      workspace.model = await api.getModel(modelId);
      redrawWorkspace();
    } catch (err) {
      showError(err);
    }
  });
  document.getElementById("run-simulation")?.addEventListener("click", async () => {
    if (!modelId || !workspace.model) return;
    clearMessages();
    try {
      const runs = Number((document.getElementById("sim-runs") as HTMLInputElement).value);
      const steps = Number((document.getElementById("sim-steps") as HTMLInputElement).value);
      const seed = Number((document.getElementById("sim-seed") as HTMLInputElement).value);
      const started = await api.simulate(modelId, { runs, steps, seed });
      let batch = await api.getBatch(started.batch);
      while (batch.status === "pending") {
        await new Promise((resolve) => setTimeout(resolve, 500));
        batch = await api.getBatch(started.batch);
      }
      const charts = document.getElementById("charts")!;
      if (batch.status === "done" && batch.series) {
        const first = workspace.model.components[0]?.name;
        const aggregate = first ? await api.getAggregate(started.batch, first) : null;
        charts.innerHTML =
          renderSeriesChart(batch.series) +
          (aggregate ? renderHistogram(aggregate.bins) : "");
      } else {
        charts.textContent = batch.error ?? "simulation failed";
      }
    } catch (err) {
      showError(err);
    }
  });
}

async function route(): Promise<void> {
  clearMessages();
  const hash = window.location.hash || "#/researcher/new";
  try {
    if (hash.startsWith("#/join?")) {
      await routeJoin(new URLSearchParams(hash.slice("#/join?".length)));
    } else if (hash === "#/workspace") {
      redrawWorkspace();
    } else if (hash === "#/researcher/new") {
      await routeResearcherNew();
    } else {
      const match = hash.match(/^#\/researcher\/([^/]+)\/(links|dashboard)$/);
      if (match && match[2] === "links") await routeLinks(match[1]);
      else if (match) await routeDashboard(match[1]);
      else await routeResearcherNew();
    }
  } catch (err) {
    showError(err);
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
