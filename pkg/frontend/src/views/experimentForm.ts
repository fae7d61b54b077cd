// Researcher experiment designer: name, the 2x5 feature-flag toggle matrix,
// PDF slots, assignment mode, and phase windows. The form state round-trips
// through render + read so nothing is lost between screen and request body.

import { FEATURE_FLAGS, FeatureFlag, FlagMap } from "../types.js";
import { html, raw } from "../html.js";

export interface PhaseInput {
  name: string;
  start: string; // RFC 3339
  end: string;
}

export interface ExperimentFormState {
  name: string;
  mode: "manual" | "random";
  flags: [FlagMap, FlagMap]; // group A, group B
  phases: PhaseInput[];
  welcomeDocB64: string | null;
  exitDocB64: string | null;
  seed: number;
}

export function allEnabled(): FlagMap {
  const flags = {} as FlagMap;
  for (const f of FEATURE_FLAGS) flags[f] = true;
  return flags;
}

export function emptyFormState(): ExperimentFormState {
  return {
    name: "",
    mode: "manual",
    flags: [allEnabled(), allEnabled()],
    phases: [],
    welcomeDocB64: null,
    exitDocB64: null,
    seed: 0,
  };
}

const FLAG_LABELS: Record<FeatureFlag, string> = {
  advanced_parameters: "Advanced parameters",
  cloning: "Cloning",
  exemplar_models: "Exemplar models",
  lookup_eol: "Species lookup",
  simulation: "Simulation",
};

export function renderExperimentForm(state: ExperimentFormState): string {
  const rows = FEATURE_FLAGS.map((flag) => {
    const cells = [0, 1]
      .map((g) => {
        const checked = state.flags[g as 0 | 1][flag] ? " checked" : "";
        return html`<td>
          <input type="checkbox" name="flag:${g}:${flag}"${raw(checked)} />
        </td>`;
      })
      .join("");
    return html`<tr><th scope="row">${FLAG_LABELS[flag]}</th>${raw(cells)}</tr>`;
  }).join("");

  const phaseRows = state.phases
    .map(
      (p, i) => html`<fieldset class="phase-row">
        <input name="phase:${i}:name" value="${p.name}" placeholder="Phase name" />
        <input name="phase:${i}:start" value="${p.start}" placeholder="start (RFC 3339)" />
        <input name="phase:${i}:end" value="${p.end}" placeholder="end (RFC 3339)" />
      </fieldset>`,
    )
    .join("");

  return html`<form id="experiment-form">
    <label>Experiment name <input name="name" value="${state.name}" required /></label>
    <table class="flag-matrix">
      <thead>
        <tr><th></th><th>Group A</th><th>Group B</th></tr>
      </thead>
      <tbody>${raw(rows)}</tbody>
    </table>
    <fieldset class="mode">
      <label><input type="radio" name="mode" value="manual"${raw(
        state.mode === "manual" ? " checked" : "",
      )} /> Manual assignment (two URLs)</label>
      <label><input type="radio" name="mode" value="random"${raw(
        state.mode === "random" ? " checked" : "",
      )} /> Random assignment (one URL)</label>
    </fieldset>
    <fieldset class="docs">
      <label>Welcome page (PDF) <input type="file" name="welcome_doc" accept="application/pdf" /></label>
      <label>Exit page (PDF) <input type="file" name="exit_doc" accept="application/pdf" /></label>
    </fieldset>
    <div id="phases">${raw(phaseRows)}</div>
    <button type="button" id="add-phase">Add phase</button>
    <label>Seed <input type="number" name="seed" value="${state.seed}" /></label>
    <button type="submit">Create experiment</button>
  </form>`;
}

/** Rebuild the form state from submitted name -> value pairs (checkbox names
 * appear only when checked, mirroring FormData semantics). */
export function readFormState(values: Map<string, string>): ExperimentFormState {
  const flags: [FlagMap, FlagMap] = [{} as FlagMap, {} as FlagMap];
  for (const g of [0, 1] as const) {
    for (const flag of FEATURE_FLAGS) {
      flags[g][flag] = values.has(`flag:${g}:${flag}`);
    }
  }
  const phases: PhaseInput[] = [];
  for (let i = 0; values.has(`phase:${i}:name`); i++) {
    phases.push({
      name: values.get(`phase:${i}:name`) ?? "",
      start: values.get(`phase:${i}:start`) ?? "",
      end: values.get(`phase:${i}:end`) ?? "",
    });
  }
  return {
    name: values.get("name") ?? "",
    mode: values.get("mode") === "random" ? "random" : "manual",
    flags,
    phases,
    welcomeDocB64: values.get("welcome_doc_b64") ?? null,
    exitDocB64: values.get("exit_doc_b64") ?? null,
    seed: Number(values.get("seed") ?? "0"),
  };
}

/** The POST /researcher/experiments body for a form state. */
export function toCreateRequest(state: ExperimentFormState): unknown {
  const body: Record<string, unknown> = {
    name: state.name,
    mode: state.mode,
    seed: state.seed,
    groups: [{ flags: state.flags[0] }, { flags: state.flags[1] }],
    phases: state.phases,
  };
  if (state.welcomeDocB64) body["welcome_doc_b64"] = state.welcomeDocB64;
  if (state.exitDocB64) body["exit_doc_b64"] = state.exitDocB64;
  return body;
}

/** Extract checked/filled entries from a rendered form's DOM (browser side). */
export function collectFormValues(form: HTMLFormElement): Map<string, string> {
  const values = new Map<string, string>();
  const data = new FormData(form);
  data.forEach((value, key) => {
    if (typeof value === "string") values.set(key, value);
  });
  // FormData omits unchecked checkboxes; checked ones arrive as "on"
  return values;
}
