import { describe, expect, it } from "vitest";

import { ComponentDoc, FlagMap, ModelDoc } from "../src/types.js";
import { allEnabled } from "../src/views/experimentForm.js";
import {
  allowedTargets,
  renderCanvas,
  renderHistogram,
  renderParameterPanel,
  renderSeriesChart,
  renderWorkspace,
} from "../src/views/workspace.js";

function component(id: string, name: string, kind: "biotic" | "abiotic"): ComponentDoc {
  const params =
    kind === "biotic"
      ? { lifespan: 24, body_mass: 1, starting_population: 100, offspring_count: 2,
          reproductive_maturity: 6, reproductive_interval: 6, minimum_population: 0,
          photosynthesis_rate: 0, assimilation_efficiency: 1, move_velocity: 0,
          respiratory_rate: 0, move_direction: 0, carbon_biomass: 0 }
      : { amount: 1000, minimum_amount: 0, growth_rate: 0 };
  return { id, name, kind, params };
}

function model(): ModelDoc {
  return {
    id: "m1",
    name: "pond",
    owner: "u1",
    provenance: "fresh",
    components: [
      component("c1", "Grass", "biotic"),
      component("c2", "Ovis aries", "biotic"),
      component("c3", "Light", "abiotic"),
    ],
    relationships: [
      { id: "r1", source: "c2", target: "c1", kind: "consumes", rate: 1.0 },
    ],
    created_at: "2026-01-01T00:00:00Z",
    updated_at: "2026-01-01T00:00:00Z",
  };
}

function workspaceState(flags: FlagMap) {
  return {
    model: model(),
    flags,
    selectedComponent: "c2",
    welcomeDocUrl: "/experiments/e1/docs/welcome",
    exitDocUrl: null,
  };
}

describe("learner workspace", () => {
  it("simulation-disabled participants see no simulate control", () => {
    const disabled = renderWorkspace(workspaceState({ ...allEnabled(), simulation: false }));
    expect(disabled).not.toContain('id="run-simulation"');
    expect(disabled).not.toContain("Simulate");
    const enabled = renderWorkspace(workspaceState(allEnabled()));
    expect(enabled).toContain('id="run-simulation"');
  });

  it("each gated control is hidden exactly when its flag is off", () => {
    const cases: [keyof FlagMap, string][] = [
      ["cloning", 'id="clone-model"'],
      ["exemplar_models", 'id="pick-exemplar"'],
      ["lookup_eol", 'id="lookup-traits"'],
      ["simulation", 'id="run-simulation"'],
    ];
    for (const [flag, marker] of cases) {
      const off = renderWorkspace(workspaceState({ ...allEnabled(), [flag]: false }));
      expect(off, `${flag} off`).not.toContain(marker);
      const on = renderWorkspace(workspaceState(allEnabled()));
      expect(on, `${flag} on`).toContain(marker);
    }
  });

  it("advanced parameters collapse away when the flag is off", () => {
    const sheep = component("c2", "Ovis aries", "biotic");
    const withAdvanced = renderParameterPanel(sheep, allEnabled());
    expect(withAdvanced).toContain("photosynthesis rate");
    expect(withAdvanced).toContain('class="advanced-params"');
    const withoutAdvanced = renderParameterPanel(sheep, {
      ...allEnabled(),
      advanced_parameters: false,
    });
    expect(withoutAdvanced).not.toContain("photosynthesis");
    expect(withoutAdvanced).toContain("lifespan");  // basic params stay editable
  });

  it("abiotic components expose only abiotic parameters", () => {
    const light = component("c3", "Light", "abiotic");
    const panel = renderParameterPanel(light, allEnabled());
    expect(panel).toContain("amount");
    expect(panel).toContain("growth rate");
    expect(panel).not.toContain("lifespan");
  });

  it("canvas draws typed nodes and labeled edges", () => {
    const rendered = renderCanvas(model());
    expect(rendered.match(/class="node node-biotic"/g)?.length).toBe(2);
    expect(rendered.match(/class="node node-abiotic"/g)?.length).toBe(1);
    expect(rendered).toContain('class="edge edge-consumes"');
    expect(rendered).toContain("consumes 1");
  });

  it("edge-creation targets mirror the relationship typing rules", () => {
    const all = model().components;
    const grass = all[0];
    const light = all[2];
    expect(allowedTargets(grass, "consumes", all).map((c) => c.id)).toEqual(["c2", "c3"]);
    expect(allowedTargets(grass, "produces", all).map((c) => c.id)).toEqual(["c3"]);
    expect(allowedTargets(light, "consumes", all)).toEqual([]);
    expect(allowedTargets(light, "destroys", all).map((c) => c.id)).toEqual(["c1", "c2"]);
  });

  it("renders charts from simulation payloads", () => {
    const chart = renderSeriesChart({ Grass: [[800, 700, 650]], "Ovis aries": [[100, 90, 95]] });
    expect(chart.match(/<polyline/g)?.length).toBe(2);
    const histogram = renderHistogram([
      { lo: 0, hi: 10, count: 3 },
      { lo: 10, hi: 20, count: 7 },
    ]);
    expect(histogram.match(/class="hist-bar"/g)?.length).toBe(2);
  });

  it("links the welcome document when provided", () => {
    const rendered = renderWorkspace(workspaceState(allEnabled()));
    expect(rendered).toContain('id="welcome-doc"');
    expect(rendered).not.toContain('id="exit-doc"');
  });
});
