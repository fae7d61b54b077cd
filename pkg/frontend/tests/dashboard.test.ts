import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { AnalyticsReport } from "../src/types.js";
import { renderDashboard, tileValues } from "../src/views/dashboard.js";

// Real output of the analytics endpoint, shipped with the backend package.
const FIXTURE = join(
  dirname(fileURLToPath(import.meta.url)),
  "..", "..", "src", "ecoexp", "fixtures", "bios", "analytics.json",
);

function loadReport(): AnalyticsReport {
  return JSON.parse(readFileSync(FIXTURE, "utf-8")) as AnalyticsReport;
}

describe("analytics dashboard", () => {
  it("renders exactly six tiles", () => {
    const rendered = renderDashboard(loadReport());
    const tiles = rendered.match(/<div class="tile"/g) ?? [];
    expect(tiles.length).toBe(6);
    for (const id of ["learners", "models", "session-time", "frequency", "complexity", "variety"]) {
      expect(rendered).toContain(`id="tile-${id}"`);
    }
  });

  it("tile values byte-match the analytics payload fields", () => {
    const report = loadReport();
    const values = tileValues(renderDashboard(report));
    const groups = Object.keys(report.groups).sort();
    expect(values["learners"]).toBe(JSON.stringify(groups.map((g) => report.groups[g].learners)));
    expect(values["models"]).toBe(JSON.stringify(groups.map((g) => report.groups[g].models)));
    expect(values["session-time"]).toBe(
      JSON.stringify(groups.map((g) => report.groups[g].total_session_time_s)),
    );
    expect(values["frequency"]).toBe(
      JSON.stringify(groups.map((g) => report.groups[g].frequency)),
    );
    expect(values["complexity"]).toBe(JSON.stringify(report.models.map((m) => m.complexity)));
    expect(values["variety"]).toBe(JSON.stringify(report.models.map((m) => m.variety)));
  });

  it("coverage and pattern panels carry the payload numbers verbatim", () => {
    const report = loadReport();
    const rendered = renderDashboard(report);
    for (const row of report.coverage) {
      const cell = new RegExp(
        `data-group="${row.group}" data-phase="${row.phase}">([^<]*)<`,
      ).exec(rendered);
      expect(cell?.[1]).toBe(String(row.pct));
    }
    expect(rendered).toContain(`(${report.parameter_space.length} pairs)`);
    for (const gid of Object.keys(report.patterns)) {
      expect(rendered).toContain(`<tr data-group="${gid}">`);
    }
  });

  it("declares the 10-second poll budget", () => {
    expect(renderDashboard(loadReport())).toContain('data-poll-seconds="10"');
  });
});
