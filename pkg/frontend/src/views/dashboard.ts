// Analytics dashboard: six tiles on top (learners, models, session time,
// frequency, complexity, variety) plus coverage and pattern panels below.
// Tile values are the analytics payload fields verbatim -- the UI never
// recomputes a number.

import { AnalyticsReport } from "../types.js";
import { html, raw } from "../html.js";

function tile(id: string, title: string, value: string, body: string): string {
  return html`<div class="tile" id="tile-${id}" data-value="${value}">
    <h3>${title}</h3>
    ${raw(body)}
  </div>`;
}

function perGroup(report: AnalyticsReport, pick: (g: string) => number | string): string {
  return Object.keys(report.groups)
    .sort()
    .map((gid) => html`<div class="per-group"><span>group ${gid}</span><strong
      class="tile-value" data-group="${gid}">${String(pick(gid))}</strong></div>`)
    .join("");
}

export function renderDashboard(report: AnalyticsReport): string {
  const groups = Object.keys(report.groups).sort();

  const learners = tile(
    "learners",
    "Total learners",
    JSON.stringify(groups.map((g) => report.groups[g].learners)),
    perGroup(report, (g) => report.groups[g].learners),
  );
  const models = tile(
    "models",
    "Total models",
    JSON.stringify(groups.map((g) => report.groups[g].models)),
    perGroup(report, (g) => report.groups[g].models),
  );
  const sessionTime = tile(
    "session-time",
    "Total session time (s)",
    JSON.stringify(groups.map((g) => report.groups[g].total_session_time_s)),
    perGroup(report, (g) => report.groups[g].total_session_time_s),
  );
  const frequencyBody = groups
    .map((gid) => {
      const freq = report.groups[gid].frequency;
      const bars = (Object.keys(freq) as (keyof typeof freq)[])
        .map(
          (k) =>
            html`<span class="freq" data-group="${gid}" data-action="${k}">${k}:${freq[k]}</span>`,
        )
        .join(" ");
      return html`<div class="per-group"><span>group ${gid}</span>${raw(bars)}</div>`;
    })
    .join("");
  const frequency = tile(
    "frequency",
    "Action frequency",
    JSON.stringify(groups.map((g) => report.groups[g].frequency)),
    frequencyBody,
  );
  const complexityRows = report.models
    .map(
      (m) => html`<tr data-model="${m.id}"><td>${m.id}</td><td class="complexity">${m.complexity}</td></tr>`,
    )
    .join("");
  const complexity = tile(
    "complexity",
    "Model complexity",
    JSON.stringify(report.models.map((m) => m.complexity)),
    html`<table>${raw(complexityRows)}</table>`,
  );
  const varietyRows = report.models
    .map(
      (m) => html`<tr data-model="${m.id}"><td>${m.id}</td><td class="variety">${m.variety}</td></tr>`,
    )
    .join("");
  const variety = tile(
    "variety",
    "Model variety",
    JSON.stringify(report.models.map((m) => m.variety)),
    html`<table>${raw(varietyRows)}</table>`,
  );

  const coverageRows = report.coverage
    .map(
      (c) => html`<tr>
        <td>${c.group}</td><td>${c.phase}</td>
        <td class="coverage-pct" data-group="${c.group}" data-phase="${c.phase}">${c.pct}</td>
      </tr>`,
    )
    .join("");
  const focusRows = report.focus
    .map(
      (f) => html`<tr>
        <td>${f.group}</td><td>${f.phase}</td>
        <td class="focus-pct">${f.pct === null ? "no data" : f.pct}</td>
      </tr>`,
    )
    .join("");
  const patternRows = Object.keys(report.patterns)
    .sort()
    .map((gid) => {
      const p = report.patterns[gid];
      return html`<tr data-group="${gid}">
        <td>${gid}</td>
        <td>${p.Observation}</td><td>${p.Construction}</td><td>${p.Exploration}</td>
      </tr>`;
    })
    .join("");

  return html`<section class="dashboard" data-poll-seconds="10">
    <div class="tiles">
      ${raw(learners)}${raw(models)}${raw(sessionTime)}
      ${raw(frequency)}${raw(complexity)}${raw(variety)}
    </div>
    <div class="panels">
      <div class="panel" id="panel-coverage">
        <h3>Parameter-space coverage (${report.parameter_space.length} pairs)</h3>
        <table>
          <thead><tr><th>group</th><th>phase</th><th>%</th></tr></thead>
          <tbody>${raw(coverageRows)}</tbody>
        </table>
      </div>
      <div class="panel" id="panel-focus">
        <h3>Focus share</h3>
        <table>
          <thead><tr><th>group</th><th>phase</th><th>%</th></tr></thead>
          <tbody>${raw(focusRows)}</tbody>
        </table>
      </div>
      <div class="panel" id="panel-patterns">
        <h3>Behavior patterns</h3>
        <table>
          <thead><tr><th>group</th><th>Observation</th><th>Construction</th><th>Exploration</th></tr></thead>
          <tbody>${raw(patternRows)}</tbody>
        </table>
      </div>
    </div>
  </section>`;
}

/** The six tile payload values, as rendered; used to check UI/API agreement. */
export function tileValues(rendered: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const match of rendered.matchAll(/id="tile-([a-z-]+)" data-value="([^"]*)"/g)) {
    out[match[1]] = match[2]
      .replace(/&quot;/g, '"')
      .replace(/&amp;/g, "&");
  }
  return out;
}
