// Join-link table shown right after an experiment is created (the Fig 3 view):
// manual mode lists one row per group, random mode a single shared URL.

import { ExperimentDoc } from "../types.js";
import { html, raw } from "../html.js";

export const JOIN_PATH_PATTERN = /\/researcher\/join-experiment\?(group|experiment)=[^&\s"]+$/;

export function renderLinks(experiment: ExperimentDoc, links: string[]): string {
  const rows = links
    .map((link, i) => {
      const label =
        experiment.mode === "manual" ? html`${i + 1}` : html`all participants`;
      return html`<tr>
        <td>${label}</td>
        <td><a class="join-link" href="${link}">${link}</a></td>
        <td><button type="button" class="copy-link" data-link="${link}">Copy</button></td>
      </tr>`;
    })
    .join("");
  return html`<section class="links-view">
    <h2>Experiment ${experiment.id}: participant links</h2>
    <p>Below you can find the link that each participant should go to.</p>
    <table>
      <thead><tr><th>Group</th><th>Link</th><th></th></tr></thead>
      <tbody>${raw(rows)}</tbody>
    </table>
  </section>`;
}

export function extractLinks(rendered: string): string[] {
  const matches = rendered.matchAll(/class="join-link" href="([^"]+)"/g);
  return Array.from(matches, (m) => m[1]);
}
