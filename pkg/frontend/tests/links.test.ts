import { describe, expect, it } from "vitest";

import { ExperimentDoc } from "../src/types.js";
import { JOIN_PATH_PATTERN, extractLinks, renderLinks } from "../src/views/links.js";
import { allEnabled } from "../src/views/experimentForm.js";

function experiment(mode: "manual" | "random"): ExperimentDoc {
  return {
    id: "exp-1",
    name: "study",
    mode,
    seed: 0,
    groups: [
      { group_id: "3", flags: allEnabled() },
      { group_id: "4", flags: allEnabled() },
    ],
    phases: [],
    status: "active",
    created_at: "2026-01-01T00:00:00Z",
    assignments: [],
  };
}

describe("links view", () => {
  it("manual mode shows exactly two URLs with the join path shape", () => {
    const links = [
      "http://localhost:8080/researcher/join-experiment?group=3",
      "http://localhost:8080/researcher/join-experiment?group=4",
    ];
    const rendered = renderLinks(experiment("manual"), links);
    const found = extractLinks(rendered);
    expect(found).toHaveLength(2);
    for (const link of found) {
      expect(link).toMatch(JOIN_PATH_PATTERN);
      expect(link).toMatch(/\?group=\d+$/);
    }
    expect(found).toEqual(links);
  });

  it("random mode shows exactly one URL keyed by experiment", () => {
    const links = ["http://localhost:8080/researcher/join-experiment?experiment=exp-1"];
    const rendered = renderLinks(experiment("random"), links);
    const found = extractLinks(rendered);
    expect(found).toHaveLength(1);
    expect(found[0]).toMatch(JOIN_PATH_PATTERN);
  });

  it("offers a copy affordance per link", () => {
    const rendered = renderLinks(experiment("manual"), [
      "http://localhost:8080/researcher/join-experiment?group=3",
      "http://localhost:8080/researcher/join-experiment?group=4",
    ]);
    expect(rendered.match(/class="copy-link"/g)?.length).toBe(2);
  });
});
