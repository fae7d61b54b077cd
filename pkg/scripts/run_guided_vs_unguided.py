"""Sweep the guided-vs-unguided scenario over several seeds and print how the
coverage and focus-share metrics separate the two groups."""

from __future__ import annotations

import argparse
import pathlib
import statistics
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from ecoexp.harness import (  # noqa: E402
    ScenarioScript,
    guided_policy,
    run_scenario,
    unguided_policy,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10, help="number of seeds to sweep")
    parser.add_argument("--first-seed", type=int, default=7)
    parser.add_argument("--learners", type=int, default=20, help="learners per group")
    parser.add_argument("--out", type=pathlib.Path, default=None,
                        help="directory for per-seed export bundles")
    args = parser.parse_args()

    rows = []
    for seed in range(args.first_seed, args.first_seed + args.seeds):
        script = ScenarioScript(seed=seed, learners=args.learners)
        out_dir = args.out / f"seed-{seed}" if args.out else None
        result = run_scenario(script, unguided_policy(), guided_policy(), out_dir=out_dir)
        cov = {(c["group"], c["phase"]): c["pct"] for c in result.report["coverage"]}
        foc = {(f["group"], f["phase"]): f["pct"] for f in result.report["focus"]}
        a, b = result.group_a, result.group_b
        rows.append(
            (
                seed,
                cov[(a, "Phase I")], cov[(b, "Phase I")],
                cov[(a, "Phase II")], cov[(b, "Phase II")],
                foc[(a, "Phase I")], foc[(b, "Phase I")],
            )
        )
        print(
            f"seed {seed:>3}: coverage I  unguided {rows[-1][1]:6.2f}%  guided {rows[-1][2]:6.2f}%"
            f" | coverage II unguided {rows[-1][3]:6.2f}%  guided {rows[-1][4]:6.2f}%"
            f" | focus I unguided {rows[-1][5]:6.2f}%  guided {rows[-1][6]:6.2f}%"
        )

    gaps = [r[1] - r[2] for r in rows]
    print(
        f"\nmedian phase-I coverage gap (unguided - guided): {statistics.median(gaps):.2f} pts "
        f"over {len(rows)} seeds; guided focus share min {min(r[6] for r in rows):.2f}%"
    )


if __name__ == "__main__":
    main()
