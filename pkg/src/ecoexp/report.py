"""Human-readable rendering of an analytics report: text tables and SVG bars."""

from __future__ import annotations


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_tables(report: dict) -> str:
    sections = []

    groups = report.get("groups", {})
    if groups:
        rows = [
            [
                gid,
                g["learners"],
                g["models"],
                f"{g['total_session_time_s'] / 3600:.1f}h",
                " ".join(f"{k}:{g['frequency'][k]}" for k in "NSPCRE"),
            ]
            for gid, g in sorted(groups.items())
        ]
        sections.append(
            "Group overview\n"
            + _table(["group", "learners", "models", "session time", "action frequency"], rows)
        )

    models = report.get("models", [])
    if models:
        complexity = [m["complexity"] for m in models]
        variety = [m["variety"] for m in models]
        rows = [
            [
                len(models),
                f"{sum(complexity) / len(models):.1f}",
                max(complexity),
                f"{sum(variety) / len(models):.1f}",
                max(variety),
            ]
        ]
        sections.append(
            "Models\n"
            + _table(
                ["count", "mean complexity", "max complexity", "mean variety", "max variety"],
                rows,
            )
        )

    space = report.get("parameter_space", [])
    coverage = report.get("coverage", [])
    if coverage:
        rows = [
            [c["group"], c["phase"], len(c["explored"]), f"{c['pct']:.2f}%"] for c in coverage
        ]
        sections.append(
            f"Parameter-space coverage ({len(space)} pairs)\n"
            + _table(["group", "phase", "explored", "coverage"], rows)
        )

    focus = report.get("focus", [])
    if focus:
        rows = [
            [f["group"], f["phase"], "n/a" if f["pct"] is None else f"{f['pct']:.2f}%"]
            for f in focus
        ]
        sections.append("Focus share\n" + _table(["group", "phase", "focus share"], rows))

    patterns = report.get("patterns", {})
    if patterns:
        rows = [
            [gid, p.get("Observation", 0), p.get("Construction", 0), p.get("Exploration", 0)]
            for gid, p in sorted(patterns.items())
        ]
        sections.append(
            "Behavior patterns\n"
            + _table(["group", "Observation", "Construction", "Exploration"], rows)
        )

    return "\n\n".join(sections) + "\n"


_SVG_COLORS = ("#4878a8", "#e08a3c", "#5ca05c", "#b05454")


def _bar_chart(title: str, labels: list[str], values: list[float], unit: str = "") -> str:
    width, bar_h, gap, left = 480, 22, 8, 170
    height = 40 + len(values) * (bar_h + gap)
    peak = max(values) if values else 1.0
    peak = peak or 1.0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="8" y="18" font-size="14" font-weight="bold">{title}</text>',
    ]
    for i, (label, value) in enumerate(zip(labels, values)):
        y = 34 + i * (bar_h + gap)
        w = int((width - left - 90) * value / peak)
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        parts.append(f'<text x="8" y="{y + 15}">{label}</text>')
        parts.append(f'<rect x="{left}" y="{y}" width="{max(w, 1)}" height="{bar_h}" fill="{color}"/>')
        parts.append(f'<text x="{left + max(w, 1) + 6}" y="{y + 15}">{value:.2f}{unit}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def coverage_svg(report: dict) -> str:
    coverage = report.get("coverage", [])
    labels = [f'group {c["group"]} / {c["phase"]}' for c in coverage]
    values = [c["pct"] for c in coverage]
    return _bar_chart("Parameter-space coverage", labels, values, unit="%")


def patterns_svg(report: dict) -> str:
    patterns = report.get("patterns", {})
    labels, values = [], []
    for gid, p in sorted(patterns.items()):
        for cls in ("Observation", "Construction", "Exploration"):
            labels.append(f"group {gid} / {cls}")
            values.append(float(p.get(cls, 0)))
    return _bar_chart("Behavior patterns", labels, values)
