"""Command-line surface: serve the API, administer experiments, run scripted
learner scenarios, and replay captured logs into reports.

Exit codes: 0 success, 1 validation problem, 2 I/O problem.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bundle import replay
from .experiment import experiment_to_doc, join_links
from .harness import guided_policy, run_scenario, script_from_doc, unguided_policy
from .model import ValidationError
from .report import coverage_svg, patterns_svg, render_tables
from .service import ApiError, ServiceConfig, Workspace, create_app
from .util import canonical_json


@click.group()
def cli():
    """A/B experimentation platform for conceptual ecology modeling."""


@cli.command()
@click.option("--host", default="127.0.0.1", envvar="ECOEXP_HOST", show_default=True)
@click.option("--port", default=8080, envvar="ECOEXP_PORT", show_default=True)
@click.option("--data-dir", default=None, envvar="ECOEXP_DATA_DIR", help="State directory.")
@click.option("--token", default="researcher-secret", envvar="ECOEXP_TOKEN",
              help="Researcher bearer token.")
@click.option("--base-url", default=None, envvar="ECOEXP_BASE_URL",
              help="Public URL used in join links.")
@click.option("--seed", default=0, envvar="ECOEXP_SEED", show_default=True)
@click.option("--ui", default=None, type=click.Path(file_okay=False, exists=True),
              help="Serve a built frontend directory at /.")
def serve(host, port, data_dir, token, base_url, seed, ui):
    """Start the HTTP service."""
    import uvicorn

    config = ServiceConfig(
        researcher_token=token,
        base_url=base_url or f"http://{host}:{port}",
        data_dir=data_dir,
        default_seed=seed,
        ui_dir=ui,
    )
    uvicorn.run(create_app(Workspace(config)), host=host, port=port)


def _workspace(data_dir, seed=0) -> Workspace:
    return Workspace(ServiceConfig(data_dir=data_dir, default_seed=seed))


@cli.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--data-dir", default=None, envvar="ECOEXP_DATA_DIR")
@click.option("--seed", default=None, type=int)
def create(spec_file, data_dir, seed):
    """Create an experiment from a JSON spec file and print its join links."""
    doc = json.loads(Path(spec_file).read_text(encoding="utf-8"))
    ws = _workspace(data_dir)
    from .experiment import GroupConfig, all_enabled, create_experiment
    from .service import _phases_from_docs  # shared phase parsing

    groups_doc = doc.get("groups")
    if not isinstance(groups_doc, list) or len(groups_doc) != 2:
        raise ValidationError("an experiment requires exactly two groups")
    group_ids = ws.experiments.allocate_group_ids(2)
    groups = [
        GroupConfig(group_ids[i], {**all_enabled(), **g.get("flags", {})})
        for i, g in enumerate(groups_doc)
    ]
    experiment = create_experiment(
        name=doc.get("name", ""),
        groups=groups,
        assignment_mode=doc.get("mode", "manual"),
        phases=_phases_from_docs(doc.get("phases")),
        seed=seed if seed is not None else doc.get("seed", 0),
        experiment_id=ws.experiments.allocate_experiment_id(),
    )
    ws.experiments.add(experiment)
    ws.save()
    click.echo(canonical_json(experiment_to_doc(experiment, [])).rstrip())
    for link in join_links(experiment):
        click.echo(link)


@cli.command()
@click.argument("experiment_id")
@click.option("--data-dir", default=None, envvar="ECOEXP_DATA_DIR")
def links(experiment_id, data_dir):
    """Print the join links of an existing experiment."""
    ws = _workspace(data_dir)
    experiment = ws.experiments.get(experiment_id)
    for link in join_links(experiment):
        click.echo(link)


@cli.command("simulate-learners")
@click.argument("script_file", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=None, type=int, help="Override the script seed.")
@click.option("--out", default=None, type=click.Path(file_okay=False),
              help="Directory for the export bundle.")
def simulate_learners(script_file, seed, out):
    """Run a scripted guided-vs-unguided scenario through the full stack."""
    from dataclasses import replace as dc_replace

    if script_file:
        doc = json.loads(Path(script_file).read_text(encoding="utf-8"))
        script, policy_a, policy_b = script_from_doc(doc)
    else:
        from .harness import ScenarioScript

        script, policy_a, policy_b = ScenarioScript(), unguided_policy(), guided_policy()
    if seed is not None:
        script = dc_replace(script, seed=seed)
    result = run_scenario(script, policy_a, policy_b, out_dir=out)
    if out:
        Path(out, "analytics.json").write_text(result.report_json, encoding="utf-8")
        click.echo(f"bundle written to {out}")
    click.echo(render_tables(result.report).rstrip())


@cli.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Where to write analytics.json.")
def analyze(path, out):
    """Replay an events.jsonl file or export bundle into an analytics report."""
    report = replay(path)
    if out:
        Path(out).write_text(canonical_json(report), encoding="utf-8")
    click.echo(render_tables(report).rstrip())


@cli.command()
@click.argument("analytics_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(file_okay=False),
              help="Directory for SVG charts.")
def report(analytics_file, out):
    """Render tables (and optional SVG charts) from an analytics.json file."""
    doc = json.loads(Path(analytics_file).read_text(encoding="utf-8"))
    click.echo(render_tables(doc).rstrip())
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "coverage.svg").write_text(coverage_svg(doc), encoding="utf-8")
        (out_dir / "patterns.svg").write_text(patterns_svg(doc), encoding="utf-8")
        click.echo(f"charts written to {out_dir}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ValidationError, ApiError, KeyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
