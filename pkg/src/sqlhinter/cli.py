"""Command-line entry points: ingest, build, hint, serve, analyze, export-dot."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click

from .analysis import KnowledgeRule, build_attempt_trace, segment_report
from .config import ServiceConfig
from .errors import SqlHinterError
from .hints import generate_hint
from .mdp import to_dot
from .parse import parse
from .store import ActionEvent, Store


@click.group()
@click.option("--data-dir", default="data", show_default=True, help="Store directory.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file (penalties, reward policy, epsilon, cache size, address).")
@click.pass_context
def main(ctx, data_dir, config_path):
    """Adaptive SQL hint engine over per-exercise MDPs."""
    cfg = ServiceConfig.load(config_path) if config_path else ServiceConfig()
    ctx.obj = {"data_dir": data_dir, "config": cfg}


def _store(ctx) -> Store:
    try:
        return Store(ctx.obj["data_dir"], ctx.obj["config"])
    except SqlHinterError as exc:
        raise click.ClickException(str(exc))


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--rescore", is_flag=True, help="Recompute scores via the executor.")
@click.pass_context
def ingest(ctx, source, rescore):
    """Ingest an attempts.jsonl file."""
    report = _store(ctx).ingest_attempts(source, rescore=rescore)
    click.echo(f"accepted: {report.accepted}")
    click.echo(f"duplicates: {report.duplicates}")
    click.echo(f"rejected: {len(report.rejected)}")
    for line_no, reason in report.rejected:
        click.echo(f"  line {line_no}: {reason}")


@main.command()
@click.argument("exercise")
@click.pass_context
def build(ctx, exercise):
    """Build (or fetch) the exercise MDP and print its shape."""
    store = _store(ctx)
    try:
        graph = store.get_mdp(exercise)
    except SqlHinterError as exc:
        raise click.ClickException(str(exc))
    finals = [s for s in graph.states.values() if s.is_final]
    passing = graph.passing_terminals()
    click.echo(f"states: {len(graph.states)}")
    click.echo(f"roots: {len(graph.roots)}")
    click.echo(f"final states: {len(finals)} (passing: {len(passing)})")
    click.echo(f"skipped attempts: {graph.skipped_attempts}")
    click.echo(f"converged: {graph.converged}")


@main.command()
@click.argument("exercise")
@click.option("--query", required=True, help="The student's current SQL text.")
@click.pass_context
def hint(ctx, exercise, query):
    """Print the next-step hint for a query."""
    store = _store(ctx)
    try:
        graph = store.get_mdp(exercise)
        result = generate_hint(graph, parse(query))
    except SqlHinterError as exc:
        raise click.ClickException(str(exc))
    click.echo(result.sql_text)
    for op in result.diff:
        sign = "+" if op.op == "added" else "-"
        click.echo(f"  {sign} {op.token}")


@main.command()
@click.option("--addr", default=None, help="host:port to listen on.")
@click.pass_context
def serve(ctx, addr):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    store = _store(ctx)
    listen = addr or store.config.listen_addr
    host, _, port = listen.partition(":")
    uvicorn.run(create_app(store), host=host or "127.0.0.1", port=int(port or 8000))


@main.command()
@click.argument("events_file", type=click.Path(exists=True))
@click.option("--profiles", "profiles_path", type=click.Path(exists=True), required=True,
              help="JSON file: user -> {proficiency, years_experience, hints_useful}.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the report here.")
@click.option("--fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.pass_context
def analyze(ctx, events_file, profiles_path, out_path, fmt):
    """Segment report (solving times, branches, convergence slopes)."""
    store = _store(ctx)
    profiles = json.loads(Path(profiles_path).read_text())

    by_attempt: dict[tuple[str, str], list[ActionEvent]] = {}
    with Path(events_file).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            event = ActionEvent.from_dict(json.loads(line))
            by_attempt.setdefault((event.user, event.exercise_id), []).append(event)

    traces = []
    for (user, exercise_id), events in sorted(by_attempt.items()):
        try:
            graph = store.get_mdp(exercise_id)
        except SqlHinterError:
            continue
        traces.append(build_attempt_trace(graph, events))

    aggregates, skipped = segment_report(traces, profiles, KnowledgeRule())
    rows = [a.to_row() for a in aggregates]

    header = ["segment", "attempts", "t_solving", "n_branches", "beta_pre_fh", "beta_aha", "delta_beta"]
    click.echo("  ".join(f"{h:>11}" for h in header))
    for row in rows:
        click.echo("  ".join(_cell(row[h]) for h in header))
    if skipped:
        click.echo(f"skipped attempts (missing profile or unassignable): {skipped}")

    if out_path:
        if fmt == "json":
            Path(out_path).write_text(json.dumps(rows, indent=2))
        else:
            with Path(out_path).open("w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=header)
                writer.writeheader()
                writer.writerows(rows)
        click.echo(f"report written to {out_path}")


def _cell(value) -> str:
    if value is None:
        return f"{'--':>11}"
    if isinstance(value, float):
        return f"{value:>11.3f}"
    return f"{value:>11}"


@main.command("export-dot")
@click.argument("exercise")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_context
def export_dot(ctx, exercise, out_path):
    """Write the exercise MDP as Graphviz DOT."""
    store = _store(ctx)
    try:
        graph = store.get_mdp(exercise)
    except SqlHinterError as exc:
        raise click.ClickException(str(exc))
    text = to_dot(graph)
    if out_path:
        Path(out_path).write_text(text)
        click.echo(f"written to {out_path}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
