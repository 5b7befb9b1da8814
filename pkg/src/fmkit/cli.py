"""Command-line frontend. Results go to stdout as JSON (default) or --pretty text."""

from __future__ import annotations

import json
import sys

import click

from .analysis import AnalysisError, Configuration, analyze, count_solutions, propagate
from .formats import FormatKind, ParseError, UnsupportedDirection, parse, serialize
from .formula import render
from .model import validate
from .sampling import SamplingError, coverage, sample_twise
from .slicing import SliceError, slice_model

_FORMATS = {"uvl": FormatKind.UVL, "xml": FormatKind.FIDE_XML, "dimacs": FormatKind.DIMACS}


class DomainError(click.ClickException):
    exit_code = 1


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise DomainError(str(exc)) from exc


def _load_model(path: str, source: str):
    text = _read_input(path)
    try:
        model = parse(text, _FORMATS[source])
    except ParseError as exc:
        raise DomainError(
            "; ".join(f"{d.line}:{d.column}: {d.message}" for d in exc.diagnostics)
        ) from exc
    except UnsupportedDirection as exc:
        raise DomainError(str(exc)) from exc
    violations = validate(model)
    if violations:
        raise DomainError("; ".join(v.message for v in violations))
    return model


def _emit(data, pretty: bool, out: str | None, pretty_lines=None):
    if pretty and pretty_lines is not None:
        text = "\n".join(pretty_lines) + "\n"
    else:
        text = json.dumps(data, indent=2 if pretty else None, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def _common_options(fn):
    fn = click.option("--from", "source", default="uvl", type=click.Choice(["uvl", "xml"]))(fn)
    fn = click.option("--pretty", is_flag=True, help="human-readable output")(fn)
    fn = click.option("--out", default=None, help="write output to a file instead of stdout")(fn)
    fn = click.argument("input", default="-")(fn)
    return fn


@click.group()
def main():
    """Feature-model toolbox: parse, analyze, slice, sample, and serve."""


@main.command()
@click.option("--to", "target", required=True, type=click.Choice(["uvl", "xml", "dimacs"]))
@_common_options
def convert(input, source, target, pretty, out):
    """Transform a model between formats."""
    model = _load_model(input, source)
    try:
        text = serialize(model, _FORMATS[target])
    except UnsupportedDirection as exc:
        raise DomainError(str(exc)) from exc
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


@main.command(name="analyze")
@_common_options
def analyze_cmd(input, source, pretty, out):
    """Detect void model and core/dead/false-optional features."""
    report = analyze(_load_model(input, source))
    data = report.to_json()
    lines = [
        f"void:           {data['void']}",
        f"core:           {', '.join(data['core']) or '-'}",
        f"dead:           {', '.join(data['dead']) or '-'}",
        f"false-optional: {', '.join(data['falseOptional']) or '-'}",
    ]
    _emit(data, pretty, out, lines)


@main.command(name="propagate")
@click.option("--select", multiple=True, help="explicitly selected feature (repeatable)")
@click.option("--deselect", multiple=True, help="explicitly deselected feature (repeatable)")
@_common_options
def propagate_cmd(input, source, select, deselect, pretty, out):
    """Decision propagation over a partial configuration."""
    model = _load_model(input, source)
    config = Configuration.from_decisions(select=select, deselect=deselect)
    try:
        result = propagate(model, config)
    except AnalysisError as exc:
        raise DomainError(str(exc)) from exc
    data = result.to_json()
    lines = [f"valid: {data['valid']}"]
    for name, entry in sorted(data["states"].items()):
        lines.append(f"{name}: {entry['state']} ({entry['provenance']})")
    if data["open"]:
        lines.append(f"open: {', '.join(data['open'])}")
    _emit(data, pretty, out, lines)


@main.command(name="slice")
@click.option("--remove", multiple=True, required=True, help="feature to remove (repeatable)")
@click.option("--to", "target", default="uvl", type=click.Choice(["uvl", "xml"]))
@_common_options
def slice_cmd(input, source, remove, target, pretty, out):
    """Remove features while preserving the projected configuration space."""
    model = _load_model(input, source)
    try:
        result = slice_model(model, set(remove))
    except SliceError as exc:
        raise DomainError(str(exc)) from exc
    data = {
        "model": serialize(result.model, _FORMATS[target]),
        "derivedConstraints": [render(f) for f in result.derived_constraints],
    }
    lines = [data["model"].rstrip("\n")]
    _emit(data, pretty, out, lines)


@main.command(name="sample")
@click.option("--t", "strength", default=2, type=click.IntRange(1, 3))
@click.option("--seed", default=0, type=int)
@_common_options
def sample_cmd(input, source, strength, seed, pretty, out):
    """Generate a t-wise covering sample of valid configurations."""
    model = _load_model(input, source)
    try:
        sample = sample_twise(model, strength, seed=seed)
        covered, total, ratio = coverage(model, sample, strength)
    except SamplingError as exc:
        raise DomainError(str(exc)) from exc
    data = {
        "t": strength,
        "seed": seed,
        "configurations": [
            sorted(n for n, v in cfg.items() if v) for cfg in sample.configurations
        ],
        "coverage": {"covered": covered, "validTotal": total, "ratio": ratio},
    }
    lines = [f"{len(sample.configurations)} configurations, coverage {ratio:.3f}"]
    lines += [", ".join(cfg) for cfg in data["configurations"]]
    _emit(data, pretty, out, lines)


@main.command(name="count")
@click.option("--bound", default=24, type=int, help="enumeration refusal bound")
@_common_options
def count_cmd(input, source, bound, pretty, out):
    """Count valid configurations exactly (desk scale)."""
    model = _load_model(input, source)
    try:
        n = count_solutions(model, bound=bound)
    except AnalysisError as exc:
        raise DomainError(str(exc)) from exc
    _emit({"count": n}, pretty, out, [f"count: {n}"])


@main.command()
@click.option("--bind", default=None)
@click.option("--port", default=None, type=int)
def serve(bind, port):
    """Run the HTTP service (blocks)."""
    from .service import ServiceConfig, serve as run

    config = ServiceConfig.from_env()
    if bind:
        config.bind = bind
    if port:
        config.port = port
    run(config)


if __name__ == "__main__":
    main()
