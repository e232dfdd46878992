import logging
import os

import click
import numpy as np

from analytic.stage1 import phase_space_trajectory
from cavity_qed import settings
from cavity_qed.errors import CavityQEDError, ConfigError
from cli.config import parse_config
from cli.export import format_label, write_phase_space
from cli.presets import PRESETS, run_preset
from cli.simulation import sweep_jobs
from cli.sweeps import execute
from cli.validation import validate
from evolution.models import Backend, StageKind

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def _parse_truncation(ctx, param, value):
    if value is None:
        return None
    try:
        first, second = (int(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter("expected N1,N2")
    if first < 1 or second < 1:
        raise click.BadParameter("truncations must be >= 1")
    return first, second


def _load(config_path, backend, truncation):
    with open(config_path, "r", encoding="utf-8") as f:
        scenario, spec = parse_config(f.read())
    if backend:
        spec = spec.model_copy(update={"backend": Backend(backend)})
    if truncation:
        scenario = scenario.with_truncations(*truncation)
    return scenario, spec


def _run_guarded(ctx, action):
    """Map configuration errors to exit 2 and simulation errors to exit 1."""
    try:
        return action()
    except ConfigError as e:
        click.echo(f"Configuration error: {e}", err=True)
        ctx.exit(EXIT_CONFIG)
    except (CavityQEDError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_FAILURE)


out_option = click.option(
    "--out", "out_dir", type=click.Path(file_okay=False), default=None,
    help="Output directory (default: CAVITY_QED_OUTPUT_DIR or ./output).",
)
backend_option = click.option(
    "--backend", type=click.Choice([b.value for b in Backend]), default=None,
    help="Simulation backend.",
)
truncation_option = click.option(
    "--truncation", callback=_parse_truncation, default=None, metavar="N1,N2",
    help="Fock truncations of the two fields.",
)
converge_option = click.option(
    "--converge", is_flag=True, help="Raise the truncations until the concurrences settle."
)


@click.group()
def cli():
    """Atom crossing two dissipative cavities: pairwise entanglement dynamics."""


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@out_option
@backend_option
@truncation_option
@converge_option
@click.pass_context
def simulate(ctx, config, out_dir, backend, truncation, converge):
    """Simulate the first parameter point of CONFIG."""

    def action():
        scenario, spec = _load(config, backend, truncation)
        jobs = sweep_jobs(scenario, spec)[:1]
        (result,) = execute(jobs, spec, out_dir or settings.OUTPUT_DIR, converge=converge)
        click.echo(result.path)

    _run_guarded(ctx, action)


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@out_option
@backend_option
@truncation_option
@converge_option
@click.option("--jobs", "workers", type=click.IntRange(min=1), default=1, help="Local worker processes.")
@click.option("--celery", "use_celery", is_flag=True, help="Dispatch points to Celery workers.")
@click.pass_context
def sweep(ctx, config, out_dir, backend, truncation, converge, workers, use_celery):
    """Simulate every parameter tuple of CONFIG, one CSV each."""

    def action():
        scenario, spec = _load(config, backend, truncation)
        jobs = sweep_jobs(scenario, spec)
        results = execute(
            jobs, spec, out_dir or settings.OUTPUT_DIR, workers, use_celery, converge
        )
        failed = [r for r in results if r.error]
        for result in results:
            click.echo(result.path)
        if failed:
            ctx.exit(EXIT_FAILURE)

    _run_guarded(ctx, action)


@cli.command()
@click.argument("name", type=click.Choice(PRESETS))
@out_option
@backend_option
@converge_option
@click.option("--jobs", "workers", type=click.IntRange(min=1), default=1, help="Local worker processes.")
@click.option("--celery", "use_celery", is_flag=True, help="Dispatch points to Celery workers.")
@click.pass_context
def preset(ctx, name, out_dir, backend, converge, workers, use_celery):
    """Write the curves of a named preset."""

    def action():
        results = run_preset(name, out_dir, backend, workers, use_celery, converge)
        click.echo(f"{len(results)} files written for {name}")
        if any(r.error for r in results):
            ctx.exit(EXIT_FAILURE)

    _run_guarded(ctx, action)


@cli.command(name="validate")
@click.option("--full", is_flag=True, help="Run the complete certification suite.")
@click.pass_context
def validate_command(ctx, full):
    """Cross-check the backends; exit 1 on any failed check."""
    report = validate("full" if full else "quick")
    for line in report.lines():
        click.echo(line)
    ctx.exit(EXIT_OK if report.passed else EXIT_FAILURE)


@cli.command(name="phase-space")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@out_option
@click.pass_context
def phase_space(ctx, config, out_dir):
    """Write the field-1 branch labels during the first cavity."""

    def action():
        scenario, spec = _load(config, None, None)
        duration = StageKind.CAVITY1.duration(scenario)
        rows = phase_space_trajectory(np.linspace(0.0, duration, spec.samples), scenario)
        name = f"phase_space_a{format_label(scenario.alpha)}_gamma{scenario.gamma_1:g}.csv"
        path = write_phase_space(os.path.join(out_dir or settings.OUTPUT_DIR, name), rows)
        click.echo(path)

    _run_guarded(ctx, action)


def main():
    logging.basicConfig(level=settings.LOG_LEVEL, format=settings.LOG_FORMAT)
    cli()
