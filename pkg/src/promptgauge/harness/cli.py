"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 validation/configuration error, 2 backend failure.
"""

from __future__ import annotations

import sys

import click

from ..errors import BackendError, PromptGaugeError
from .config import load_config
from .stages import STAGE_ORDER, PipelineRunner


def _run(stage: str, config_path: str, seed: int | None, replay: str | None, out: str | None):
    try:
        config = load_config(config_path, seed=seed, replay_dir=replay, out_dir=out)
        runner = PipelineRunner(config)
        result = runner.run_stage(stage)
        status = "skipped (cached)" if result.skipped else "completed"
        click.echo(f"{stage}: {status} -> {result.directory}")
    except BackendError as exc:
        click.echo(f"backend failure in {stage}: {exc}", err=True)
        sys.exit(2)
    except PromptGaugeError as exc:
        click.echo(f"{stage} failed: {exc}", err=True)
        sys.exit(1)


def _stage_command(stage: str):
    @click.command(name=stage, help=f"Run the {stage} stage.")
    @click.option("--config", "config_path", required=True, type=click.Path())
    @click.option("--seed", type=int, default=None, help="Override the config seed.")
    @click.option("--replay", type=click.Path(), default=None, help="Read-only replay store.")
    @click.option("--out", type=click.Path(), default=None, help="Output directory.")
    def command(config_path, seed, replay, out):
        _run(stage, config_path, seed, replay, out)

    return command


@click.group()
def main():
    """Execution-free prompt evaluation and optimization pipeline."""


for _stage in (*STAGE_ORDER, "report"):
    main.add_command(_stage_command(_stage))


@main.command(name="run-all", help="Run every stage in order, then the report.")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--replay", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
def run_all(config_path, seed, replay, out):
    try:
        config = load_config(config_path, seed=seed, replay_dir=replay, out_dir=out)
        runner = PipelineRunner(config)
        for result in runner.run_all():
            status = "skipped (cached)" if result.skipped else "completed"
            click.echo(f"{result.stage}: {status}")
    except BackendError as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(2)
    except PromptGaugeError as exc:
        click.echo(f"pipeline failed: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
