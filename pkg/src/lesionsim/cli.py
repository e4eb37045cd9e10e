"""Command line interface.

Subcommands: run (execute a config), validate (parse and check only), sweep
(grid over dt_diff or the population scale K). Exit codes: 0 success,
2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .config import load_config
from .errors import ConfigError, NumericalError
from .runner import default_threads, run, sweep_dt, sweep_k

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load(config_path: str, seed: int | None, replicates: int | None):
    config = load_config(config_path)
    if seed is not None:
        config = replace(config, seed=seed)
    if replicates is not None:
        config = replace(config, replicates=replicates)
    return config


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


@click.group()
def main() -> None:
    """Spatial lesion-kinetics simulator."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--replicates", type=int, default=None, help="Override the replicate count.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--threads", type=int, default=None,
              help="Worker processes (default LESIONSIM_THREADS or 1).")
def run_cmd(config_path, seed, replicates, out_dir, threads):
    """Execute the configured mode and write artifacts to --out."""
    config = _guard(_load, config_path, seed, replicates)
    summary = _guard(run, config, out_dir, default_threads() if threads is None else threads)
    click.echo(f"run complete: mode={summary['mode']} out={out_dir}")


@main.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def validate_cmd(config_path):
    """Parse the config and report ok; exit 2 on any schema violation."""
    config = _guard(load_config, config_path)
    click.echo(f"config ok: mode={config.mode} seed={config.seed}")


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--param", type=click.Choice(["k", "dt_diff"]), required=True)
@click.option("--values", required=True, help="Comma-separated sweep values.")
@click.option("--seed", type=int, default=None)
@click.option("--replicates", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--threads", type=int, default=None)
def sweep_cmd(config_path, param, values, seed, replicates, out_dir, threads):
    """Sweep the population scale K or the splitting step dt_diff."""
    config = _guard(_load, config_path, seed, replicates)
    threads = default_threads() if threads is None else threads
    try:
        parsed = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        click.echo(f"config error: could not parse sweep values {values!r}", err=True)
        sys.exit(EXIT_CONFIG)
    if not parsed:
        click.echo("config error: empty sweep value list", err=True)
        sys.exit(EXIT_CONFIG)
    if param == "k":
        summary = _guard(sweep_k, config, [int(v) for v in parsed], out_dir, threads)
        click.echo(f"k sweep complete: slope={summary['slope']:.4f} out={out_dir}")
    else:
        summary = _guard(sweep_dt, config, parsed, out_dir, threads)
        click.echo(f"dt sweep complete: out={out_dir}")


if __name__ == "__main__":
    main()
