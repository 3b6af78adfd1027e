"""
Command-line entry point for the CT-MHD solver

Subcommands:
    run <config>        single simulation
    converge <config>   refinement sweep and L1/EOC table
    reference <config>  fine-grid 1D reference profile
"""
import logging
import os
import sys
from pathlib import Path

import click

# Ensure project root is in the Python path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from config.settings import RunConfig, load_run_config, settings  # noqa: E402
from core.convergence import run_convergence  # noqa: E402
from core.errors import ConfigError, SolverError  # noqa: E402
from core.reference import reference_1d_solution, reference_problem, write_reference  # noqa: E402
from core.simulation import run_simulation  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=settings.LOG_FORMAT)


def _load(path: str, overrides) -> RunConfig:
    config = load_run_config(path, overrides)
    logger.info(f"Loaded {path}: problem={config.problem}, nx={config.nx}")
    return config


def _guarded(action):
    """Run an action and map failures onto exit codes."""
    try:
        action()
    except ConfigError as exc:
        logger.error(f"❌ Configuration error: {exc}")
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except SolverError as exc:
        logger.error(f"❌ Solver aborted: {exc}")
        click.echo(f"solver error: {exc}", err=True)
        sys.exit(EXIT_SOLVER)
    sys.exit(EXIT_OK)


@click.group()
@click.option("--log-level", default=None, help="Logging level (default from CT_MHD_LOG_LEVEL).")
def cli(log_level):
    """Third-order constrained-transport MHD solver."""
    configure_logging(log_level or settings.LOG_LEVEL)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--set", "overrides", multiple=True, help="Override a key: --set key=value.")
def run(config_path, overrides):
    """Run a single simulation."""
    def action():
        result = run_simulation(_load(config_path, overrides))
        for path in result.paths:
            click.echo(str(path))

    _guarded(action)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--set", "overrides", multiple=True, help="Override a key: --set key=value.")
@click.option("--table", "table_path", default=None, help="Also write the table as CSV.")
def converge(config_path, overrides, table_path):
    """Run a refinement sweep and print the L1 error / EOC table."""
    def action():
        config = _load(config_path, overrides)
        report = run_convergence(config)
        report.render()
        if table_path:
            Path(table_path).parent.mkdir(parents=True, exist_ok=True)
            report.to_frame().to_csv(table_path, index=False)
            click.echo(table_path)

    _guarded(action)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--set", "overrides", multiple=True, help="Override a key: --set key=value.")
def reference(config_path, overrides):
    """Compute the fine-grid 1D reference and write reference.dat."""
    def action():
        config = _load(config_path, overrides)
        if reference_problem(config.problem) is None:
            raise ConfigError("problem", f"no 1D reference is defined for '{config.problem}'")
        profile = reference_1d_solution(config.problem, cells=config.reference_cells, t_final=config.t_final,
                                        cfl=config.cfl or 0.5, weno=config.weno)
        click.echo(str(write_reference(profile, Path(config.output_dir) / "reference.dat")))

    _guarded(action)


if __name__ == "__main__":
    cli()
