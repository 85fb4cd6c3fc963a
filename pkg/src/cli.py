"""Command-line interface for the spin dynamics simulator."""

import logging
import sys
from typing import NoReturn, Optional

import click

from .analysis import ENTROPY_FILE, compare, default_report_path, entropy_report
from .config import PRESETS, ScenarioConfig, get_preset, load_config
from .errors import ConfigError, SpinSimError
from .scenario import ScenarioRunner


def setup_logging(verbose: bool = False) -> None:
    """Configure logging for the application.

    Args:
        verbose: Enable verbose (DEBUG) logging
    """
    level = logging.DEBUG if verbose else logging.INFO

    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=[logging.StreamHandler(sys.stdout)],
        force=True,
    )


def _fail(action: str, error: BaseException, verbose: bool) -> NoReturn:
    """Report an error and exit with the code its type maps to."""
    click.echo()
    if isinstance(error, KeyboardInterrupt):
        click.secho(f"✗ {action} interrupted by user", fg="yellow")
        sys.exit(1)
    click.secho(f"✗ {action} failed: {error}", fg="red", bold=True)
    if verbose:
        import traceback

        traceback.print_exc()
    sys.exit(error.exit_code if isinstance(error, SpinSimError) else 1)


@click.group()
def cli() -> None:
    """spinsim - damped quantum and classical spin dynamics."""
    pass


def _resolve_config(config_path: Optional[str], preset: Optional[str]) -> ScenarioConfig:
    if (config_path is None) == (preset is None):
        raise ConfigError("Specify exactly one of --config or --preset")
    if config_path is not None:
        return load_config(config_path)
    assert preset is not None
    return get_preset(preset)


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file")
@click.option(
    "--preset",
    type=click.Choice(sorted(PRESETS)),
    default=None,
    help="Built-in experiment preset",
)
@click.option(
    "--classical", is_flag=True, default=False, help="Integrate the classical LL/LLG equation"
)
@click.option(
    "--out",
    type=click.Path(),
    default=None,
    help="Run directory (default: output/<name>_<kind>_<timestamp>)",
)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override noise seed")
@click.option("--t-end", type=float, default=None, help="Override the simulation horizon")
@click.option(
    "--verbose", "-v", is_flag=True, default=False, help="Enable verbose logging"
)
def run(
    config_path: Optional[str],
    preset: Optional[str],
    classical: bool,
    out: Optional[str],
    seed: Optional[int],
    t_end: Optional[float],
    verbose: bool,
) -> None:
    """Run one scenario and write its trajectory dataset.

    Examples:

        # Single-spin reversal, quantum
        spinsim run --preset fig1

        # Same scenario with classical spins
        spinsim run --preset fig1 --classical --out runs/fig1_cl

        # Custom config file with a different noise seed
        spinsim run --config trimer.json --seed 7
    """
    setup_logging(verbose)

    try:
        config = _resolve_config(config_path, preset).with_overrides(seed=seed, t_end=t_end)
        runner = ScenarioRunner(config)
        run_dir = runner.run(classical=classical, output_path=out)

        click.echo()
        click.secho("✓ Scenario completed successfully!", fg="green", bold=True)
        click.echo(f"Output directory: {run_dir}")

    except (KeyboardInterrupt, Exception) as e:
        _fail("Scenario", e, verbose)


@cli.command(name="compare")
@click.argument("path_a", type=click.Path())
@click.argument("path_b", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Write the JSON report here (default: comparison.json beside PATH_A)")
@click.option(
    "--verbose", "-v", is_flag=True, default=False, help="Enable verbose logging"
)
def compare_command(path_a: str, path_b: str, out: Optional[str], verbose: bool) -> None:
    """Compare normalized spin vectors of two trajectory CSVs (or run directories)."""
    setup_logging(verbose)

    try:
        report = compare(path_a, path_b)
        click.echo(f"Samples compared: {report.samples}")
        click.echo(f"Max deviation: {report.max_deviation:.6e} at t={report.time_of_max:g}")
        for site in report.sites:
            rms = ", ".join(f"{v:.3e}" for v in site.rms)
            click.echo(
                f"  site {site.site}: max {site.max_deviation:.6e} "
                f"(t={site.time_of_max:g}), rms ({rms})"
            )
        path = report.write(out if out is not None else default_report_path(path_a))
        click.echo(f"Report written to {path}")

    except (KeyboardInterrupt, Exception) as e:
        _fail("Comparison", e, verbose)


@cli.command()
@click.argument("dataset_dir", type=click.Path())
@click.option(
    "--verbose", "-v", is_flag=True, default=False, help="Enable verbose logging"
)
def entropy(dataset_dir: str, verbose: bool) -> None:
    """Site-1 von Neumann entropy of a quantum run; writes entropy.csv beside it."""
    setup_logging(verbose)

    try:
        report = entropy_report(dataset_dir)
        path = report.write(f"{dataset_dir}/{ENTROPY_FILE}")
        click.echo(
            f"Max entropy: {report.max_entropy:.6f} bits at t={report.time_of_max_entropy:g}"
        )
        click.echo(
            f"Min spin length: {report.min_spin_length:.6f} at t={report.time_of_min_length:g}"
        )
        click.echo(f"Entropy table: {path}")

    except (KeyboardInterrupt, Exception) as e:
        _fail("Entropy report", e, verbose)


@cli.command()
def presets() -> None:
    """List built-in presets and their parameters."""
    click.echo(f"\nAvailable presets ({len(PRESETS)} found):\n")
    for name, config in sorted(PRESETS.items()):
        click.echo(
            f"  - {name}: N={config.N}, S={config.S}, J={config.J}, Bz={config.Bz}, "
            f"B0x={config.B0x}, t0={config.t0}, TW={config.TW}, lambda={config.damping}, "
            f"t_end={config.t_end}"
        )
    click.echo()


if __name__ == "__main__":
    cli()
