"""CLI commands for retspec."""

import logging
import sys
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from ..exceptions import ProblemValidationError, RetSpecError
from ..harness import ExperimentReport, run_experiment
from .config import ExperimentConfig, ExperimentKind, load_config
from .reports import format_number

app = typer.Typer(help="Spectral experiments for the retarded interface problem.")
console = Console()

CONFIG_OPTION = typer.Option(..., "--config", help="Path to the experiment TOML file")
OUT_OPTION = typer.Option(None, "--out", help="Output directory (overrides output_path)")
N_MAX_OPTION = typer.Option(None, "--n-max", min=1, help="Largest eigenvalue index")
SEED_OPTION = typer.Option(None, "--seed", help="Seed for randomized checks")
STEPS_OPTION = typer.Option(None, "--steps", min=1, help="Integrator step count per subinterval")
STRICT_OPTION = typer.Option(
    False, "--strict", help="Fail when the instance is outside the gated regime"
)
VERBOSE_OPTION = typer.Option(False, "--verbose", help="Enable debug logging")


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=verbose)],
        force=True,
    )


def apply_overrides(
    cfg: ExperimentConfig,
    kind: ExperimentKind,
    n_max: Optional[int] = None,
    seed: Optional[int] = None,
    steps: Optional[int] = None,
    strict: bool = False,
) -> ExperimentConfig:
    """Command-line flags take precedence over the file."""
    experiment = {"kind": kind}
    if n_max is not None:
        experiment["n_max"] = n_max
    if seed is not None:
        experiment["seed"] = seed
    if strict:
        experiment["strict"] = True
    update = {"experiment": cfg.experiment.model_copy(update=experiment)}
    if steps is not None:
        update["integrator"] = cfg.integrator.model_copy(update={"step_count": steps})
    return cfg.model_copy(update=update)


def _run(
    kind: ExperimentKind,
    config: Path,
    out: Optional[Path],
    n_max: Optional[int],
    seed: Optional[int],
    steps: Optional[int],
    strict: bool,
    verbose: bool,
) -> None:
    _configure_logging(verbose)
    try:
        cfg = apply_overrides(load_config(config), kind, n_max, seed, steps, strict)
        if verbose:
            console.print(f"[blue]Loaded configuration from {config}[/blue]")
        report = run_experiment(cfg, out)
        output_pretty(report)
        if verbose:
            for path in report.files:
                console.print(f"[blue]Wrote {path}[/blue]")
    except ProblemValidationError as e:
        console.print("[red]Error: invalid problem[/red]")
        for violation in e.violations:
            console.print(f"[red]  • {violation.describe()}[/red]")
        sys.exit(2)
    except RetSpecError as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(2)
    except Exception as e:
        console.print(f"[red]Unexpected error: {e}[/red]")
        if verbose:
            import traceback

            console.print(traceback.format_exc())
        sys.exit(2)

    if kind is ExperimentKind.VERIFY:
        sys.exit(0 if report.passed else 1)


@app.command()
def spectrum(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    n_max: Optional[int] = N_MAX_OPTION,
    seed: Optional[int] = SEED_OPTION,
    steps: Optional[int] = STEPS_OPTION,
    strict: bool = STRICT_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Compute eigenvalues 1..n_max and compare them with the asymptotic formulas."""
    _run(ExperimentKind.SPECTRUM, config, out, n_max, seed, steps, strict, verbose)


@app.command()
def trace(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    n_max: Optional[int] = N_MAX_OPTION,
    seed: Optional[int] = SEED_OPTION,
    steps: Optional[int] = STEPS_OPTION,
    strict: bool = STRICT_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Partial sums of the regularized trace against its closed-form right side."""
    _run(ExperimentKind.TRACE, config, out, n_max, seed, steps, strict, verbose)


@app.command()
def nodal(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    n_max: Optional[int] = N_MAX_OPTION,
    seed: Optional[int] = SEED_OPTION,
    steps: Optional[int] = STEPS_OPTION,
    strict: bool = STRICT_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Numeric eigenfunction zeros against the nodal-point formulas."""
    _run(ExperimentKind.NODAL, config, out, n_max, seed, steps, strict, verbose)


@app.command()
def verify(
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    n_max: Optional[int] = N_MAX_OPTION,
    seed: Optional[int] = SEED_OPTION,
    steps: Optional[int] = STEPS_OPTION,
    strict: bool = STRICT_OPTION,
    verbose: bool = VERBOSE_OPTION,
) -> None:
    """Run every property and oracle check; exits 1 if an enforced check fails."""
    _run(ExperimentKind.VERIFY, config, out, n_max, seed, steps, strict, verbose)


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else format_number(value)


def output_pretty(report: ExperimentReport) -> None:
    """Print the main result of an experiment as rich tables."""
    if report.kind in (ExperimentKind.SPECTRUM, ExperimentKind.VERIFY):
        table = Table(title="Eigenvalues")
        for column in ("n", "root", "theorem1", "|error|"):
            table.add_column(column, justify="right")
        for row in report.rows:
            table.add_row(str(row.n), _fmt(row.root), _fmt(row.theorem1), f"{row.error:.3e}")
        console.print(table)

    if report.trace is not None:
        table = Table(title="Regularized trace")
        for column in ("N", "S_N", "rhs", "|S_N - rhs|"):
            table.add_column(column, justify="right")
        for (N, total), (_, difference) in zip(report.trace.partial_sums, report.trace.differences):
            table.add_row(str(N), _fmt(total), _fmt(report.trace.rhs), f"{difference:.3e}")
        console.print(table)
        if report.trace.near_zero_flagged:
            console.print("[yellow]No near-zero root found; its contribution was taken as 0[/yellow]")

    for nodal_table in report.nodal:
        table = Table(title=f"Nodal points, n = {nodal_table.n}")
        for column in ("j", "numeric", "formula", "|error|", "side"):
            table.add_column(column, justify="right")
        for row in nodal_table.rows:
            table.add_row(
                "-" if row.j is None else str(row.j),
                _fmt(row.x_numeric),
                _fmt(row.x_formula),
                "-" if row.abs_error is None else f"{row.abs_error:.3e}",
                row.side.value,
            )
        console.print(table)

    if report.kind is ExperimentKind.VERIFY:
        table = Table(title="Checks")
        for column in ("check", "result", "value", "threshold", "note"):
            table.add_column(column)
        for entry in report.summary["checks"]:
            if entry["passed"]:
                result = "[green]✓ pass[/green]"
            elif entry["enforced"]:
                result = "[red]✗ fail[/red]"
            else:
                result = "[yellow]✗ fail (not enforced)[/yellow]"
            table.add_row(
                entry["name"], result, _fmt(entry["value"]), _fmt(entry["threshold"]), entry.get("note", "")
            )
        console.print(table)

    if not report.summary["gated"]:
        console.print("[yellow]⚠️  Instance is outside the gated regime; asymptotic checks are informational[/yellow]")
    status = "[green]✓ passed[/green]" if report.passed else "[red]✗ failed[/red]"
    console.print(f"{report.kind.value}: {status} (seed {report.summary['seed']}, output in {report.out_dir})")


if __name__ == "__main__":
    app()
