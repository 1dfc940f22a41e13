"""Command-line interface for gfftkit."""

from __future__ import annotations

import functools
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any, TypeVar

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .config.manager import ConfigManager
from .core.exceptions import GfftError
from .core.fresnel import (
    class_check,
    eval_functional,
    feynman_integral,
    feynman_kb,
    gfft,
)
from .core.gbm import sample_batch, sample_paths
from .core.logging import get_logger, set_run_context
from .core.timefns import validate_config
from .harness.experiment import VERIFIER_ALIASES, VERIFIER_NAMES, Experiment
from .harness.verify import VerifyReport, all_passed
from .io.charts import residual_chart
from .io.reports import write_paths_csv, write_values_csv, write_verify_csv

logger = get_logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

F = TypeVar("F", bound=Callable[..., Any])


class ExitCodeGroup(click.Group):
    """Maps outcomes to exit codes: usage and config errors 1, failed checks 2."""

    def main(  # type: ignore[override]
        self,
        args: Sequence[str] | None = None,
        prog_name: str | None = None,
        complete_var: str | None = None,
        standalone_mode: bool = True,
        **extra: Any,
    ) -> int:
        try:
            rv = super().main(
                args, prog_name, complete_var, standalone_mode=False, **extra
            )
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.UsageError as e:
            e.show()
            code = EXIT_ERROR
        except click.ClickException as e:
            e.show()
            code = EXIT_ERROR
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_ERROR
        if standalone_mode:
            sys.exit(code)
        return code


def _handle_errors(func: F) -> F:
    """Turn library errors into a one-line message and exit code 1."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except GfftError as e:
            logger.error(e.message, error_type=type(e).__name__, **e.details)
            raise click.ClickException(e.message) from e

    return wrapper  # type: ignore[return-value]


config_option = click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Run configuration (TOML)",
)
out_option = click.option(
    "--out", type=click.Path(dir_okay=False, path_type=Path), help="CSV output path"
)
seed_option = click.option("--seed", type=int, help="Override run.seed")
samples_option = click.option("--samples", type=int, help="Override run.samples")
grid_option = click.option("--grid-n", type=int, help="Override space.grid_n")


def _experiment(
    ctx: click.Context,
    config_path: Path,
    samples: int | None = None,
    seed: int | None = None,
    grid_n: int | None = None,
    out: Path | None = None,
) -> Experiment:
    manager: ConfigManager = ctx.obj["config_manager"]
    config = manager.load_run(config_path)
    config = manager.apply_overrides(config, samples, seed, grid_n, out)
    set_run_context(command=ctx.info_name, config=config_path, seed=config.run.seed)
    return Experiment(config)


def _print_reports(reports: Sequence[VerifyReport]) -> None:
    table = Table(title="Verification")
    columns = ("theorem", "n", "closed", "estimate", "discrepancy", "threshold", "")
    for column in columns:
        table.add_column(column)
    for r in reports:
        table.add_row(
            r.theorem_id,
            "" if r.n is None else str(r.n),
            f"{r.closed_form:.6g}",
            f"{r.estimate:.6g}",
            f"{r.discrepancy:.3e}",
            f"{r.threshold:.3e}",
            "PASS" if r.passed else "FAIL",
        )
    Console().print(table)


@click.group(cls=ExitCodeGroup)
@click.version_option(version=__version__)
@click.option(
    "--home",
    type=click.Path(file_okay=False, path_type=Path),
    help="Runtime directory (defaults to $GFFT_HOME)",
)
@click.pass_context
def cli(ctx: click.Context, home: Path | None) -> None:
    """gfftkit - generalized Fourier-Feynman transforms on C_{a,b}^2[0,T]."""
    ctx.ensure_object(dict)
    ctx.obj["config_manager"] = ConfigManager(home)


@cli.command()
@config_option
@grid_option
@click.pass_context
@_handle_errors
def validate(ctx: click.Context, config_path: Path, grid_n: int | None) -> int:
    """Check the hypotheses on the drift a and variance b."""
    experiment = _experiment(ctx, config_path, grid_n=grid_n)
    report = validate_config(experiment.cfg)

    table = Table(title=f"Space checks: {config_path.name}")
    table.add_column("check")
    table.add_column("value")
    table.add_column("")
    for check in report.checks:
        table.add_row(
            check.name, f"{check.value:.6g}", "PASS" if check.passed else "FAIL"
        )
    Console().print(table)

    if not report.passed:
        click.echo(f"{len(report.failures())} check(s) failed")
        return EXIT_FAILED
    click.echo("All checks passed")
    return EXIT_OK


@cli.command("sample-paths")
@config_option
@click.option("--count", type=int, default=10, show_default=True)
@seed_option
@grid_option
@out_option
@click.pass_context
@_handle_errors
def sample_paths_cmd(
    ctx: click.Context,
    config_path: Path,
    count: int,
    seed: int | None,
    grid_n: int | None,
    out: Path | None,
) -> int:
    """Sample generalized Brownian paths and write them as CSV."""
    experiment = _experiment(ctx, config_path, seed=seed, grid_n=grid_n, out=out)
    paths = sample_paths(experiment.cfg, count, experiment.rng())
    target = experiment.config.run.out
    if target is None:
        raise click.UsageError("--out is required for sample-paths")
    write_paths_csv(paths, target)
    click.echo(f"Wrote {count} paths to {target}")
    return EXIT_OK


@cli.command("eval")
@config_option
@click.option("--count", type=int, default=10, show_default=True)
@seed_option
@grid_option
@out_option
@click.pass_context
@_handle_errors
def eval_cmd(
    ctx: click.Context,
    config_path: Path,
    count: int,
    seed: int | None,
    grid_n: int | None,
    out: Path | None,
) -> int:
    """Evaluate the configured functional on sampled path pairs."""
    experiment = _experiment(ctx, config_path, seed=seed, grid_n=grid_n, out=out)
    rng = experiment.rng()
    x1 = sample_batch(experiment.cfg, 0, count, rng)
    x2 = sample_batch(experiment.cfg, 0, count, rng.sibling())
    values = eval_functional(experiment.functional, x1, x2)
    records = [{"path_id": i, "value": complex(v)} for i, v in enumerate(values)]
    for record in records[:10]:
        click.echo(f"{record['path_id']}: {record['value']:.10g}")
    if experiment.config.run.out is not None:
        write_values_csv(records, experiment.config.run.out, ("path_id", "value"))
    return EXIT_OK


@cli.command("gfft")
@config_option
@grid_option
@out_option
@click.pass_context
@_handle_errors
def gfft_cmd(
    ctx: click.Context, config_path: Path, grid_n: int | None, out: Path | None
) -> int:
    """Evaluate the GFFT at -iq and at the configured interior λ."""
    experiment = _experiment(ctx, config_path, grid_n=grid_n, out=out)
    run = experiment.config.run
    F = experiment.functional
    y1, y2 = experiment.path(run.y1), experiment.path(run.y2)

    boundary = gfft(F, experiment.boundary, y1, y2, q0=run.q0)
    interior = gfft(F, experiment.interior, y1, y2)
    report = class_check(F, run.q0, [experiment.boundary, experiment.interior])

    click.echo(f"GFFT at λ = -i({run.q1}, {run.q2}): {boundary:.12g}")
    click.echo(f"GFFT at λ = {experiment.interior.lam1}: {interior:.12g}")
    click.echo(
        f"Σ|c_k| k_k = {report.weighted_sum:.6g}, "
        f"Γ margin = {report.gamma_margin:.6g}, "
        f"bound holds: {report.bound_holds}"
    )
    if run.out is not None:
        records = [
            {"lambda": "boundary", "value": boundary},
            {"lambda": "interior", "value": interior},
        ]
        write_values_csv(records, run.out, ("lambda", "value"))
    return EXIT_OK


@cli.command("feynman")
@config_option
@grid_option
@out_option
@click.pass_context
@_handle_errors
def feynman_cmd(
    ctx: click.Context, config_path: Path, grid_n: int | None, out: Path | None
) -> int:
    """Evaluate the analytic Feynman integral at (q1, q2)."""
    experiment = _experiment(ctx, config_path, grid_n=grid_n, out=out)
    run = experiment.config.run
    value = feynman_integral(experiment.functional, run.q1, run.q2, q0=run.q0)
    records: list[dict[str, object]] = [{"form": "feynman", "value": value}]
    click.echo(f"Feynman integral at q = ({run.q1}, {run.q2}): {value:.12g}")

    if experiment.config.operators.phi_poly is not None and run.q2 == -run.q1:
        kb = feynman_kb(experiment.measure, experiment.A, run.q1)
        records.append({"form": "kernel", "value": kb})
        click.echo(f"Kernel form over (A⁺, A⁻): {kb:.12g}")
    if run.out is not None:
        write_values_csv(records, run.out, ("form", "value"))
    return EXIT_OK


@cli.command()
@click.argument(
    "theorem", type=click.Choice([*VERIFIER_NAMES, *VERIFIER_ALIASES, "all"])
)
@config_option
@samples_option
@seed_option
@grid_option
@out_option
@click.option(
    "--chart",
    type=click.Path(dir_okay=False, path_type=Path),
    help="SVG chart of residual against n (limit and scale)",
)
@click.pass_context
@_handle_errors
def verify(
    ctx: click.Context,
    theorem: str,
    config_path: Path,
    samples: int | None,
    seed: int | None,
    grid_n: int | None,
    out: Path | None,
    chart: Path | None,
) -> int:
    """Run a theorem verifier and report pass/fail."""
    theorem = VERIFIER_ALIASES.get(theorem, theorem)
    experiment = _experiment(ctx, config_path, samples, seed, grid_n, out)
    verifiers = experiment.verifiers()
    if theorem == "all":
        names = list(verifiers)
    elif theorem not in verifiers:
        raise click.UsageError(
            f"verifier '{theorem}' needs operators.phi_poly in the config"
        )
    else:
        names = [theorem]

    reports: list[VerifyReport] = []
    for name in names:
        reports.extend(verifiers[name]())

    _print_reports(reports)
    if experiment.config.run.out is not None:
        write_verify_csv(reports, experiment.config.run.out)
    if chart is not None:
        if theorem not in ("limit", "scale"):
            raise click.UsageError("--chart applies to 'limit' and 'scale'")
        residual_chart(reports, chart, f"{theorem}: residual against n")

    if not all_passed(reports):
        failed = sum(not r.passed for r in reports)
        click.echo(f"{failed} of {len(reports)} comparison(s) failed")
        return EXIT_FAILED
    click.echo(f"All {len(reports)} comparison(s) passed")
    return EXIT_OK


def run(argv: Sequence[str]) -> int:
    """Run the CLI on argv and return the exit code."""
    return cli.main(args=list(argv), prog_name="gfftkit", standalone_mode=False)


def main() -> None:
    """Main entry point for the CLI."""
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        click.echo("\nOperation cancelled by user")
        sys.exit(EXIT_ERROR)


if __name__ == "__main__":
    main()
