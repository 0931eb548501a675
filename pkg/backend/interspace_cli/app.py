"""Typer application: one subcommand per experiment."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from rich.console import Console
from rich.table import Table

from interspace import __version__
from interspace.core.config import InterspaceSettings, get_settings
from interspace.core.report import ExperimentReport
from interspace.errors import ConfigError, InterspaceError
from interspace_cli.config import load_run_config
from interspace_cli.runner import Runner, RunResult

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

COMMANDS: Dict[str, str] = {
    "sample": "Draw one partial sum X_N and write its path and coefficients.",
    "blocks": "Build and certify a block schedule.",
    "norms": "Sup, H^1, Hölder and both block norms of one path or coefficient file.",
    "verify-key-inequality": "Block frequencies P(2^(k a)||W_k|| >= 2^-k) against 2^-k.",
    "zn-convergence": "Trajectories of Z_n, tail jumps and small-ball masses.",
    "borel-cantelli": "Sup-variant Markov bounds per block and their summability.",
    "fernique": "Exponential square moments E exp(rho ||X||^2) over a rho grid.",
    "tightness": "Tail slope of P(eps ||X|| > r) in eps^-2.",
    "concentration": "Gaussian mass of a symmetric body against its section.",
    "line-concentration": "Small-ball mass of the sum-block norm along a line.",
    "block-variance": "Block variances of Brownian motion on the dyadic schedule.",
    "ciesielski": "Sup-block norm against the Ciesielski sequence norm.",
    "kfunctional": "K-functional between sup norm and H^1 on random paths.",
    "theta": "Distribution of the interpolation norm across resolutions.",
}

app = typer.Typer(
    name="interspace",
    help="Intermediate Banach-space norms for Gaussian series, checked by Monte Carlo.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)


def _configure_logging(settings: InterspaceSettings, output_dir: Path) -> None:
    """Configure run logging destinations."""

    log_file = Path(output_dir) / "logs" / "interspace.log"
    log_file.parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        handlers=[
            logging.StreamHandler(),
            logging.FileHandler(log_file, encoding="utf-8"),
        ],
        force=True,
    )


def _format(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6g}"


def _print_report(report: ExperimentReport, result: RunResult) -> None:
    table = Table(title=f"{report.name} (seed={report.seed}, replicates={report.replicates})")
    table.add_column("item")
    table.add_column("estimate", justify="right")
    table.add_column("std error", justify="right")
    table.add_column("bound", justify="right")
    table.add_column("status")
    for item in report.items:
        status = {True: "[green]pass[/green]", False: "[red]FAIL[/red]", None: "[dim]info[/dim]"}
        table.add_row(
            item.name,
            _format(item.estimate),
            _format(item.std_error),
            _format(item.bound),
            status[item.passed],
        )
    console.print(table)
    checked = len(report.checked_items)
    failed = len(report.failed_items)
    verdict = "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"
    console.print(f"{verdict}  {checked - failed}/{checked} checks passed")
    console.print(f"Report: {result.report_path}", markup=False)


def _run(
    command: str,
    config_path: Optional[Path],
    overrides: Optional[List[str]],
    flags: Dict[str, Any],
) -> None:
    settings = get_settings()
    try:
        run_config = load_run_config(command, config_path, overrides, flags)
    except ConfigError as exc:
        err_console.print(str(exc), markup=False, style="red")
        raise typer.Exit(code=EXIT_INVALID)

    _configure_logging(settings, run_config.output_dir or settings.output_dir)
    try:
        result = Runner(run_config, settings).run()
    except ConfigError as exc:
        err_console.print(str(exc), markup=False, style="red")
        raise typer.Exit(code=EXIT_INVALID)
    except InterspaceError as exc:
        logger.error("run_failed command=%s error=%s", command, exc)
        err_console.print(f"{type(exc).__name__}: {exc}", markup=False, style="red")
        raise typer.Exit(code=EXIT_FAILED)

    _print_report(result.report, result)
    raise typer.Exit(code=EXIT_OK if result.report.passed else EXIT_FAILED)


def _register(command: str, help_text: str) -> None:
    def run_command(
        config: Optional[Path] = typer.Option(
            None, "--config", "-c", help="YAML run config (default: the shipped one)"
        ),
        overrides: Optional[List[str]] = typer.Option(
            None, "--set", help="Override any key, e.g. --set schedule.alpha=0.4"
        ),
        seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
        level: Optional[int] = typer.Option(None, "--level", help="Dyadic grid level L"),
        alpha: Optional[float] = typer.Option(None, "--alpha", help="Block weight exponent"),
        replicates: Optional[int] = typer.Option(None, "--replicates", help="Monte Carlo R"),
        workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
        output_dir: Optional[Path] = typer.Option(None, "--output-dir", help="Artifact directory"),
        name: Optional[str] = typer.Option(None, "--name", help="Artifact name prefix"),
    ) -> None:
        _run(
            command,
            config,
            overrides,
            {
                "sampling.seed": seed,
                "sampling.level": level,
                "schedule.alpha": alpha,
                "sampling.replicates": replicates,
                "sampling.workers": workers,
                "output_dir": str(output_dir) if output_dir is not None else None,
                "name": name,
            },
        )

    app.command(name=command, help=help_text)(run_command)


for _command, _help in COMMANDS.items():
    _register(_command, _help)


def _version_callback(value: bool) -> None:
    if value:
        console.print(f"interspace {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Optional[bool] = typer.Option(
        None, "--version", callback=_version_callback, is_eager=True, help="Show the version"
    ),
) -> None:
    """Intermediate Banach-space norms for Gaussian series, checked by Monte Carlo."""
