#!/usr/bin/env python3
"""
Functional Load Toolkit CLI
Main entry point for functional-load, cohort and consistency jobs.

Reports go to stdout; logs and error messages go to stderr. Exit codes:
0 success, 1 input or parse error, 2 computation-domain error.
"""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src import __version__
from src.config import JobConfig, get_env_config, load_config
from src.core.errors import FunctionalLoadError
from src.core.job_orchestrator import JobOrchestrator
from src.core.processing_stage import ProcessingStageError
from src.core.report_generator import Report, ReportGenerator

err_console = Console(stderr=True)


class JobGroup(click.Group):
    """Command group that reports usage errors as input errors (exit 1)."""

    def make_context(self, *args: Any, **kwargs: Any) -> click.Context:
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


def configure_logging(verbose: bool) -> None:
    """Send log records to stderr through rich."""
    level = "DEBUG" if verbose else get_env_config()["log_level"]
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_time=False, show_path=False)],
        force=True,
    )


def fail(message: str, exit_code: int) -> None:
    err_console.print(f"[bold red]Error:[/bold red] {escape(message)}", soft_wrap=True)
    sys.exit(exit_code)


def handle_errors(command: Callable[..., None]) -> Callable[..., None]:
    """Map toolkit errors to messages on stderr and stable exit codes."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        ctx = click.get_current_context()
        try:
            command(*args, **kwargs)
        except ProcessingStageError as e:
            cause = e.cause if e.cause is not None else e
            fail(str(cause), e.exit_code)
        except FunctionalLoadError as e:
            fail(str(e), e.exit_code)
        except (OSError, ValueError) as e:
            if ctx.obj.get("verbose"):
                err_console.print_exception()
            fail(str(e), 1)

    return wrapper


def job_options(command: Callable[..., None]) -> Callable[..., None]:
    """Flags shared by every job command."""
    options = [
        click.option("--schema", "schema", type=click.Path(), help="Schema file"),
        click.option("--corpus", type=click.Path(), help="Corpus file (token stream, lexicon or word-key stream)"),
        click.option("--corpus-format", type=click.Choice(["stream", "lexicon"]), help="Corpus file format"),
        click.option("--type", "object_type", help="Object type of the corpus"),
        click.option("--contrast", "contrasts", multiple=True, type=click.Path(), help="Contrast file (repeatable)"),
        click.option("-n", "n", type=int, help="n-gram order"),
        click.option("--output", "-o", type=click.Choice(["tsv", "json", "markdown"]), help="Report format"),
        click.option("--report-file", type=click.Path(), help="Write the report to this file instead of stdout"),
        click.option("--pairs", help='Symbols for pairwise oppositions, e.g. "p b t d"'),
        click.option("--atomic-type", help="Atomic type of --pairs / --phoneme (default: --type)"),
        click.option("--guard", help="Position guard for every pairwise merger, e.g. outermost-initial"),
        click.option("--phoneme", help="Symbol for phoneme-fl (default: every symbol in the model)"),
        click.option("--similar", type=click.Path(), help="Similarity model file"),
        click.option("--join-lexicon", type=click.Path(), help="Pronunciation file joined with a word-key corpus"),
        click.option("--miss", type=click.Choice(["skip", "error"]), help="Policy for word keys without pronunciation"),
        click.option("--jobs", "-j", type=int, help="Worker processes (output identical for any value)"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(ctx: click.Context, overrides: Dict[str, Any]) -> JobConfig:
    return load_config(ctx.obj.get("config_path"), overrides)


def emit(report: Report, config: JobConfig) -> None:
    generator = ReportGenerator(significant_digits=config.significant_digits)
    content = generator.render(report, config.output.value)
    if config.report_file:
        generator.write(content, Path(config.report_file))
    else:
        click.echo(content, nl=False)


def run_job(ctx: click.Context, method: str, overrides: Dict[str, Any]) -> None:
    config = build_config(ctx, overrides)
    orchestrator = JobOrchestrator(config)
    context = orchestrator.load()
    for warning in context.warnings:
        logging.getLogger(__name__).warning(warning)
    emit(getattr(orchestrator, method)(context), config)


@click.group(cls=JobGroup)
@click.version_option(version=__version__, prog_name="fload")
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.option("--config", "-c", type=click.Path(), help="Job config file (YAML)")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config: Optional[str]) -> None:
    """
    Functional Load Toolkit

    Measures how much of a language's information a contrast carries: the
    relative drop in n-gram entropy when the contrast is erased. Every job
    reads a schema, a corpus and contrast files and prints a report.
    """
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config_path"] = config
    try:
        configure_logging(verbose)
    except FunctionalLoadError as e:
        fail(str(e), e.exit_code)


@cli.command()
@job_options
@click.pass_context
@handle_errors
def fl(ctx: click.Context, **options: Any) -> None:
    """
    Functional load of each contrast.

    Example:
        fload fl --schema toy.schema --corpus toy.corpus --type phn --contrast bc.contrast -n 2
    """
    run_job(ctx, "run_fl", options)


@cli.command("fl-matrix")
@job_options
@click.pass_context
@handle_errors
def fl_matrix(ctx: click.Context, **options: Any) -> None:
    """
    Functional load of every pairwise opposition of --pairs, with
    percentile ranks.
    """
    run_job(ctx, "run_fl_matrix", options)


@cli.command()
@job_options
@click.pass_context
@handle_errors
def cohorts(ctx: click.Context, **options: Any) -> None:
    """Cohort statistics of a weighted lexicon under each contrast."""
    run_job(ctx, "run_cohorts", options)


@cli.command("phoneme-fl")
@job_options
@click.pass_context
@handle_errors
def phoneme_fl(ctx: click.Context, **options: Any) -> None:
    """
    Functional load of single phonemes, weighted over possible mergers
    from a similarity model.
    """
    run_job(ctx, "run_phoneme_fl", options)


@cli.command()
@click.argument("report_a", type=click.Path())
@click.argument("report_b", type=click.Path())
@click.option("--threshold", type=float, help="Consistency threshold annotated in the report (default 0.9)")
@click.option("--output", "-o", type=click.Choice(["tsv", "json", "markdown"]), help="Report format")
@click.option("--report-file", type=click.Path(), help="Write the report to this file instead of stdout")
@click.pass_context
@handle_errors
def alpha(
    ctx: click.Context,
    report_a: str,
    report_b: str,
    threshold: Optional[float],
    output: Optional[str],
    report_file: Optional[str],
) -> None:
    """
    Consistency (Pearson correlation) between two fl-matrix reports,
    aligned by pair.
    """
    config = build_config(ctx, {"threshold": threshold, "output": output, "report_file": report_file})
    emit(JobOrchestrator(config).run_alpha(report_a, report_b), config)


@cli.command()
@job_options
@click.pass_context
@handle_errors
def validate(ctx: click.Context, **options: Any) -> None:
    """
    Check the schema, corpus, contrast and similarity files of a job.

    Exits non-zero when any input is invalid.
    """
    config = build_config(ctx, options)
    report = JobOrchestrator(config).run_validate()
    emit(report, config)
    exit_code = report.meta.get("exit_code", 0)
    if exit_code:
        for row in report.rows:
            if row["status"] == "error":
                err_console.print(
                    f"[bold red]{escape(row['stage'])}:[/bold red] {escape(row['detail'])}", soft_wrap=True
                )
        sys.exit(exit_code)


if __name__ == "__main__":
    cli()
