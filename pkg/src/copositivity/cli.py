"""Main CLI interface for the copositivity checker - argparse version."""

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .batch import read_lines, run_batch, write_ndjson
from .config import Config
from .errors import ContractViolation, CopositivityError, InputError
from .parser import parse_input
from .pipeline import (
    UNSUPPORTED_SEPARABLE,
    CheckOptions,
    describe_support,
    run_check,
    support_is_separable,
    verdict_counts,
)
from .report import (
    EXIT_COPOSITIVE,
    EXIT_INCONCLUSIVE,
    EXIT_INPUT_ERROR,
    EXIT_INTERNAL_ERROR,
    Report,
    exit_code_for_error,
)
from .signomial import parse_heights
from .sonc import NEAR_BOUNDARY, sonc_certificate, verify_certificate

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

VERDICT_STYLES = {
    "Copositive": "bold green",
    "TriviallyCopositive": "bold green",
    "NotCopositive": "bold red",
    "TriviallyNegative": "bold red",
    "Inconclusive": "bold yellow",
}


def setup_logging(verbosity: int) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv; records go to stderr."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


class CopositivityCLI:
    """Copositivity checker CLI application."""

    def __init__(self):
        self.config = None

    def initialize(self, config_path=None):
        """Load configuration."""
        self.config = Config(Path(config_path) if config_path else None)
        self.config.load()

    def _options(self, args) -> CheckOptions:
        """CheckOptions from the config file, overridden by command-line flags."""
        fallback = self.config.get_fallback_settings()
        jobs = getattr(args, "jobs", None) or self.config.get_jobs()
        seed = getattr(args, "seed", None)
        trace = getattr(args, "trace", None)
        return CheckOptions(
            heights=getattr(args, "h", None),
            default_height=self.config.get_default_height(),
            assume_nonseparable=getattr(args, "nonseparable", False),
            certify=not getattr(args, "no_certify", False),
            sonc=getattr(args, "sonc", False),
            force=getattr(args, "force", False),
            expand=getattr(args, "expand", False),
            tracker=self.config.tracker_config(
                newton_tol=getattr(args, "tol", None), max_steps=getattr(args, "max_steps", None)
            ),
            krawczyk=self.config.krawczyk_config(),
            n_starts=int(fallback.get("n_starts", 200)),
            seed=seed if seed is not None else int(fallback.get("seed", 0)),
            cluster_tol=float(fallback.get("cluster_tol", 1e-6)),
            jobs=jobs,
            trace_path=Path(trace) if trace else None,
            max_vars=self.config.get_max_vars(),
            max_terms=self.config.get_max_terms(),
            enforce_limits=not getattr(args, "no_limits", False),
        )

    def cmd_check(self, args) -> int:
        """Decide copositivity of one polynomial."""
        report = run_check(args.polynomial, self._options(args))
        if args.json:
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        else:
            self._print_report(report)
        return report.exit_code

    def _print_report(self, report: Report) -> None:
        verdict = report.verdict
        kind = verdict.kind.value if verdict else "Error"
        style = VERDICT_STYLES.get(kind, "bold")

        table = Table(title="Copositivity report")
        table.add_column("Field", style="cyan")
        table.add_column("Value", style="green")

        table.add_row("Input", report.input)
        table.add_row("Variables / terms", f"{report.n} / {report.terms}")
        table.add_row("Support", report.classification or "-")
        if report.gamma_size is not None:
            table.add_row("Face (points, dim)", f"{report.gamma_size}, {report.gamma_dim}")
            table.add_row("Faces in J", str(report.j_size))
        table.add_row("Method", report.method or "[dim]precheck[/dim]")
        if report.t_star is not None:
            table.add_row("t*", f"{report.t_star:.15g}")
        if verdict is not None and verdict.t_interval is not None:
            table.add_row(
                "Certified t",
                f"[{verdict.t_interval.lo:.17g}, {verdict.t_interval.hi:.17g}]",
            )
        if report.track and report.track.get("jacobian_det") is not None:
            table.add_row("det J (scaled)", f"{report.track['jacobian_det']:.3e}")
        table.add_row("Certified", "yes" if verdict and verdict.certified else "no")
        table.add_row("Time", f"{report.timing.get('total', 0.0):.3f}s")

        console.print(table)
        console.print(f"\nVerdict: [{style}]{kind}[/{style}]")
        if verdict is not None and verdict.details.get("reason"):
            console.print(f"[dim]{verdict.details['reason']}[/dim]")
        for warning in report.warnings:
            console.print(f"[yellow]Warning:[/yellow] {warning}")
        if report.verification is not None:
            status = report.verification["status"]
            color = "green" if status == "PASS" else "red"
            n_circuits = len(report.certificate["circuits"])
            console.print(
                f"SONC certificate: {n_circuits} circuits, verification [{color}]{status}[/{color}]"
            )

    def cmd_sonc(self, args) -> int:
        """Emit a SONC certificate with its verification report."""
        options = self._options(args)
        f = parse_input(args.polynomial, expand=options.expand)
        if not options.assume_nonseparable and support_is_separable(f):
            console.print(f"[red]Error:[/red] {UNSUPPORTED_SEPARABLE}")
            return EXIT_INCONCLUSIVE

        h = parse_heights(options.heights, f.support, options.default_height)
        certificate = sonc_certificate(
            f,
            h,
            tracker_config=options.tracker,
            krawczyk_config=options.krawczyk,
            certify=options.certify,
            assume_nonseparable=options.assume_nonseparable,
        )
        near_boundary = any(w.startswith(NEAR_BOUNDARY) for w in certificate.warnings)
        if near_boundary and not options.force:
            console.print(
                "[yellow]The input is too close to the copositivity boundary to decide.[/yellow]"
            )
            console.print("[dim]Use --force to emit the certificate anyway.[/dim]")
            return EXIT_INCONCLUSIVE

        verification = verify_certificate(certificate)
        payload = certificate.to_dict()
        payload["verification"] = verification.to_dict()
        text = json.dumps(payload, indent=2)
        if args.output:
            Path(args.output).write_text(text + "\n")
            console.print(f"[green]✓ Certificate written to:[/green] {args.output}")
        else:
            print(text)
        if not verification.passed:
            err_console.print("[red]Certificate verification failed[/red]")
            return EXIT_INCONCLUSIVE
        return EXIT_COPOSITIVE if not near_boundary else EXIT_INCONCLUSIVE

    def cmd_support(self, args) -> int:
        """Classify the signed support of a polynomial."""
        f = parse_input(args.polynomial, expand=getattr(args, "expand", False))
        info = describe_support(f, dev_oracles=args.dev_oracles)
        if args.json:
            print(json.dumps(info, indent=2))
            return EXIT_COPOSITIVE

        console.print(f"[bold blue]Support classification:[/bold blue] {info['classification']}")
        if "message" in info:
            console.print(f"  {info['message']}")
        console.print(f"  Hull vertices: {info['hull_vertices']}")
        if "gamma" in info:
            gamma = info["gamma"]
            console.print(f"  Face containing A-: {gamma['points']} (dim {gamma['dim']})")
            console.print(f"  Faces in J: {len(info['J'])}")
            console.print(f"  [dim]{info['reason']}[/dim]")
        if info.get("nonseparable"):
            console.print(f"  Simplices around the cell: {info['lambda_size']}")
        if "hyperplane" in info:
            console.print(f"  Separating hyperplane: {info['hyperplane']}")
        for name, value in info.get("oracles", {}).items():
            console.print(f"  [magenta]{name}:[/magenta] {value}")
        return EXIT_COPOSITIVE

    def cmd_batch(self, args) -> int:
        """Check every polynomial of an NDJSON file."""
        options = self._options(args)
        lines = read_lines(Path(args.file))
        if not lines:
            err_console.print("[yellow]No polynomials in the input file.[/yellow]")
            return EXIT_COPOSITIVE

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            console=err_console,
            disable=args.quiet,
        ) as progress:
            task = progress.add_task("Checking polynomials...", total=len(lines))

            def update_progress(done, total):
                progress.update(task, completed=done, description=f"Checked {done}/{total}")

            reports = run_batch(
                lines, options, jobs=options.jobs, progress_callback=update_progress
            )

        with_timing = not args.no_timing
        if args.output:
            with open(args.output, "w") as out:
                write_ndjson(reports, out, with_timing)
        else:
            write_ndjson(reports, sys.stdout, with_timing)

        counts = verdict_counts(reports)
        summary = ", ".join(f"{kind}: {count}" for kind, count in sorted(counts.items()))
        err_console.print(f"[dim]{len(reports)} polynomials ({summary})[/dim]")
        return EXIT_COPOSITIVE

    def cmd_config_show(self, args) -> int:
        """Show the effective configuration."""
        table = Table(title=f"Configuration ({self.config.config_path})")
        table.add_column("Key", style="cyan")
        table.add_column("Value", style="green")
        for section, values in self.config.load().items():
            if isinstance(values, dict):
                for key, value in values.items():
                    table.add_row(f"{section}.{key}", str(value))
            else:
                table.add_row(section, str(values))
        console.print(table)
        return EXIT_COPOSITIVE

    def cmd_config_set(self, args) -> int:
        """Set one configuration value."""
        value = yaml.safe_load(args.value)
        section = args.key.split(".")[0]
        if section not in Config.DEFAULT_CONFIG:
            raise InputError(f"unknown configuration section {section!r}")
        self.config.set(args.key, value)
        console.print(f"[green]✓ Set[/green] {args.key} = {value!r}")
        return EXIT_COPOSITIVE


def _add_polynomial_argument(parser):
    parser.add_argument(
        "polynomial",
        help="Polynomial text such as '1 + x1^2 - x1', a JSON object, or @file",
    )
    parser.add_argument(
        "--expand", action="store_true", help="Accept products and powers and expand them first"
    )


def _add_pipeline_arguments(parser):
    parser.add_argument(
        "--nonseparable",
        action="store_true",
        help="Assert a nonseparable support and skip its detection",
    )
    parser.add_argument(
        "--no-certify", action="store_true", help="Skip interval certification of t*"
    )
    parser.add_argument("--h", help="Heights of the negative terms: one integer or a comma list")
    parser.add_argument("--tol", type=float, help="Newton tolerance of the path tracker")
    parser.add_argument("--max-steps", type=int, help="Maximum number of path tracking steps")
    parser.add_argument(
        "--seed", type=int, default=None, help="Random seed of the separable fallback"
    )
    parser.add_argument("--jobs", type=int, default=None, help="Number of parallel workers")
    parser.add_argument(
        "--force", action="store_true", help="Emit certificates even near the boundary"
    )
    parser.add_argument(
        "--no-limits", action="store_true", help="Lift the size guardrails on n and terms"
    )


def _setup_parsers():
    """Setup all CLI argument parsers."""
    parser = argparse.ArgumentParser(
        prog="copositivity",
        description="Decide copositivity of sparse Laurent polynomials with certified verdicts",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="Path to the configuration file")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="More logging (-v info, -vv debug)"
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # check command
    parser_check = subparsers.add_parser("check", help="Decide copositivity of a polynomial")
    _add_polynomial_argument(parser_check)
    _add_pipeline_arguments(parser_check)
    parser_check.add_argument("--sonc", action="store_true", help="Also build a SONC certificate")
    parser_check.add_argument("--json", action="store_true", help="Print the report as JSON")
    parser_check.add_argument("--trace", help="Write the tracked path to this CSV file")

    # sonc command
    parser_sonc = subparsers.add_parser("sonc", help="Emit a verified SONC certificate")
    _add_polynomial_argument(parser_sonc)
    _add_pipeline_arguments(parser_sonc)
    parser_sonc.add_argument("--output", help="Write the certificate JSON to this file")

    # support command
    parser_support = subparsers.add_parser("support", help="Classify the signed support")
    _add_polynomial_argument(parser_support)
    parser_support.add_argument("--json", action="store_true", help="Print JSON")
    parser_support.add_argument(
        "--dev-oracles",
        action="store_true",
        help="Cross-check with the brute-force triangulation and grid oracles",
    )

    # batch command
    parser_batch = subparsers.add_parser("batch", help="Check an NDJSON file of polynomials")
    parser_batch.add_argument("file", help="NDJSON input, one polynomial per line")
    _add_pipeline_arguments(parser_batch)
    parser_batch.add_argument("--sonc", action="store_true", help="Attach SONC certificates")
    parser_batch.add_argument("--output", help="Write NDJSON reports to this file")
    parser_batch.add_argument(
        "--no-timing", action="store_true", help="Omit timing fields from the reports"
    )
    parser_batch.add_argument("--quiet", action="store_true", help="Hide the progress bar")

    # config subcommands
    parser_config = subparsers.add_parser("config", help="Show or change configuration")
    config_subparsers = parser_config.add_subparsers(
        dest="config_command", help="Config commands"
    )
    config_subparsers.add_parser("show", help="Show the effective configuration")
    parser_config_set = config_subparsers.add_parser("set", help="Set a value (dotted key)")
    parser_config_set.add_argument("key", help="Dotted key, e.g. tracker.max_steps")
    parser_config_set.add_argument("value", help="Value, parsed as YAML")

    return parser


def _handle_commands(cli, args) -> int:
    """Route commands to appropriate handlers."""
    if args.command == "check":
        return cli.cmd_check(args)
    elif args.command == "sonc":
        return cli.cmd_sonc(args)
    elif args.command == "support":
        return cli.cmd_support(args)
    elif args.command == "batch":
        return cli.cmd_batch(args)
    elif args.command == "config":
        return _handle_config_commands(cli, args)
    return EXIT_INPUT_ERROR


def _handle_config_commands(cli, args) -> int:
    """Handle config subcommands."""
    if args.config_command == "set":
        return cli.cmd_config_set(args)
    return cli.cmd_config_show(args)


def main(argv=None):
    """Main entry point for CLI."""
    parser = _setup_parsers()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(0)

    setup_logging(args.verbose)
    cli = CopositivityCLI()
    try:
        cli.initialize(config_path=args.config)
        code = _handle_commands(cli, args)
    except ContractViolation as e:
        err_console.print(f"[red]Error:[/red] {e}")
        if e.hint:
            err_console.print(f"[dim]Hint: {e.hint}[/dim]")
        code = exit_code_for_error(e)
    except CopositivityError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        code = exit_code_for_error(e)
    except (OSError, yaml.YAMLError) as e:
        err_console.print(f"[red]Error:[/red] {e}")
        code = EXIT_INPUT_ERROR
    except Exception as e:  # noqa: BLE001 - crashes exit 70, not a verdict code
        logger.exception("unexpected failure")
        err_console.print(f"[red]Internal error:[/red] {e}")
        code = EXIT_INTERNAL_ERROR
    sys.exit(code)


if __name__ == "__main__":
    main()
