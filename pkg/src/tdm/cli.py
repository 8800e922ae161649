#!/usr/bin/env python3
"""
Command line interface for the TDM toolchain.

Diagnostics and log events go to standard error; payloads (counts,
configuration lists, manifests, formatted sources) go to standard output.
"""

import argparse
import os
import sys
from collections.abc import Callable, Iterable
from enum import IntEnum

import structlog

from .checker import ResolvedModel, check, conformance_report
from .config import LOG_LEVELS, ToolConfig, setup_logging
from .diagnostics import Diagnostic, TdmError
from .engine import (
    complete_configuration,
    count_configurations,
    detect_dead_values,
    enumerate_configurations,
)
from .frontend import format_token, parse_model, pretty_print, tokenize
from .model import Assignment, Model
from .release import emit_manifest, generate_release

logger = structlog.get_logger(__name__)


class ExitStatus(IntEnum):
    OK = 0
    FAILURE = 1
    USAGE = 2
    IO_ERROR = 3


class UsageError(Exception):
    """Flag combination the parser cannot reject on its own."""


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def create_parser() -> argparse.ArgumentParser:
    """Create the main CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="tdm", description="TDM toolchain - feature and product models"
    )
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default=None,
        help="Log level (default: TDM_LOG_LEVEL or WARNING)",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Check command
    check_parser = subparsers.add_parser("check", help="Validate a model")
    check_parser.add_argument("file", help="Path to a .tdm file")

    # Configs command
    configs_parser = subparsers.add_parser(
        "configs", help="Count, list or analyze configurations"
    )
    configs_parser.add_argument("file", help="Path to a .tdm file")
    mode = configs_parser.add_mutually_exclusive_group(required=True)
    mode.add_argument("--count", action="store_true", help="Print the number of configurations")
    mode.add_argument("--list", action="store_true", help="Print one configuration per line")
    mode.add_argument("--dead", action="store_true", help="Print values no configuration selects")
    configs_parser.add_argument(
        "--limit", type=_positive_int, default=None, help="Stop --list after N lines"
    )
    configs_parser.add_argument(
        "--spec", default=None, help="Restrict to completions of a configuration"
    )
    configs_parser.add_argument(
        "--force", action="store_true", help="Ignore the state space safety cap"
    )

    # Generate command
    generate_parser = subparsers.add_parser("generate", help="Generate a release manifest")
    generate_parser.add_argument("file", help="Path to a .tdm file")
    generate_parser.add_argument("spec", help="Configuration name")
    generate_parser.add_argument("out", help="Output path, or - for standard output")
    generate_parser.add_argument(
        "--force", action="store_true", help="Ignore the state space safety cap"
    )

    # Fmt command
    fmt_parser = subparsers.add_parser("fmt", help="Format a model canonically")
    fmt_parser.add_argument("file", help="Path to a .tdm file")
    fmt_mode = fmt_parser.add_mutually_exclusive_group()
    fmt_mode.add_argument("--write", action="store_true", help="Rewrite the file in place")
    fmt_mode.add_argument(
        "--verify", action="store_true", help="Fail if the file is not canonical"
    )

    # Report command
    report_parser = subparsers.add_parser("report", help="Print the conformance report")
    report_parser.add_argument("file", help="Path to a .tdm file")

    # Tokens command
    tokens_parser = subparsers.add_parser("tokens", help="Print the token stream")
    tokens_parser.add_argument("file", help="Path to a .tdm file")

    # Version command
    subparsers.add_parser("version", help="Show version information")

    return parser


def _display_path(path: str) -> str:
    return os.path.relpath(path) if os.path.isabs(path) else path


def _print_diagnostics(diagnostics: Iterable[Diagnostic]) -> None:
    for diagnostic in diagnostics:
        print(diagnostic.format(), file=sys.stderr)


def _read(path: str) -> str:
    with open(path, "rb") as handle:
        return handle.read().decode("utf-8")


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _load(path: str) -> Model:
    return parse_model(_read(path), _display_path(path))


def _load_certified(path: str) -> ResolvedModel:
    resolved = check(_load(path))
    if not resolved.certified:
        _print_diagnostics(resolved.errors)
    resolved.require_certified()
    return resolved


def _format_assignment(assignment: Assignment) -> str:
    return ", ".join(f"{feature}={value}" for feature, value in assignment.items())


def handle_check_command(args: argparse.Namespace, _config: ToolConfig) -> int:
    """Handle the check command."""
    resolved = check(_load(args.file))
    _print_diagnostics(resolved.diagnostics)
    return ExitStatus.OK if resolved.certified else ExitStatus.FAILURE


def handle_configs_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the configs command."""
    if args.limit is not None and not args.list:
        raise UsageError("--limit applies to --list only")
    if args.spec is not None and args.dead:
        raise UsageError("--spec cannot be combined with --dead")

    resolved = _load_certified(args.file)
    force, cap = args.force, config.state_cap

    if args.dead:
        for feature, value in detect_dead_values(resolved, force=force, cap=cap):
            print(f"{feature}={value}")
        return ExitStatus.OK

    if args.count:
        if args.spec is not None:
            count = len(complete_configuration(resolved, args.spec, force=force, cap=cap))
        else:
            count = count_configurations(resolved, force=force, cap=cap)
        print(count)
        return ExitStatus.OK

    if args.spec is not None:
        wanted = None if args.limit is None else args.limit + 1
        found = complete_configuration(resolved, args.spec, wanted, force=force, cap=cap)
        assignments = found[: args.limit] if args.limit is not None else found
        truncated = len(found) > len(assignments)
    else:
        enumeration = enumerate_configurations(resolved, args.limit, force=force, cap=cap)
        assignments = list(enumeration.assignments)
        truncated = enumeration.truncated
    for assignment in assignments:
        print(_format_assignment(assignment))
    if truncated:
        logger.warning("configuration list truncated", limit=args.limit)
    return ExitStatus.OK


def handle_generate_command(args: argparse.Namespace, config: ToolConfig) -> int:
    """Handle the generate command."""
    resolved = _load_certified(args.file)
    release = generate_release(
        resolved, args.spec, force=args.force, cap=config.state_cap
    )
    manifest = emit_manifest(release)
    if args.out == "-":
        sys.stdout.write(manifest)
    else:
        _write(args.out, manifest)
        logger.info("manifest written", path=_display_path(args.out))
    return ExitStatus.OK


def handle_fmt_command(args: argparse.Namespace, _config: ToolConfig) -> int:
    """Handle the fmt command."""
    source = _read(args.file)
    canonical = pretty_print(parse_model(source, _display_path(args.file)))
    if args.verify:
        if canonical != source:
            print(
                f"{_display_path(args.file)}: not in canonical format",
                file=sys.stderr,
            )
            return ExitStatus.FAILURE
        return ExitStatus.OK
    if args.write:
        if canonical != source:
            _write(args.file, canonical)
        return ExitStatus.OK
    sys.stdout.write(canonical)
    return ExitStatus.OK


def handle_report_command(args: argparse.Namespace, _config: ToolConfig) -> int:
    """Handle the report command."""
    resolved = check(_load(args.file))
    _print_diagnostics(resolved.diagnostics)
    sys.stdout.write(conformance_report(resolved))
    return ExitStatus.OK if resolved.certified else ExitStatus.FAILURE


def handle_tokens_command(args: argparse.Namespace, _config: ToolConfig) -> int:
    """Handle the tokens command."""
    for token in tokenize(_read(args.file), _display_path(args.file)):
        print(format_token(token))
    return ExitStatus.OK


def handle_version_command(_args: argparse.Namespace, _config: ToolConfig) -> int:
    """Handle the version command."""
    from . import __version__

    print(f"tdm {__version__}")
    return ExitStatus.OK


HANDLERS: dict[str, Callable[[argparse.Namespace, ToolConfig], int]] = {
    "check": handle_check_command,
    "configs": handle_configs_command,
    "generate": handle_generate_command,
    "fmt": handle_fmt_command,
    "report": handle_report_command,
    "tokens": handle_tokens_command,
    "version": handle_version_command,
}


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ExitStatus.OK if exc.code in (0, None) else ExitStatus.USAGE

    if not args.command:
        parser.print_help(sys.stderr)
        return ExitStatus.USAGE

    try:
        config = ToolConfig.from_env()
    except ValueError as e:
        print(f"tdm: {e}", file=sys.stderr)
        return ExitStatus.USAGE

    setup_logging(args.log_level or config.log_level)
    logger.debug("command started", command=args.command)

    try:
        return int(HANDLERS[args.command](args, config))
    except UsageError as e:
        print(f"tdm {args.command}: {e}", file=sys.stderr)
        return ExitStatus.USAGE
    except TdmError as e:
        _print_diagnostics(e.diagnostics)
        logger.info("command failed", command=args.command, errors=len(e.diagnostics))
        return ExitStatus.FAILURE
    except (OSError, UnicodeDecodeError) as e:
        name = getattr(e, "filename", None)
        where = f": {_display_path(str(name))}" if name else ""
        reason = e.strerror if isinstance(e, OSError) and e.strerror else str(e)
        print(f"tdm: {reason}{where}", file=sys.stderr)
        return ExitStatus.IO_ERROR
    except Exception as e:
        if config.debug:
            raise
        print(f"tdm: unexpected error: {e}", file=sys.stderr)
        return ExitStatus.FAILURE


if __name__ == "__main__":
    sys.exit(main())
