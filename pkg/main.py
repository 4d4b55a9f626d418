"""
STV Audit Engine - Main Entry Point

Counts STV elections under several legislated rulesets and looks for the
anomalies those rules allow: negative transfer values, papers gaining
value, and outcomes a loser could have changed by moving papers.

Usage:
    stv-audit count --election F --rules PRESET --out T [--print]
    stv-audit detect --transcript T [--only KIND] [--report R]
    stv-audit shift-search --election F --rules PRESET --donor NAME --beneficiary NAME --max M
    stv-audit compare --election F --rules P1,P2,...

Exit codes: 0 clean, 3 findings, 1 input error, 2 engine error.
"""

import argparse
import logging
import sys
from typing import Optional

from analysis import DETECTORS, compare_rulesets, run_detectors, search_monotonicity
from config import CountConfig
from engine import run_count
from error_handler import (EXIT_CLEAN, EXIT_FINDINGS, EXIT_INPUT_ERROR, ErrorHandler,
                           ErrorType, StvError)
from model import Election
from parser import parse_election
from performance import PerformanceProfiler
from rational import RoundingMode
from rules import PRESETS, SurplusMethod
from transcript_io import (parse_transcript, render_transcript_table, report_to_json,
                           serialize_transcript, write_election_text)

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """argparse rejected the command line; the message is already on stderr."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as exit code 1 instead of exiting with 2."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def parse_arguments(argv: Optional[list[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = _Parser(
        prog="stv-audit",
        description="STV counting engine and anomaly auditor",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Presets: {', '.join(PRESETS)}

Examples:
  %(prog)s count --election tests/value_increase.elec --rules federal --out t.json --print
  %(prog)s detect --transcript t.json --only negative
  %(prog)s shift-search --election tests/monotonicity.elec --rules federal --donor Blake --beneficiary Casey --max 30
  %(prog)s compare --election tests/ruleset_disagreement.elec --rules act_pre2020,nsw_local
        """
    )

    # Output control shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', help='Verbose output (debug logging)')
    common.add_argument('-q', '--quiet', action='store_true', help='Quiet output (errors only)')
    common.add_argument('--benchmark', action='store_true', help='Print phase timings')
    common.add_argument('--max-errors', type=int, default=10, help='Errors to print (default: 10)')

    # Ruleset overrides
    rules = argparse.ArgumentParser(add_help=False)
    rules_group = rules.add_argument_group('ruleset options')
    rules_group.add_argument('--rules', default='federal',
                             help='Preset name, or comma-separated names for compare (default: federal)')
    rules_group.add_argument('--surplus-method', choices=[m.value for m in SurplusMethod],
                             help='Override the preset surplus method')
    rules_group.add_argument('--rounding', choices=[m.value for m in RoundingMode],
                             help='Override the preset rounding')
    rules_group.add_argument('--seed', type=int, help='Seed for random_sample surpluses')

    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    count = sub.add_parser('count', parents=[common, rules], help='Count an election and write a transcript')
    count.add_argument('--election', required=True, help='Election file (text or JSON)')
    count.add_argument('--out', help='Transcript output file')
    count.add_argument('--print', dest='print_table', action='store_true', help='Print the count table')

    detect = sub.add_parser('detect', parents=[common], help='Run anomaly detectors over a transcript')
    detect.add_argument('--transcript', required=True, help='Transcript file written by count')
    detect.add_argument('--only', action='append', choices=list(DETECTORS), help='Run only this detector')
    detect.add_argument('--report', help='Write findings as JSON to this file')

    shift = sub.add_parser('shift-search', parents=[common, rules],
                           help='Search for a preference swap that elects a loser')
    shift.add_argument('--election', required=True, help='Election file (text or JSON)')
    shift.add_argument('--donor', required=True, help='Losing candidate to get elected')
    shift.add_argument('--beneficiary', required=True, help='Candidate swapped with the donor')
    shift.add_argument('--max', type=int, required=True, help='Most papers to swap')
    shift.add_argument('--write-witness', help='Write the manipulated election to this file')

    compare = sub.add_parser('compare', parents=[common, rules], help='Compare winners across presets')
    compare.add_argument('--election', required=True, help='Election file (text or JSON)')

    return parser.parse_args(argv)


def configure_logging(config: CountConfig) -> None:
    if config.verbose:
        level = logging.DEBUG
    elif config.quiet:
        level = logging.ERROR
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def read_file(path: str, handler: ErrorHandler) -> Optional[str]:
    """Load a document with error handling."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        handler.add_error(ErrorType.INPUT, f"cannot read '{path}': {e.strerror or e}",
                          source_file=path, suggestion="Check the file path and ensure the file exists")
        return None


def write_file(path: str, text: str, handler: ErrorHandler) -> bool:
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return True
    except OSError as e:
        handler.add_error(ErrorType.INPUT, f"cannot write '{path}': {e.strerror or e}", source_file=path)
        return False


def load_election(config: CountConfig, handler: ErrorHandler, profiler: PerformanceProfiler) -> Optional[Election]:
    source = read_file(config.election_file, handler)
    if source is None:
        return None
    with profiler.time_phase("parsing"):
        return parse_election(source)


def candidate_index(election: Election, name: str, handler: ErrorHandler, role: str) -> Optional[int]:
    candidate = election.candidate_named(name)
    if candidate is None:
        handler.add_error(ErrorType.INPUT, f"{role} '{name}' is not a candidate",
                          suggestion=f"candidates are: {', '.join(c.name for c in election.candidates)}")
        return None
    return candidate.index


# region Subcommands
def run_count_command(config: CountConfig, handler: ErrorHandler, profiler: PerformanceProfiler) -> int:
    ruleset = config.resolve_ruleset()
    election = load_election(config, handler, profiler)
    if election is None:
        return handler.exit_code()

    with profiler.time_phase("counting"):
        transcript = run_count(election, ruleset)
    profiler.record_count(len(transcript.steps), election.total_papers)

    if config.output_file:
        with profiler.time_phase("writing"):
            if not write_file(config.output_file, serialize_transcript(transcript), handler):
                return handler.exit_code()
    if config.print_table and config.should_print("info"):
        print(render_transcript_table(transcript), end="")
    if config.should_print("info"):
        print(f"{election.name} ({ruleset.name}): quota {transcript.quota.value}, "
              f"{len(transcript.steps)} count(s), elected {', '.join(election.names(transcript.winners))}")
    return EXIT_CLEAN


def run_detect_command(config: CountConfig, handler: ErrorHandler, profiler: PerformanceProfiler) -> int:
    source = read_file(config.transcript_file, handler)
    if source is None:
        return handler.exit_code()
    with profiler.time_phase("parsing"):
        transcript = parse_transcript(source)
    with profiler.time_phase("analysis"):
        report = run_detectors(transcript, config.only)

    if config.report_file:
        with profiler.time_phase("writing"):
            if not write_file(config.report_file, report_to_json(report, transcript.election), handler):
                return handler.exit_code()
    if config.should_print("info"):
        for finding in report.findings:
            print(finding.describe(transcript.election))
        if not report.findings:
            print("no findings")
    return EXIT_FINDINGS if report.findings else EXIT_CLEAN


def run_shift_search_command(config: CountConfig, handler: ErrorHandler, profiler: PerformanceProfiler) -> int:
    ruleset = config.resolve_ruleset()
    election = load_election(config, handler, profiler)
    if election is None:
        return handler.exit_code()
    donor = candidate_index(election, config.donor, handler, "donor")
    beneficiary = candidate_index(election, config.beneficiary, handler, "beneficiary")
    if donor is None or beneficiary is None:
        return handler.exit_code()

    with profiler.time_phase("analysis"):
        manipulation = search_monotonicity(election, ruleset, donor, beneficiary, config.max_papers)

    if manipulation is None:
        if config.should_print("info"):
            print("none")
        return EXIT_CLEAN

    if config.witness_file:
        with profiler.time_phase("writing"):
            if not write_file(config.witness_file, write_election_text(manipulation.modified), handler):
                return handler.exit_code()
    if config.should_print("info"):
        print(f"papers moved: {manipulation.papers_moved}")
        print(manipulation.description)
    return EXIT_FINDINGS


def run_compare_command(config: CountConfig, handler: ErrorHandler, profiler: PerformanceProfiler) -> int:
    rulesets = config.resolve_rulesets()
    if len(rulesets) < 2:
        handler.add_error(ErrorType.INPUT, "compare needs at least two presets",
                          suggestion="pass --rules P1,P2")
        return handler.exit_code()
    election = load_election(config, handler, profiler)
    if election is None:
        return handler.exit_code()

    with profiler.time_phase("counting"):
        comparison = compare_rulesets(election, rulesets)

    if config.should_print("info"):
        width = max(len(name) for name in comparison.rulesets)
        for name in comparison.rulesets:
            print(f"{name.ljust(width)}  {', '.join(election.names(comparison.winners[name]))}")
        print()
        print(" " * width + "  " + "  ".join(str(i) for i in range(len(comparison.rulesets))))
        for i, a in enumerate(comparison.rulesets):
            cells = []
            for b in comparison.rulesets:
                same = a == b or comparison.agreement.get((a, b), comparison.agreement.get((b, a)))
                cells.append("=" if same else "x")
            print(f"{a.ljust(width)}  " + "  ".join(cells) + f"   ({i})")
        for finding in comparison.findings:
            print(finding.describe(election) + f" {finding.evidence['rulesets'][0]} vs {finding.evidence['rulesets'][1]}")
    return EXIT_FINDINGS if comparison.findings else EXIT_CLEAN
# endregion


COMMANDS = {
    "count": run_count_command,
    "detect": run_detect_command,
    "shift-search": run_shift_search_command,
    "compare": run_compare_command,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    try:
        args = parse_arguments(argv)
    except UsageError:
        return EXIT_INPUT_ERROR

    config = CountConfig.from_args(args)
    configure_logging(config)
    handler = ErrorHandler()
    profiler = PerformanceProfiler()
    if config.benchmark:
        profiler.enable()

    source_file = config.election_file or config.transcript_file
    try:
        code = COMMANDS[config.command](config, handler, profiler)
    except StvError as e:
        handler.add_exception(e, source_file)
        code = handler.exit_code()
    except ValueError as e:
        # Ruleset overrides outside their range, e.g. a negative seed
        handler.add_error(ErrorType.INPUT, str(e), source_file=source_file)
        code = handler.exit_code()

    handler.print_errors(config.max_errors)
    if handler.has_errors():
        code = handler.exit_code()
    profiler.print_summary(config.verbose)
    logger.debug("%s finished with exit code %d", config.command, code)
    return code


if __name__ == '__main__':
    sys.exit(main())
