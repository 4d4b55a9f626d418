"""
Configuration Module for the STV Audit Engine

This module provides centralized configuration for a command-line run:
input and output paths, the ruleset preset and its per-run overrides, and
output settings.
"""

from dataclasses import dataclass, field
from typing import Optional

from rules import Ruleset, get_preset, with_overrides


@dataclass
class CountConfig:
    """
    Everything a single CLI invocation needs.

    Ruleset overrides are applied on top of the named preset by
    resolve_ruleset(); nothing is read from the environment.
    """

    # Input/Output settings
    command: Optional[str] = None
    election_file: Optional[str] = None
    transcript_file: Optional[str] = None
    output_file: Optional[str] = None
    report_file: Optional[str] = None
    witness_file: Optional[str] = None

    # Ruleset selection
    presets: list[str] = field(default_factory=lambda: ["federal"])
    surplus_method: Optional[str] = None
    rounding: Optional[str] = None
    sample_seed: Optional[int] = None

    # Analysis settings
    only: list[str] = field(default_factory=list)
    donor: Optional[str] = None
    beneficiary: Optional[str] = None
    max_papers: int = 0

    # Output control
    print_table: bool = False
    benchmark: bool = False
    verbose: bool = False
    quiet: bool = False

    # Error handling
    max_errors: int = 10

    @classmethod
    def from_args(cls, args) -> 'CountConfig':
        """Create configuration from command line arguments."""
        config = cls()

        if hasattr(args, 'command'):
            config.command = args.command
        if getattr(args, 'election', None):
            config.election_file = args.election
        if getattr(args, 'transcript', None):
            config.transcript_file = args.transcript
        if getattr(args, 'out', None):
            config.output_file = args.out
        if getattr(args, 'report', None):
            config.report_file = args.report
        if getattr(args, 'write_witness', None):
            config.witness_file = args.write_witness
        if getattr(args, 'rules', None):
            config.presets = [name.strip() for name in args.rules.split(",") if name.strip()]
        if hasattr(args, 'surplus_method'):
            config.surplus_method = args.surplus_method
        if hasattr(args, 'rounding'):
            config.rounding = args.rounding
        if hasattr(args, 'seed'):
            config.sample_seed = args.seed
        if getattr(args, 'only', None):
            config.only = list(args.only)
        if hasattr(args, 'donor'):
            config.donor = args.donor
        if hasattr(args, 'beneficiary'):
            config.beneficiary = args.beneficiary
        if getattr(args, 'max', None) is not None:
            config.max_papers = args.max
        if hasattr(args, 'print_table'):
            config.print_table = args.print_table
        if hasattr(args, 'benchmark'):
            config.benchmark = args.benchmark
        if hasattr(args, 'verbose'):
            config.verbose = args.verbose
        if hasattr(args, 'quiet'):
            config.quiet = args.quiet
        if getattr(args, 'max_errors', None) is not None:
            config.max_errors = args.max_errors

        return config

    def resolve_ruleset(self, preset: Optional[str] = None) -> Ruleset:
        """Look up a preset (the first configured one by default) and apply the overrides."""
        base = get_preset(preset or self.presets[0])
        return with_overrides(base, self.surplus_method, self.rounding, self.sample_seed)

    def resolve_rulesets(self) -> list[Ruleset]:
        return [self.resolve_ruleset(name) for name in self.presets]

    def should_print(self, level: str = "info") -> bool:
        """Check if output should be printed based on verbosity settings."""
        if self.quiet:
            return level == "error"
        if self.verbose:
            return True
        return level in ["info", "warning", "error"]
