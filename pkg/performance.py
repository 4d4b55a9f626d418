"""
Performance Monitoring Module for the STV Audit Engine

Phase timing for a CLI run (enabled with --benchmark) and a small suite
that times every preset over the election fixtures.
"""

import glob
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Optional

logger = logging.getLogger(__name__)


@dataclass
class PerformanceMetrics:
    """Container for performance metrics."""
    parsing_time: float = 0.0
    counting_time: float = 0.0
    analysis_time: float = 0.0
    writing_time: float = 0.0

    counts_run: int = 0
    papers_counted: int = 0

    memory_usage_mb: float = 0.0
    peak_memory_mb: float = 0.0

    @property
    def total_time(self) -> float:
        return self.parsing_time + self.counting_time + self.analysis_time + self.writing_time

    def counts_per_second(self) -> float:
        if self.counting_time > 0:
            return self.counts_run / self.counting_time
        return 0.0


class PerformanceProfiler:
    """
    Timing and memory tracking for one run. Disabled profilers time nothing.
    """

    PHASES = ("parsing", "counting", "analysis", "writing")

    def __init__(self) -> None:
        self.metrics = PerformanceMetrics()
        self.phase_times: Dict[str, float] = {}
        self.enabled = False

    def enable(self) -> None:
        self.enabled = True

    @contextmanager
    def time_phase(self, phase_name: str):
        """Context manager for timing one phase; repeated phases accumulate."""
        if not self.enabled:
            yield
            return

        start_time = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start_time
            self.phase_times[phase_name] = self.phase_times.get(phase_name, 0.0) + elapsed
            logger.debug("%s took %.2f ms", phase_name, elapsed * 1000)
            if phase_name in self.PHASES:
                attr = f"{phase_name}_time"
                setattr(self.metrics, attr, getattr(self.metrics, attr) + elapsed)

    def record_count(self, steps: int, papers: int) -> None:
        self.metrics.counts_run += steps
        self.metrics.papers_counted += papers

    def get_memory_usage(self) -> float:
        """Get current memory usage in MB."""
        try:
            import psutil
            process = psutil.Process(os.getpid())
            memory_mb = process.memory_info().rss / 1024 / 1024
            self.metrics.memory_usage_mb = memory_mb
            if memory_mb > self.metrics.peak_memory_mb:
                self.metrics.peak_memory_mb = memory_mb
            return memory_mb
        except ImportError:
            # psutil not available, return 0
            return 0.0

    def summary(self, verbose: bool = False) -> str:
        lines = ["=" * 50, "PERFORMANCE SUMMARY", "=" * 50]
        for phase in self.PHASES:
            lines.append(f"{phase.capitalize() + ':':12} {getattr(self.metrics, f'{phase}_time') * 1000:8.2f} ms")
        lines.append(f"{'Total:':12} {self.metrics.total_time * 1000:8.2f} ms")
        if verbose and self.metrics.counts_run:
            lines.append(f"Counts/sec:  {self.metrics.counts_per_second():8.0f}")
            lines.append(f"Papers:      {self.metrics.papers_counted:8d}")
        if self.metrics.memory_usage_mb > 0:
            lines.append(f"Memory:      {self.metrics.memory_usage_mb:8.2f} MB (peak {self.metrics.peak_memory_mb:.2f} MB)")
        lines.append("=" * 50)
        return "\n".join(lines)

    def print_summary(self, verbose: bool = False) -> None:
        if not self.enabled:
            return
        self.get_memory_usage()
        print(self.summary(verbose))


def benchmark_file(file_path: str, preset: str = "federal", iterations: int = 5) -> Dict[str, float]:
    """
    Time parsing and counting of one election file.

    Returns average seconds per phase.
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"Benchmark file not found: {file_path}")

    # Import here to avoid circular imports
    from engine import run_count
    from parser import parse_election
    from rules import get_preset

    with open(file_path, 'r', encoding='utf-8') as f:
        source = f.read()
    ruleset = get_preset(preset)

    times: Dict[str, list] = {'parsing': [], 'counting': []}
    for _ in range(iterations):
        start = time.perf_counter()
        election = parse_election(source)
        times['parsing'].append(time.perf_counter() - start)

        start = time.perf_counter()
        run_count(election, ruleset)
        times['counting'].append(time.perf_counter() - start)

    averages = {phase: sum(ts) / len(ts) if ts else 0.0 for phase, ts in times.items()}
    averages['total'] = averages['parsing'] + averages['counting']
    return averages


def run_performance_suite(pattern: str = "tests/*.elec", iterations: int = 3) -> int:
    """Time every fixture under every preset."""
    from error_handler import StvError
    from rules import PRESETS

    print("STV Audit Engine Performance Suite")
    print("=" * 40)
    files = sorted(glob.glob(pattern))
    if not files:
        print(f"No election files match {pattern}")
        return 1

    for file_path in files:
        print(os.path.basename(file_path))
        for preset in PRESETS:
            try:
                timings = benchmark_file(file_path, preset, iterations)
            except StvError as e:
                print(f"  {preset:18} error: {e}")
                continue
            print(f"  {preset:18} {timings['total'] * 1000:8.2f} ms")
    return 0


if __name__ == '__main__':
    raise SystemExit(run_performance_suite())
