"""Top-level facade: resolve an application, run a scenario, compute metrics."""

from __future__ import annotations

from .apps import resolve_application
from .engine import Engine, RunResult, Scenario, Trace


def run_raw(scenario: Scenario) -> RunResult:
    """Run a scenario and return the full result (trace, fabric, syndromes)."""
    program = resolve_application(scenario.application)
    return Engine(program, scenario).run()


def run(scenario: Scenario):
    """Run a scenario; returns (trace, healing metrics) per the library contract."""
    from .report import metrics  # local import: report runs golden scenarios

    result = run_raw(scenario)
    return result.trace, metrics(result.trace, scenario)


def golden_trace(scenario: Scenario) -> Trace:
    """The fault-free twin of a scenario (same stimulus, faults stripped)."""
    return run_raw(scenario.without_faults()).trace
