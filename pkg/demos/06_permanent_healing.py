"""Watching the fabric heal two permanent faults, step by step.

A permanent fault kills the first worker cell; its layer deactivates
the cell, reroutes its inputs into the neighbouring spare and restores
the function from the spare's configuration memory.  At 850 ns a second
fault kills that very spare, and the global layer hands the function to
the next one.
"""

from cellfab.report import format_metrics, metrics
from cellfab.scenarios import load_scenario
from cellfab.sim import run_raw

scenario = load_scenario("edg_permanent_bt")
result = run_raw(scenario)

print("healing timeline:")
for r in result.trace.records:
    if r.annotation == "mismatch":
        print(f"  t={r.time:5d} ns  {r.signal}: self-check mismatch")
    elif r.annotation == "syndrome_action":
        print(f"  t={r.time:5d} ns  {r.signal}")

print()
for s in result.syndromes:
    print(f"syndrome on {s.cell_id}: detected {s.detect_time} ns, "
          f"healed by spare {s.chosen_spare}")

print()
print(format_metrics(metrics(result.trace, scenario), scenario.timing))
