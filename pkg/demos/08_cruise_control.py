"""Closed-loop cruise control on 17 cells, with a mid-run fault.

The driver ramps the target up to 63, the vehicle settles at 60, and
pressing Set latches that speed.  A permanent fault then lands in the
throttle-scaling cell while cruising; healing completes inside one
control period, so the speed trajectory never deviates from the
fault-free run.  With matplotlib installed the trajectories are saved
as a PNG next to this script.
"""

from pathlib import Path

from cellfab.scenarios import load_scenario
from cellfab.sim import run_raw

golden = run_raw(load_scenario("ccs_step"))
faulted = run_raw(load_scenario("ccs_fc16_permanent"))

speed = dict(golden.plant_log)
target = {r.time // 1000: r.value for r in golden.trace.records
          if r.signal == "active" and r.annotation == "data"}
print("period   target   speed")
for k in (10, 40, 63, 100, 170, 172, 220, 299):
    print(f"{k:6d}   {target.get(k, 0):6d}   {speed.get(k * 1000, 0):5d}")

syndrome = faulted.syndromes[0]
print(f"\nfault in cell {syndrome.cell_id} detected {syndrome.detect_time} ns, "
      f"restored {syndrome.actions[-1][1]} ns (within one 1000 ns period)")

diverged = [t for t, v in golden.plant_log if dict(faulted.plant_log).get(t) != v]
print(f"speed samples differing from the fault-free run: {len(diverged)}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [t / 1000 for t, _ in golden.plant_log]
    plt.figure(figsize=(9, 4))
    plt.plot(ts, [v for _, v in golden.plant_log], label="speed (fault-free)")
    plt.plot(ts, [v for _, v in faulted.plant_log], ":", label="speed (fault healed)")
    plt.plot(sorted(target), [target[k] for k in sorted(target)], label="target")
    plt.axvline(syndrome.detect_time / 1000, color="red", alpha=0.4, label="fault")
    plt.xlabel("control period")
    plt.ylabel("speed units")
    plt.legend()
    out = Path(__file__).parent / "cruise_control.png"
    plt.savefig(out, dpi=120, bbox_inches="tight")
    print(f"plot saved to {out}")
except ImportError:
    print("matplotlib not installed; skipping the plot")
