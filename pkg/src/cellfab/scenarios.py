"""Scenario files: JSON schema, loading, and the bundled catalogue.

A scenario file is JSON with sections ``application``, ``timing``,
``stimulus`` (list of {t, name, value}), ``faults`` (list of fault
records), ``run_until`` and ``seed``; closed-loop runs add an optional
``plant`` section wiring one output back into one input through the
demo vehicle model.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .cell import CellId, Port
from .engine import FaultSpec, PlantFeedback, Scenario, TimingParams

BUNDLED_SCENARIOS = (
    "edg_faultfree",
    "edg_transient3",
    "edg_permanent_bt",
    "edg_multifault4",
    "ccs_step",
    "ccs_fc16_permanent",
)

_PORTS = {p.value: p for p in Port}


def _fault_from_dict(d: dict) -> FaultSpec:
    return FaultSpec(
        kind=d["kind"],
        cell=CellId.parse(d["cell"]),
        time=d["t"],
        port=_PORTS[d["port"]] if "port" in d else None,
        replica=d.get("replica"),
        flip=d.get("flip"),
        stuck=d.get("stuck"),
        period=d.get("period"),
        count=d.get("count"),
    )


def _fault_to_dict(f: FaultSpec) -> dict:
    d: dict = {"kind": f.kind, "cell": str(f.cell), "t": f.time}
    if f.port is not None:
        d["port"] = f.port.value
    if f.replica is not None:
        d["replica"] = f.replica
    if f.flip is not None:
        d["flip"] = f.flip
    if f.stuck is not None:
        d["stuck"] = f.stuck
    if f.period is not None:
        d["period"] = f.period
    if f.count is not None:
        d["count"] = f.count
    return d


def scenario_from_dict(data: dict, name: str) -> Scenario:
    timing = TimingParams(**data.get("timing", {}))
    stimulus = [(s["t"], s["name"], s["value"]) for s in data.get("stimulus", [])]
    faults = [_fault_from_dict(f) for f in data.get("faults", [])]
    plant = PlantFeedback(**data["plant"]) if "plant" in data else None
    return Scenario(
        name=name,
        application=data["application"],
        stimulus=stimulus,
        faults=faults,
        timing=timing,
        run_until=data["run_until"],
        seed=data.get("seed", 0),
        plant=plant,
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    data: dict = {
        "application": scenario.application,
        "timing": {
            "cell_delay": scenario.timing.cell_delay,
            "check_threshold": scenario.timing.check_threshold,
            "reroute_delay": scenario.timing.reroute_delay,
            "restore_delay": scenario.timing.restore_delay,
            "stimulus_period": scenario.timing.stimulus_period,
        },
        "stimulus": [
            {"t": t, "name": n, "value": v} for t, n, v in scenario.stimulus
        ],
        "faults": [_fault_to_dict(f) for f in scenario.faults],
        "run_until": scenario.run_until,
        "seed": scenario.seed,
    }
    if scenario.plant is not None:
        p = scenario.plant
        data["plant"] = {
            "input_name": p.input_name,
            "output_name": p.output_name,
            "v0": p.v0,
            "gain": p.gain,
            "drag": p.drag,
            "dt": p.dt,
        }
    return data


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario by bundled name or file path."""
    name = str(source)
    if name in BUNDLED_SCENARIOS:
        text = resources.files("cellfab.data").joinpath(name + ".scn").read_text()
        return scenario_from_dict(json.loads(text), name)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"scenario not found: {source}")
    return scenario_from_dict(json.loads(path.read_text()), path.stem)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")
