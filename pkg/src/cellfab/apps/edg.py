"""Emergency generator startup application bundled with the package."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..netlist import Netlist, parse_netlist

OUTPUTS = ("EngineStart", "OpenAirStartFuel_Valves")

# Input assignment under which every start permissive is satisfied; the
# standard stimulus of the bundled scenarios.
START_PERMITTED = {
    "fuel_press_ok": 1,
    "lube_press_ok": 1,
    "coolant_ok": 1,
    "air_press_ok": 1,
    "maint_mode": 0,
    "lockout_tripped": 0,
    "estop": 0,
    "overspeed": 0,
    "start_manual": 1,
    "start_auto": 0,
    "battery_ok": 1,
    "crank_relay_ok": 1,
    "field_flash_ok": 1,
    "breaker_open": 1,
}


def reference_equations(inputs: dict[str, int]) -> dict[str, int]:
    """The documented boolean equations, independent of the netlist."""
    s = (
        inputs["fuel_press_ok"]
        & inputs["lube_press_ok"]
        & inputs["coolant_ok"]
        & inputs["air_press_ok"]
        & inputs["battery_ok"]
        & inputs["crank_relay_ok"]
        & (
            1
            ^ (
                (inputs["maint_mode"] | inputs["lockout_tripped"])
                | (inputs["estop"] | inputs["overspeed"])
            )
        )
        & (inputs["start_manual"] | inputs["start_auto"])
    )
    return {
        "EngineStart": s & inputs["field_flash_ok"],
        "OpenAirStartFuel_Valves": s & inputs["breaker_open"],
    }


@dataclass(frozen=True)
class EdgApplication:
    netlist: Netlist
    outputs: tuple[str, str] = OUTPUTS


def netlist_text() -> str:
    return resources.files("cellfab.data").joinpath("edg.nl").read_text()


def build_edg() -> EdgApplication:
    return EdgApplication(netlist=parse_netlist(netlist_text(), "edg"))
