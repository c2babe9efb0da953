"""Cruise control application: mode semantics, PI reference and demo plant.

The behavioural contract for the 17-cell netlist is given by ccs_mode
(the target-speed update rules) and pi_reference (the exact fixed-point
controller recurrence); the closed loop is completed by plant_step, a
first-order vehicle model sampled once per stimulus period.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources

from ..cell import qmul, wrap16
from ..netlist import Netlist, parse_netlist


class ModeCondition(Enum):
    SET = "set"
    INCREMENT = "increment"
    DECREMENT = "decrement"
    CANCEL_BRAKE = "cancel_brake"


def ccs_mode(cond: ModeCondition, target: int, actual: int) -> int:
    """Target-speed update for one mode condition.

    Set adopts the measured speed, increment/decrement nudge the target
    by one unit (two's-complement wrap), cancel/brake drops it to zero.
    """
    if cond is ModeCondition.SET:
        return wrap16(actual)
    if cond is ModeCondition.INCREMENT:
        return wrap16(target + 1)
    if cond is ModeCondition.DECREMENT:
        return wrap16(target - 1)
    return 0


@dataclass(frozen=True)
class PiParams:
    """Controller gains in Q8.8 plus actuator clamp bounds.

    Ts is one stimulus period and is folded into ki_q88.
    """

    kp_q88: int = 128  # 0.5
    ki_q88: int = 64  # 0.25 per period
    u_min: int = 0
    u_max: int = 100

    def validate(self) -> None:
        if self.u_min > self.u_max:
            raise ValueError("u_min must not exceed u_max")


def pi_reference(params: PiParams, errors: list[int]) -> list[int]:
    """Exact fixed-point PI recurrence the fabric must reproduce.

    u[k] = clamp(Kp*e[k] + I[k-1] + Ki*e[k]); products are Q8.8 and
    truncate toward zero.  The integrator is back-calculated from the
    clamped output (I[k] = u[k] - Kp*e[k]) so it never accumulates past
    the clamp: no windup while saturated.
    """
    params.validate()
    if not errors:
        raise ValueError("error sequence must be nonempty")
    integ = 0
    out = []
    for e in errors:
        p = qmul(e, params.kp_q88)
        integ_cand = wrap16(integ + qmul(e, params.ki_q88))
        u_raw = wrap16(p + integ_cand)
        u = min(max(u_raw, params.u_min), params.u_max)
        integ = wrap16(u - p)
        out.append(u)
    return out


@dataclass(frozen=True)
class PlantParams:
    """First-order vehicle model, all factors Q8.8."""

    gain_q88: int = 128  # thrust per unit command: 0.5
    drag_q88: int = 64  # speed decay: 0.25
    dt_q88: int = 256  # integration step: 1.0 period

    def validate(self) -> None:
        if self.drag_q88 < 0:
            raise ValueError("drag must be >= 0")


def plant_step(v: int, u: int, params: PlantParams) -> int:
    """v' = v + (gain*u - drag*v)*dt, truncated Q8.8, wrapped to INT16."""
    params.validate()
    force = qmul(params.gain_q88, u) - qmul(params.drag_q88, v)
    return wrap16(v + qmul(params.dt_q88, force))


# Table of per-cell operations the bundled netlist must expose, keyed by
# cell name: the opcode multiset is part of the application's contract.
CCS_CELL_OPCODES = {
    "fc1": "NOT",
    "fc2": "ADD",
    "fc3": "DELAY",
    "fc4": "OR",
    "fc5": "MUX",
    "fc6": "SUB",
    "fc7": "MUX",
    "fc8": "MUX",
    "fc9": "DELAY",
    "fc10": "ADD",
    "fc11": "SUB",
    "fc12": "MUL",
    "fc13": "MUL",
    "fc14": "ADD",
    "fc15": "CMP",
    "fc16": "MUL",
    "fc17": "ADD",
}

INPUTS = ("set_btn", "inc_btn", "dec_btn", "cancel_btn", "brake", "actual_speed")
OUTPUTS = ("throttle", "active")


@dataclass(frozen=True)
class CcsApplication:
    netlist: Netlist
    pi: PiParams
    plant: PlantParams
    inputs: tuple[str, ...] = INPUTS
    outputs: tuple[str, str] = OUTPUTS


def netlist_text() -> str:
    return resources.files("cellfab.data").joinpath("ccs.nl").read_text()


def build_ccs(pi: PiParams | None = None, plant: PlantParams | None = None) -> CcsApplication:
    return CcsApplication(
        netlist=parse_netlist(netlist_text(), "ccs"),
        pi=pi or PiParams(),
        plant=plant or PlantParams(),
    )
