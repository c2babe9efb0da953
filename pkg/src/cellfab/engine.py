"""Deterministic discrete-event simulation kernel.

Evaluation follows level-synchronous waves: every stimulus (clock) event
first shifts the delay registers, then applies input changes, then
schedules each combinational cell exactly once at clock + level x Delta.
Fault injections and healing steps run as local events that re-evaluate
one cell and cascade downstream only when its output actually changed.
Events are totally ordered by (time, sequence number), so two runs of
the same scenario produce byte-identical traces.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Optional

from . import __version__
from .cell import (
    CellHealth,
    CellId,
    CheckResult,
    FaultClass,
    FunctionalCell,
    Opcode,
    Port,
    StuckBehavior,
    Value,
    WidthMode,
    classify,
    qmul,
    wrap16,
)
from .fabric import Alarm, Fabric, FaultKind, HealAction, HealthSyndrome
from .place import FabricProgram


@dataclass(frozen=True)
class TimingParams:
    """All timing knobs of a run; defaults are the calibration set.

    The bundled EDG netlist has combinational depth 7 and the default
    cell delay is 35 ns, so a fault-free wave settles in 245 ns.  With
    the check threshold at 2 the second confirming self-check lands one
    cell delay after detection, and reroute/restore each add one more.
    """

    cell_delay: int = 35
    check_threshold: int = 2
    reroute_delay: int = 35
    restore_delay: int = 35
    stimulus_period: int = 300

    def validate(self) -> None:
        if self.cell_delay <= 0 or self.reroute_delay <= 0 or self.restore_delay <= 0:
            raise ValueError("all delays must be > 0")
        if self.stimulus_period <= 0:
            raise ValueError("stimulus_period must be > 0")
        if self.check_threshold < 1:
            raise ValueError("check_threshold must be >= 1")

    def describe(self) -> str:
        return (
            f"cell_delay={self.cell_delay} check_threshold={self.check_threshold} "
            f"reroute_delay={self.reroute_delay} restore_delay={self.restore_delay} "
            f"stimulus_period={self.stimulus_period}"
        )


class FaultKindSpec:
    TRANSIENT_REGISTER = "transient_register"
    PERMANENT_GFB = "permanent_gfb"
    INTERMITTENT_BURST = "intermittent_burst"


@dataclass(frozen=True)
class FaultSpec:
    """One injected fault.

    transient_register corrupts a single replica of one port and lasts
    until the next write to that port; permanent_gfb installs a stuck or
    bit-flip behaviour on the cell's primary evaluation path from its
    injection time onward; intermittent_burst expands into ``count``
    transients spaced ``period`` apart.
    """

    kind: str
    cell: CellId
    time: int
    port: Optional[Port] = None
    replica: Optional[int] = None
    flip: Optional[int] = None
    stuck: Optional[int] = None
    period: Optional[int] = None
    count: Optional[int] = None

    def validate(self) -> None:
        if self.kind not in (
            FaultKindSpec.TRANSIENT_REGISTER,
            FaultKindSpec.PERMANENT_GFB,
            FaultKindSpec.INTERMITTENT_BURST,
        ):
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if self.time < 0:
            raise ValueError("fault time must be >= 0")
        if (self.flip is None) == (self.stuck is None):
            raise ValueError("exactly one of flip/stuck must be set")
        if self.kind != FaultKindSpec.PERMANENT_GFB:
            if self.port is None or self.replica not in (0, 1, 2):
                raise ValueError("register faults need a port and replica 0..2")
        if self.kind == FaultKindSpec.INTERMITTENT_BURST:
            if not self.period or not self.count or self.period <= 0 or self.count < 1:
                raise ValueError("burst needs period > 0 and count >= 1")


def expand_faults(faults: list[FaultSpec]) -> list[FaultSpec]:
    """Expand intermittent bursts into their individual transients."""
    out: list[FaultSpec] = []
    for f in faults:
        f.validate()
        if f.kind == FaultKindSpec.INTERMITTENT_BURST:
            for i in range(f.count):
                out.append(
                    replace(
                        f,
                        kind=FaultKindSpec.TRANSIENT_REGISTER,
                        time=f.time + i * f.period,
                        period=None,
                        count=None,
                    )
                )
        else:
            out.append(f)
    return out


@dataclass
class PlantFeedback:
    """Closed-loop vehicle model driving one input from one output.

    At every stimulus clock the speed integrates the previous period's
    settled actuator command: v' = v + (gain*u - drag*v)*dt in Q8.8.
    """

    input_name: str
    output_name: str
    v0: int = 0
    gain: int = 128
    drag: int = 64
    dt: int = 256


@dataclass
class Scenario:
    name: str
    application: str  # bundled app name or a netlist path
    stimulus: list[tuple[int, str, int]] = field(default_factory=list)
    faults: list[FaultSpec] = field(default_factory=list)
    timing: TimingParams = field(default_factory=TimingParams)
    run_until: int = 1000
    seed: int = 0
    plant: Optional[PlantFeedback] = None

    def validate(self, input_names: list[str]) -> None:
        self.timing.validate()
        if self.run_until <= 0:
            raise ValueError("run_until must be > 0")
        at_zero = {name for t, name, _ in self.stimulus if t == 0}
        missing = [n for n in input_names if n not in at_zero]
        if missing:
            raise ValueError(f"stimulus must cover all primary inputs at t=0: {missing}")
        for t, name, _ in self.stimulus:
            if t < 0:
                raise ValueError("stimulus time must be >= 0")
            if name not in input_names:
                raise ValueError(f"unknown input {name!r} in stimulus")

    def without_faults(self) -> "Scenario":
        return replace(self, faults=[], name=self.name + "+golden")


ANNOTATIONS = ("data", "masked_transient", "mismatch", "syndrome_action", "alarm")


@dataclass(frozen=True)
class TraceRecord:
    time: int
    signal: str
    value: int
    annotation: str


@dataclass
class Trace:
    scenario_name: str
    application: str
    timing: TimingParams
    seed: int
    version: str = __version__
    records: list[TraceRecord] = field(default_factory=list)
    complete: bool = False

    def add(self, time: int, signal: str, value: int, annotation: str) -> None:
        self.records.append(TraceRecord(time, signal, value, annotation))

    def output_records(self, output_names: set[str]) -> list[TraceRecord]:
        """The primary-output data samples only (the comparable output trace)."""
        return [
            r
            for r in self.records
            if r.annotation == "data" and r.signal in output_names
        ]

    def signals(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            if r.annotation == "data":
                seen.setdefault(r.signal, None)
        return list(seen)


# event kinds, processed in (time, seq) order
_CLOCK = 0
_INJECT = 1
_EVAL = 2
_HEAL = 3
_STOP = 4

_STOP_SEQ = 1 << 62


@dataclass
class RunResult:
    trace: Trace
    fabric: Fabric
    syndromes: list[HealthSyndrome]
    plant_log: list[tuple[int, int]] = field(default_factory=list)  # (t, speed)


class Engine:
    """One scenario run over one fabric; single-threaded, deterministic."""

    def __init__(self, program: FabricProgram, scenario: Scenario):
        self.fabric = Fabric(program)
        self.scenario = scenario
        self.timing = scenario.timing
        self.trace = Trace(
            scenario_name=scenario.name,
            application=scenario.application,
            timing=scenario.timing,
            seed=scenario.seed,
        )
        self.syndromes: list[HealthSyndrome] = []
        self._heap: list[tuple[int, int, int, object]] = []
        self._seq = 0
        self._pending_evals: dict[tuple[int, int], bool] = {}  # (fn, t) -> wave?
        self._syndromed: set[str] = set()
        self.faults = expand_faults(scenario.faults)
        self.plant_speed = scenario.plant.v0 if scenario.plant else 0
        self.plant_log: list[tuple[int, int]] = []

    # ---- scheduling ----------------------------------------------------

    def _push(self, time: int, kind: int, payload: object, seq: Optional[int] = None) -> None:
        if seq is None:
            seq = self._seq
            self._seq += 1
        heapq.heappush(self._heap, (time, seq, kind, payload))

    def _schedule_eval(self, fn_idx: int, time: int, wave: bool) -> None:
        fn = self.fabric.functions[fn_idx]
        if fn.node.opcode is Opcode.DELAY and not wave:
            return  # delay registers shift on the clock only
        key = (fn_idx, time)
        if key in self._pending_evals:
            self._pending_evals[key] = self._pending_evals[key] or wave
            return
        self._pending_evals[key] = wave
        self._push(time, _EVAL, fn_idx)

    # ---- run loop -------------------------------------------------------

    def run(self) -> RunResult:
        scenario = self.scenario
        scenario.validate(self.fabric.netlist.input_names())
        timeline: dict[int, list[tuple[str, int]]] = {}
        for t, name, value in scenario.stimulus:
            timeline.setdefault(t, []).append((name, value))
        clock_times = set(range(0, scenario.run_until + 1, self.timing.stimulus_period))
        clock_times.update(timeline)
        for t in sorted(clock_times):
            if t <= scenario.run_until:
                self._push(t, _CLOCK, timeline.get(t, []))
        for fault in self.faults:
            self._push(fault.time, _INJECT, fault)
        self._push(scenario.run_until, _STOP, None, seq=_STOP_SEQ)

        while self._heap:
            time, _, kind, payload = heapq.heappop(self._heap)
            if time > scenario.run_until:
                continue
            if kind == _STOP:
                break
            if kind == _CLOCK:
                self._handle_clock(time, payload)
            elif kind == _INJECT:
                self._handle_inject(time, payload)
            elif kind == _EVAL:
                self._handle_eval(time, payload)
            elif kind == _HEAL:
                self._handle_heal(time, payload)
        self.trace.complete = True
        return RunResult(self.trace, self.fabric, self.syndromes, self.plant_log)

    # ---- handlers -------------------------------------------------------

    def _handle_clock(self, t: int, assignments: list[tuple[str, int]]) -> None:
        fabric = self.fabric
        assignments = list(assignments)
        plant = self.scenario.plant
        if plant is not None and t > 0:
            out_fn = fabric.output_binding[plant.output_name]
            throttle = fabric.published.get(out_fn) or 0
            self.plant_speed = plant_step_raw(
                self.plant_speed, throttle, plant.gain, plant.drag, plant.dt
            )
            self.plant_log.append((t, self.plant_speed))
            assignments.append((plant.input_name, self.plant_speed))

        # phase 1: clock every delay register off last period's port values
        shifted: list[tuple[int, Value]] = []
        for fn_idx in sorted(fabric.functions):
            fn = fabric.functions[fn_idx]
            if fn.node.opcode is not Opcode.DELAY:
                continue
            cell = fabric.binding[fn_idx]
            if cell.health is CellHealth.FAULTY_DEACTIVATED:
                continue
            value = self._evaluate_cell(fn, cell, t)
            shifted.append((fn_idx, value))
        for fn_idx, value in shifted:
            self._publish(fn_idx, value, t, cascade=False)

        # phase 2: apply stimulus
        for name, value in assignments:
            fabric.input_values[name] = value
            self.trace.add(t, f"in.{name}", value, "data")
            width = fabric.input_widths[name]
            v = Value(width, value & 1 if width is WidthMode.BIT else wrap16(value))
            for cell, port in fabric.consumers_of_input(name):
                cell.registers.write(port, v, t)

        # phase 3: one wave, each combinational cell at its level
        delta = self.timing.cell_delay
        for fn_idx in sorted(fabric.functions):
            fn = fabric.functions[fn_idx]
            if fn.node.opcode is Opcode.DELAY:
                continue
            self._schedule_eval(fn_idx, t + fn.level * delta, wave=True)

    def _handle_inject(self, t: int, fault: FaultSpec) -> None:
        fabric = self.fabric
        applied = inject(fault, fabric, t)
        self.trace.add(t, f"fault.{fault.cell}", 1 if applied else 0, "data")
        if not applied:
            return
        fn = fabric.fn_of_cell(fabric.cells[str(fault.cell)])
        if fn is not None:
            self._schedule_eval(fn.index, t, wave=False)

    def _handle_eval(self, t: int, fn_idx: int) -> None:
        wave = self._pending_evals.pop((fn_idx, t), False)
        fabric = self.fabric
        fn = fabric.functions[fn_idx]
        cell = fabric.binding[fn_idx]
        if cell.health is CellHealth.FAULTY_DEACTIVATED:
            return
        value = self._evaluate_cell(fn, cell, t)
        self._publish(fn_idx, value, t, cascade=not wave)

    def _evaluate_cell(self, fn, cell: FunctionalCell, t: int) -> Value:
        """Monitored evaluation: vote, evaluate, self-check, classify."""
        primary, result, masks = cell.step(t)
        cid = cell.cell_id
        three_way = False
        for port in (Port.NORTH, Port.WEST, Port.EAST, Port.SOUTH):
            if masks[port]:
                self.trace.add(
                    t, f"cell.{cid}.{port.value}", masks[port], "masked_transient"
                )
                three_way = three_way or masks[port] == 0b111
        if result is CheckResult.MISMATCH:
            self.trace.add(t, f"cell.{cid}", 1, "mismatch")
            verdict = classify(cell.history, self.timing.check_threshold)
            if verdict is FaultClass.PERMANENT:
                if str(cid) not in self._syndromed:
                    self._raise_syndrome(fn, cell, t)
            else:
                cell.health = (
                    CellHealth.SUSPECT_TRANSIENT
                    if cell.health is CellHealth.HEALTHY
                    else cell.health
                )
                self._schedule_eval(fn.index, t + self.timing.cell_delay, wave=False)
        elif three_way:
            # all three replicas of a port disagree: undetermined, keep watching
            if cell.health is CellHealth.HEALTHY:
                cell.health = CellHealth.SUSPECT_TRANSIENT
            self._schedule_eval(fn.index, t + self.timing.cell_delay, wave=False)
        elif cell.health is CellHealth.SUSPECT_TRANSIENT:
            cell.health = CellHealth.HEALTHY
        return primary

    def _raise_syndrome(self, fn, cell: FunctionalCell, t: int) -> None:
        fabric = self.fabric
        cid = cell.cell_id
        self._syndromed.add(str(cid))
        syndrome = HealthSyndrome(
            cell_id=cid,
            fault_kind=FaultKind.PERMANENT,
            detect_time=t,
            function_index=fn.index,
        )
        self.syndromes.append(syndrome)
        spare = None
        if cid.kind == "F":
            spare = fabric.allocate_spare(cid.layer)
        if spare is None:
            spare = fabric.allocate_spare_global(cid.layer)
        if spare is None:
            self._push(t, _HEAL, (syndrome, HealAction.DEACTIVATE))
            self._fail_safe(t)
            return
        syndrome.chosen_spare = spare
        fabric.reserve(spare)
        reroute_t = t + self.timing.reroute_delay
        restore_t = reroute_t + self.timing.restore_delay
        self._push(t, _HEAL, (syndrome, HealAction.DEACTIVATE))
        self._push(reroute_t, _HEAL, (syndrome, HealAction.REROUTE))
        self._push(restore_t, _HEAL, (syndrome, HealAction.RESTORE))

    def _handle_heal(self, t: int, payload: tuple[HealthSyndrome, HealAction]) -> None:
        syndrome, action = payload
        fabric = self.fabric
        fn_idx = syndrome.function_index
        self.trace.add(
            t, f"heal.{syndrome.cell_id}.{action.value}", fn_idx, "syndrome_action"
        )
        if action is HealAction.DEACTIVATE:
            fabric.deactivate(syndrome, t)
            self._publish(fn_idx, Value(fabric.functions[fn_idx].width, 0), t, cascade=True)
        elif action is HealAction.REROUTE:
            fabric.reroute(syndrome, t)
        elif action is HealAction.RESTORE:
            fabric.restore(syndrome, t)
            if fabric.functions[fn_idx].node.opcode is not Opcode.DELAY:
                self._schedule_eval(fn_idx, t, wave=False)

    def _fail_safe(self, t: int) -> None:
        fabric = self.fabric
        if not fabric.enter_fail_safe():
            return
        self.trace.add(t, "alarm", 2, "alarm")
        for fn_idx in sorted(fabric.outputs_of_fn):
            self._publish(fn_idx, Value(fabric.functions[fn_idx].width, 0), t, cascade=False)

    # ---- value propagation ----------------------------------------------

    def _publish(self, fn_idx: int, value: Value, t: int, cascade: bool) -> None:
        fabric = self.fabric
        if fabric.alarm is Alarm.FAIL_SAFE and fn_idx in fabric.outputs_of_fn:
            value = Value(value.width_mode, 0)
        previous = fabric.published.get(fn_idx)
        changed = previous != value.payload
        fabric.published[fn_idx] = value.payload
        fn = fabric.functions[fn_idx]
        out_names = fabric.outputs_of_fn.get(fn_idx)
        if out_names:
            for name in out_names:
                self.trace.add(t, name, value.payload, "data")
        else:
            self.trace.add(t, f"fn.{fn.node.name}", value.payload, "data")
        consumers = fabric.consumers_of_fn(fn_idx)
        for cell, port in consumers:
            cell.registers.write(port, value, t)
        if cascade and changed:
            delta = self.timing.cell_delay
            seen = set()
            for cell, _port in consumers:
                consumer_fn = fabric.fn_of_cell(cell)
                if consumer_fn is None or consumer_fn.index in seen:
                    continue
                seen.add(consumer_fn.index)
                if consumer_fn.node.opcode is Opcode.DELAY:
                    continue
                self._schedule_eval(consumer_fn.index, t + delta, wave=False)


def plant_step_raw(v: int, u: int, gain: int, drag: int, dt: int) -> int:
    """v' = v + (gain*u - drag*v)*dt, all factors Q8.8, truncated toward zero."""
    return wrap16(v + qmul(dt, qmul(gain, u) - qmul(drag, v)))


def compare_steady_state(
    trace: Trace,
    oracle_outputs: dict[str, int],
    t_from: int,
) -> list[tuple[str, Optional[int], int]]:
    """Mismatches between settled trace outputs and the ideal reference.

    For each primary output the value compared is its last sample at or
    after ``t_from`` (or the value still held from before, if the signal
    did not change afterwards).  Returns (signal, simulated, expected)
    triples; empty means the steady state matches.
    """
    last = max((r.time for r in trace.records), default=0)
    if last < t_from:
        raise ValueError(f"trace ends at {last}, before t_from={t_from}")
    mismatches = []
    for name in sorted(oracle_outputs):
        held: Optional[int] = None
        after: Optional[int] = None
        for r in trace.records:
            if r.annotation != "data" or r.signal != name:
                continue
            if r.time < t_from:
                held = r.value
            else:
                after = r.value
        value = after if after is not None else held
        if value != oracle_outputs[name]:
            mismatches.append((name, value, oracle_outputs[name]))
    return mismatches
