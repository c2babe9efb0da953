"""Trace export (CSV, VCD) and healing metrics.

CSV carries the full record stream with a commented header echoing the
run's timing parameters; VCD carries the primary input and output
waveforms for waveform-viewer inspection.  Metrics compare a run against
its fault-free golden twin to count erroneous output samples and time
the healing of every syndrome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import ANNOTATIONS, Scenario, TimingParams, Trace, TraceRecord
from .fabric import HealAction

_META_PREFIXES = ("in.", "fn.", "cell.", "heal.", "fault.")


def output_signals(trace: Trace) -> list[str]:
    """Primary output signal names (bare names by construction)."""
    seen: dict[str, None] = {}
    for r in trace.records:
        if r.annotation == "data" and not r.signal.startswith(_META_PREFIXES) and r.signal != "alarm":
            seen.setdefault(r.signal, None)
    return list(seen)


# ---- CSV ----------------------------------------------------------------


def to_csv(trace: Trace, records: Optional[list[TraceRecord]] = None) -> str:
    """Deterministic CSV export: header comments, then one row per record."""
    rows = [
        f"# scenario: {trace.scenario_name}",
        f"# application: {trace.application}",
        f"# timing: {trace.timing.describe()}",
        f"# seed: {trace.seed}",
        f"# version: cellfab {trace.version}",
        "time_ns,signal,value,annotation",
    ]
    for r in trace.records if records is None else records:
        rows.append(f"{r.time},{r.signal},{r.value},{r.annotation}")
    return "\n".join(rows) + "\n"


def from_csv(text: str) -> Trace:
    """Parse a CSV export back into a trace (header metadata included)."""
    meta = {}
    records = []
    header_seen = False
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        if not header_seen:
            if line != "time_ns,signal,value,annotation":
                raise ValueError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        t, signal, value, annotation = line.split(",")
        if annotation not in ANNOTATIONS:
            raise ValueError(f"unknown annotation {annotation!r}")
        records.append(TraceRecord(int(t), signal, int(value), annotation))
    timing = TimingParams()
    if "timing" in meta:
        kv = dict(part.split("=") for part in meta["timing"].split())
        timing = TimingParams(**{k: int(v) for k, v in kv.items()})
    trace = Trace(
        scenario_name=meta.get("scenario", "unknown"),
        application=meta.get("application", "unknown"),
        timing=timing,
        seed=int(meta.get("seed", 0)),
        records=records,
    )
    trace.complete = True
    return trace


# ---- VCD ----------------------------------------------------------------


def _vcd_id(index: int) -> str:
    chars = [chr(c) for c in range(33, 127)]
    out = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, len(chars))
        out = chars[rem] + out
    return out


def _vcd_vector(value: int) -> str:
    return format(value & 0xFFFF, "016b")


def to_vcd(trace: Trace, widths: Optional[dict[str, int]] = None) -> str:
    """Value-change dump of the primary input and output waveforms.

    One variable per signal, timescale 1 ns, initial dump at t=0 (x for
    signals not yet driven), then changes only.  Signal widths default to
    1 bit unless any sample leaves {0,1}.
    """
    data = [
        r
        for r in trace.records
        if r.annotation == "data"
        and (r.signal.startswith("in.") or not r.signal.startswith(_META_PREFIXES))
        and r.signal != "alarm"
    ]
    signals: dict[str, None] = {}
    for r in data:
        signals.setdefault(r.signal, None)
    if widths is None:
        widths = {}
        for r in data:
            if r.value not in (0, 1):
                widths[r.signal] = 16
        widths = {s: widths.get(s, 1) for s in signals}

    ids = {s: _vcd_id(i) for i, s in enumerate(signals)}
    lines = [
        f"$version cellfab {trace.version} $end",
        "$timescale 1ns $end",
        "$scope module inputs $end",
    ]
    for s in signals:
        if s.startswith("in."):
            lines.append(f"$var wire {widths[s]} {ids[s]} {s[3:]} $end")
    lines.append("$upscope $end")
    lines.append("$scope module outputs $end")
    for s in signals:
        if not s.startswith("in."):
            lines.append(f"$var wire {widths[s]} {ids[s]} {s} $end")
    lines.append("$upscope $end")
    lines.append("$enddefinitions $end")

    # fold records into per-time change sets, first-sample-wins per time
    last: dict[str, Optional[int]] = {s: None for s in signals}
    changes: dict[int, dict[str, int]] = {}
    for r in data:
        if last[r.signal] != r.value:
            changes.setdefault(r.time, {})[r.signal] = r.value
            last[r.signal] = r.value

    lines.append("#0")
    lines.append("$dumpvars")
    at_zero = changes.pop(0, {})
    for s in signals:
        if s in at_zero:
            lines.append(_vcd_change(s, at_zero[s], widths, ids))
        else:
            lines.append(f"bx {ids[s]}" if widths[s] > 1 else f"x{ids[s]}")
    lines.append("$end")
    for t in sorted(changes):
        lines.append(f"#{t}")
        for s, v in changes[t].items():
            lines.append(_vcd_change(s, v, widths, ids))
    return "\n".join(lines) + "\n"


def _vcd_change(signal: str, value: int, widths: dict, ids: dict) -> str:
    if widths[signal] > 1:
        return f"b{_vcd_vector(value)} {ids[signal]}"
    return f"{value & 1}{ids[signal]}"


# ---- metrics ------------------------------------------------------------


@dataclass
class SyndromeMetrics:
    cell: str
    detect_time: int
    function_index: Optional[int] = None
    deactivate_time: Optional[int] = None
    reroute_time: Optional[int] = None
    restore_time: Optional[int] = None
    detect_latency: Optional[int] = None  # vs the earliest matching fault spec
    heal_complete: Optional[int] = None  # first correct output sample post-restore


@dataclass
class HealingMetrics:
    scenario: str
    alarm: str
    fault_free_latency: Optional[int] = None
    faults_injected: Optional[int] = None
    faults_detected: Optional[int] = None
    faults_healed: Optional[int] = None
    erroneous_output_samples: Optional[int] = None
    syndromes: list[SyndromeMetrics] = field(default_factory=list)
    heal_complete: Optional[int] = None
    heal_ratio: Optional[float] = None


def _held_value(samples: list[tuple[int, int]], t: int) -> Optional[int]:
    held = None
    for st, sv in samples:
        if st > t:
            break
        held = sv
    return held


def _syndromes_from_trace(trace: Trace) -> list[SyndromeMetrics]:
    table: dict[str, SyndromeMetrics] = {}
    order: list[str] = []
    fn_of: dict[str, int] = {}
    for r in trace.records:
        if r.annotation != "syndrome_action":
            continue
        cell, action = r.signal.removeprefix("heal.").rsplit(".", 1)
        if cell not in table:
            table[cell] = SyndromeMetrics(cell=cell, detect_time=r.time)
            order.append(cell)
            fn_of[cell] = r.value
        s = table[cell]
        if action == HealAction.DEACTIVATE.value:
            s.deactivate_time = r.time
        elif action == HealAction.REROUTE.value:
            s.reroute_time = r.time
        elif action == HealAction.RESTORE.value:
            s.restore_time = r.time
    out = [table[c] for c in order]
    for s in out:
        s.function_index = fn_of[s.cell]
    return out


def metrics(
    trace: Trace,
    scenario: Optional[Scenario] = None,
    golden: Optional[Trace] = None,
) -> HealingMetrics:
    """Compute healing metrics for a completed run.

    With the scenario at hand the fault-free golden twin is simulated to
    diff output samples and verify heal completion; without it those
    fields stay unavailable (None) rather than failing.
    """
    if not trace.complete:
        raise ValueError("trace incomplete: run did not reach its stop time")
    outputs = output_signals(trace)
    firsts = {}
    for r in trace.records:
        if r.annotation == "data" and r.signal in outputs and r.signal not in firsts:
            firsts[r.signal] = r.time
    fault_free_latency = (
        max(firsts[o] for o in outputs) if outputs and len(firsts) == len(outputs) else None
    )

    alarm = "none"
    if any(r.annotation == "alarm" for r in trace.records):
        alarm = "fail_safe"
    elif any(r.annotation == "syndrome_action" for r in trace.records):
        alarm = "degraded"

    m = HealingMetrics(
        scenario=trace.scenario_name,
        alarm=alarm,
        fault_free_latency=fault_free_latency,
        syndromes=_syndromes_from_trace(trace),
    )

    if scenario is None:
        for s in m.syndromes:
            s.heal_complete = s.restore_time
        m.heal_complete = max(
            (s.heal_complete for s in m.syndromes if s.heal_complete is not None),
            default=None,
        )
        if m.heal_complete is not None and fault_free_latency:
            m.heal_ratio = m.heal_complete / fault_free_latency
        return m

    from .engine import expand_faults
    from .sim import run_raw

    faults = expand_faults(scenario.faults)
    m.faults_injected = len(faults)

    if golden is None:
        golden = run_raw(scenario.without_faults()).trace

    golden_samples: dict[str, list[tuple[int, int]]] = {}
    for r in golden.records:
        if r.annotation == "data":
            golden_samples.setdefault(r.signal, []).append((r.time, r.value))

    erroneous = 0
    for r in trace.records:
        if r.annotation == "data" and r.signal in outputs:
            if _held_value(golden_samples.get(r.signal, []), r.time) != r.value:
                erroneous += 1
    m.erroneous_output_samples = erroneous

    # map each syndrome to the function signal it serves
    from .apps import resolve_application

    program = resolve_application(scenario.application)
    fn_signal: dict[int, str] = {}
    out_names = {idx: [] for idx in program.output_binding.values()}
    for name, idx in program.output_binding.items():
        out_names[idx].append(name)
    for layer in program.layers:
        for slot, node in enumerate(layer.worker_nodes):
            if node is None:
                continue
            idx = layer.index * 4 + slot
            fn_signal[idx] = out_names[idx][0] if idx in out_names else f"fn.{node}"

    trace_samples: dict[str, list[tuple[int, int]]] = {}
    for r in trace.records:
        if r.annotation == "data":
            trace_samples.setdefault(r.signal, []).append((r.time, r.value))

    detected = 0
    healed = 0
    mismatch_times: dict[str, list[int]] = {}
    masked_times: dict[str, list[int]] = {}
    for r in trace.records:
        if r.annotation == "mismatch":
            mismatch_times.setdefault(r.signal[5:], []).append(r.time)
        elif r.annotation == "masked_transient":
            masked_times.setdefault(r.signal[5:], []).append(r.time)

    syndrome_by_cell = {s.cell: s for s in m.syndromes}
    for f in faults:
        cid = str(f.cell)
        if f.kind == "transient_register":
            key = f"{cid}.{f.port.value}"
            if any(t >= f.time for t in masked_times.get(key, [])):
                detected += 1
                healed += 1  # masked by the voter: tolerated in place
        else:
            if any(t >= f.time for t in mismatch_times.get(cid, [])):
                detected += 1
            s = syndrome_by_cell.get(cid)
            if s is not None and s.detect_latency is None:
                s.detect_latency = s.detect_time - f.time

    for s in m.syndromes:
        if s.restore_time is None:
            continue
        signal = fn_signal.get(s.function_index if s.function_index is not None else -1)
        samples = trace_samples.get(signal, []) if signal else []
        for t, v in samples:
            if t >= s.restore_time and _held_value(golden_samples.get(signal, []), t) == v:
                s.heal_complete = t
                healed += 1
                break
    m.faults_detected = detected
    m.faults_healed = healed
    m.heal_complete = max(
        (s.heal_complete for s in m.syndromes if s.heal_complete is not None),
        default=None,
    )
    if m.heal_complete is not None and fault_free_latency:
        m.heal_ratio = m.heal_complete / fault_free_latency
    return m


def format_metrics(m: HealingMetrics, timing: Optional[TimingParams] = None) -> str:
    """Structured key-value text report."""

    def fmt(v):
        return "unavailable" if v is None else v

    lines = [f"scenario {m.scenario}"]
    if timing is not None:
        lines.append(f"timing {timing.describe()}")
    lines += [
        f"alarm {m.alarm}",
        f"fault_free_latency_ns {fmt(m.fault_free_latency)}",
        f"faults_injected {fmt(m.faults_injected)}",
        f"faults_detected {fmt(m.faults_detected)}",
        f"faults_healed {fmt(m.faults_healed)}",
        f"erroneous_output_samples {fmt(m.erroneous_output_samples)}",
        f"heal_complete_ns {fmt(m.heal_complete)}",
        f"heal_ratio {'unavailable' if m.heal_ratio is None else f'{m.heal_ratio:.4f}'}",
        f"syndromes {len(m.syndromes)}",
    ]
    for i, s in enumerate(m.syndromes):
        lines.append(
            f"syndrome[{i}] cell={s.cell} detect={s.detect_time}"
            f" deactivate={fmt(s.deactivate_time)} reroute={fmt(s.reroute_time)}"
            f" restore={fmt(s.restore_time)} detect_latency={fmt(s.detect_latency)}"
            f" heal_complete={fmt(s.heal_complete)}"
        )
    return "\n".join(lines) + "\n"
