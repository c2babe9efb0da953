"""Trace exports and metrics: CSV/VCD fidelity, golden-diff soundness."""

import re

import pytest

from cellfab.engine import TimingParams, Trace
from cellfab.report import (
    format_metrics,
    from_csv,
    metrics,
    output_signals,
    to_csv,
    to_vcd,
)
from cellfab.scenarios import load_scenario
from cellfab.sim import run_raw


def parse_vcd(text: str):
    """Minimal independent VCD reader: returns (vars, changes).

    vars: id -> (name, width); changes: list of (time, id, value) with
    value None for x.  Raises on malformed structure.
    """
    vars_: dict[str, tuple[str, int]] = {}
    changes = []
    time = None
    in_defs = True
    lines = iter(text.splitlines())
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if in_defs:
            if line.startswith("$var"):
                m = re.fullmatch(r"\$var wire (\d+) (\S+) (\S+) \$end", line)
                if not m:
                    raise ValueError(f"bad $var line: {line!r}")
                vars_[m.group(2)] = (m.group(3), int(m.group(1)))
            elif line.startswith("$enddefinitions"):
                in_defs = False
            elif line.startswith("$") and not line.endswith("$end"):
                raise ValueError(f"unterminated directive: {line!r}")
            continue
        if line in ("$dumpvars", "$end"):
            continue
        if line.startswith("#"):
            time = int(line[1:])
            continue
        if line.startswith("b"):
            bits, ident = line[1:].split()
            value = None if bits == "x" else int(bits, 2)
        else:
            value = None if line[0] == "x" else int(line[0])
            ident = line[1:]
        if ident not in vars_:
            raise ValueError(f"change for undeclared id {ident!r}")
        changes.append((time, ident, value))
    return vars_, changes


@pytest.fixture(scope="module")
def faultfree():
    return run_raw(load_scenario("edg_faultfree"))


def empty_trace():
    return Trace(
        scenario_name="empty", application="edg", timing=TimingParams(), seed=0
    )


class TestCsv:
    def test_header_and_columns(self, faultfree):
        text = to_csv(faultfree.trace)
        lines = text.splitlines()
        assert lines[0] == "# scenario: edg_faultfree"
        assert "# timing: cell_delay=35" in text
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == "time_ns,signal,value,annotation"

    def test_empty_trace_is_header_only(self):
        t = empty_trace()
        t.complete = True
        text = to_csv(t)
        assert text.splitlines()[-1] == "time_ns,signal,value,annotation"

    def test_roundtrip_reproduces_records(self, faultfree):
        text = to_csv(faultfree.trace)
        back = from_csv(text)
        assert back.records == faultfree.trace.records
        assert back.timing == faultfree.trace.timing
        assert back.scenario_name == faultfree.trace.scenario_name

    def test_first_engine_start_row_at_245(self, faultfree):
        text = to_csv(faultfree.trace)
        row = next(l for l in text.splitlines() if l.split(",")[1:2] == ["EngineStart"])
        assert row.startswith("245,EngineStart,1,data")


class TestVcd:
    def test_loads_in_independent_parser(self, faultfree):
        vars_, changes = parse_vcd(to_vcd(faultfree.trace))
        names = {n for n, _ in vars_.values()}
        assert {"EngineStart", "OpenAirStartFuel_Valves", "estop"} <= names
        assert changes, "expected at least the initial dump"

    def test_constant_signal_single_entry(self, faultfree):
        vars_, changes = parse_vcd(to_vcd(faultfree.trace))
        ident = next(i for i, (n, _) in vars_.items() if n == "EngineStart")
        entries = [(t, v) for t, i, v in changes if i == ident]
        assert entries == [(0, None), (245, 1)]

    def test_timescale_and_initial_dump(self, faultfree):
        text = to_vcd(faultfree.trace)
        assert "$timescale 1ns $end" in text
        assert text.index("#0") < text.index("$dumpvars")

    def test_wave_fidelity(self, faultfree):
        # every recorded output change appears in the VCD at its time
        vars_, changes = parse_vcd(to_vcd(faultfree.trace))
        by_name = {}
        for t, i, v in changes:
            by_name.setdefault(vars_[i][0], []).append((t, v))
        seen = {}
        expected = {}
        for r in faultfree.trace.records:
            if r.annotation != "data" or not r.signal == "EngineStart":
                continue
            if seen.get(r.signal) != r.value:
                expected.setdefault(r.signal, []).append((r.time, r.value))
                seen[r.signal] = r.value
        assert by_name["EngineStart"][1:] == expected["EngineStart"]

    def test_transient_masked_wave_identical_to_golden(self):
        masked = run_raw(load_scenario("edg_transient3"))
        golden = run_raw(load_scenario("edg_faultfree"))
        assert to_vcd(masked.trace) == to_vcd(golden.trace)

    def test_int16_vector_variables(self):
        res = run_raw(load_scenario("ccs_step"))
        vars_, changes = parse_vcd(to_vcd(res.trace))
        widths = {n: w for n, w in vars_.values()}
        assert widths["throttle"] == 16
        throttle_id = next(i for i, (n, _) in vars_.items() if n == "throttle")
        assert any(v and v > 1 for t, i, v in changes if i == throttle_id)


class TestMetrics:
    def test_faultfree_metrics(self, faultfree):
        sc = load_scenario("edg_faultfree")
        m = metrics(faultfree.trace, sc)
        assert m.fault_free_latency == 245
        assert m.faults_injected == 0
        assert m.erroneous_output_samples == 0
        assert m.alarm == "none"

    def test_metrics_deterministic(self, faultfree):
        sc = load_scenario("edg_faultfree")
        a = format_metrics(metrics(faultfree.trace, sc), sc.timing)
        b = format_metrics(metrics(faultfree.trace, sc), sc.timing)
        assert a == b

    def test_metrics_without_scenario_reports_unavailable(self, faultfree):
        m = metrics(faultfree.trace)
        assert m.faults_injected is None
        assert m.erroneous_output_samples is None
        text = format_metrics(m)
        assert "faults_injected unavailable" in text

    def test_incomplete_trace_rejected(self):
        with pytest.raises(ValueError, match="incomplete"):
            metrics(empty_trace())

    def test_golden_diff_soundness(self):
        # erroneous samples = 0 iff output records match the golden run
        sc3 = load_scenario("edg_transient3")
        res = run_raw(sc3)
        golden = run_raw(sc3.without_faults())
        m = metrics(res.trace, sc3, golden=golden.trace)
        outs = set(output_signals(res.trace))
        same = res.trace.output_records(outs) == golden.trace.output_records(outs)
        assert (m.erroneous_output_samples == 0) == same
        assert same

    def test_golden_diff_counts_divergence(self):
        sc = load_scenario("edg_multifault4")
        res = run_raw(sc)
        m = metrics(res.trace, sc)
        assert m.erroneous_output_samples > 0
        assert m.heal_complete == 570

    def test_output_signals_excludes_internals(self, faultfree):
        assert set(output_signals(faultfree.trace)) == {
            "EngineStart",
            "OpenAirStartFuel_Valves",
        }
