"""Command-line interface behaviour and exit codes."""

import pytest

from cellfab.cli import main
from cellfab.genetic import encode_genetic, nop_config, to_hex


@pytest.fixture()
def out_dir(tmp_path):
    return tmp_path / "out"


def test_run_faultfree_writes_artifacts(out_dir, capsys):
    rc = main(["run", "edg_faultfree", "--out", str(out_dir), "--format", "both"])
    assert rc == 0
    assert (out_dir / "edg_faultfree.csv").exists()
    assert (out_dir / "edg_faultfree.vcd").exists()
    assert (out_dir / "edg_faultfree.metrics.txt").exists()
    text = capsys.readouterr().out
    assert "fault_free_latency_ns 245" in text


def test_run_multifault_metrics(out_dir, capsys):
    rc = main(["run", "edg_multifault4", "--out", str(out_dir), "--format", "csv"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "heal_complete_ns 570" in text
    assert not (out_dir / "edg_multifault4.vcd").exists()


def test_run_missing_scenario_nonzero(out_dir, capsys):
    rc = main(["run", "missing.scn", "--out", str(out_dir)])
    assert rc != 0
    assert "not found" in capsys.readouterr().err


def test_run_timing_override(out_dir, capsys):
    rc = main([
        "run", "edg_faultfree", "--out", str(out_dir),
        "--format", "csv", "--timing.cell_delay", "10",
    ])
    assert rc == 0
    assert "fault_free_latency_ns 70" in capsys.readouterr().out


def test_run_outputs_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "edg_permanent_bt", "--out", str(a)]) == 0
    assert main(["run", "edg_permanent_bt", "--out", str(b)]) == 0
    for ext in ("csv", "vcd", "metrics.txt"):
        fa = (a / f"edg_permanent_bt.{ext}").read_bytes()
        fb = (b / f"edg_permanent_bt.{ext}").read_bytes()
        assert fa == fb


def test_validate_edg(tmp_path, capsys):
    nl_path = tmp_path / "edg.nl"
    from cellfab.apps.edg import netlist_text

    nl_path.write_text(netlist_text())
    rc = main(["validate", str(nl_path)])
    assert rc == 0
    assert "14 nodes, depth 7, 4 layers" in capsys.readouterr().out


def test_validate_ccs(tmp_path, capsys):
    nl_path = tmp_path / "ccs.nl"
    from cellfab.apps.ccs import netlist_text

    nl_path.write_text(netlist_text())
    rc = main(["validate", str(nl_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "17 nodes" in out
    assert "5 layers" in out


def test_validate_cyclic_netlist(tmp_path, capsys):
    nl_path = tmp_path / "cyc.nl"
    nl_path.write_text(
        "input a : bit\nnode g1 = AND(g2, a)\nnode g2 = OR(g1, a)\noutput y = g1\n"
    )
    rc = main(["validate", str(nl_path)])
    assert rc == 1
    assert "cycle" in capsys.readouterr().err


def test_disasm_roundtrip(capsys):
    word = to_hex(encode_genetic(nop_config()))
    rc = main(["disasm", word])
    assert rc == 0
    out = capsys.readouterr().out
    assert "opcode        NOP" in out


def test_disasm_flipped_bit_diagnostic(capsys):
    word = encode_genetic(nop_config()) ^ (1 << 40)
    rc = main(["disasm", format(word, "017x")])
    assert rc == 1
    assert "parity" in capsys.readouterr().err


def test_disasm_wrong_length_usage_error(capsys):
    rc = main(["disasm", "123"])
    assert rc == 2
    assert "17" in capsys.readouterr().err


def test_report_from_csv(out_dir, capsys):
    main(["run", "edg_multifault4", "--out", str(out_dir), "--format", "csv"])
    capsys.readouterr()
    rc = main([
        "report", str(out_dir / "edg_multifault4.csv"), "--scenario", "edg_multifault4",
    ])
    assert rc == 0
    assert "heal_complete_ns 570" in capsys.readouterr().out


def test_report_without_scenario(out_dir, capsys):
    main(["run", "edg_multifault4", "--out", str(out_dir), "--format", "csv"])
    capsys.readouterr()
    rc = main(["report", str(out_dir / "edg_multifault4.csv")])
    assert rc == 0
    assert "faults_injected unavailable" in capsys.readouterr().out


def test_every_bundled_scenario_exits_zero(tmp_path):
    from cellfab.scenarios import BUNDLED_SCENARIOS

    rc = main(["run", *BUNDLED_SCENARIOS, "--out", str(tmp_path), "--format", "csv"])
    assert rc == 0
    for name in BUNDLED_SCENARIOS:
        assert (tmp_path / f"{name}.csv").exists()


def test_apps_listing(capsys):
    rc = main(["apps"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "edg: 14 cells" in out
    assert "ccs: 17 cells" in out
    assert "edg_multifault4" in out


def test_fail_safe_still_exits_zero(tmp_path, capsys):
    # spares exhausted mid-run is a reported outcome, not a tool error
    import json

    nl = tmp_path / "single.nl"
    nl.write_text(
        "input a : bit\ninput b : bit\n"
        "node g1 = AND(a, b)\nnode g2 = OR(a, b)\n"
        "node g3 = NOT(a)\nnode g4 = AND(g1, g2)\n"
        "output y1 = g4\noutput y2 = g3\n"
    )
    faults = [
        {"kind": "permanent_gfb", "cell": f"L0.{k}{s}", "t": 400 + 400 * i, "flip": 1}
        for i, (k, s) in enumerate(
            [("F", 0), ("F", 1), ("F", 2), ("F", 3), ("R", 0)]
        )
    ]
    scn = tmp_path / "exhaust.scn"
    scn.write_text(json.dumps({
        "application": str(nl),
        "stimulus": [{"t": 0, "name": "a", "value": 1}, {"t": 0, "name": "b", "value": 1}],
        "faults": faults,
        "run_until": 3000,
        "seed": 1,
    }))
    rc = main(["run", str(scn), "--out", str(tmp_path), "--format", "csv"])
    assert rc == 0
    assert "alarm fail_safe" in capsys.readouterr().out
