"""Command-line frontend.

Subcommands:
    run       simulate scenario files, export traces and metrics
    validate  parse a netlist, report node count, depth and placement
    disasm    decode a 17-hex-digit genetic code word
    report    recompute metrics from an exported CSV trace
    apps      list bundled applications and scenarios

Fail-safe entry is a reportable simulation outcome, not a tool failure:
``run`` exits 0 for it and reserves nonzero for configuration and I/O
errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .apps import BUNDLED, resolve_netlist
from .genetic import GeneticCodeError, decode_genetic, format_config, from_hex
from .netlist import NetlistError, depth, parse_netlist
from .place import PlacementError, place
from .report import format_metrics, from_csv, metrics, to_csv, to_vcd
from .scenarios import BUNDLED_SCENARIOS, load_scenario


def _add_timing_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--timing.cell_delay", type=int, dest="cell_delay", metavar="NS")
    parser.add_argument("--timing.threshold", type=int, dest="check_threshold", metavar="K")
    parser.add_argument("--timing.reroute_delay", type=int, dest="reroute_delay", metavar="NS")
    parser.add_argument("--timing.restore_delay", type=int, dest="restore_delay", metavar="NS")
    parser.add_argument("--timing.stimulus_period", type=int, dest="stimulus_period", metavar="NS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellfab", description="self-healing cell fabric simulator"
    )
    parser.add_argument("--version", action="version", version=f"cellfab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenario files")
    p_run.add_argument("scenarios", nargs="+", help="scenario file or bundled name")
    p_run.add_argument("--out", default=".", metavar="DIR", help="output directory")
    p_run.add_argument("--format", choices=("csv", "vcd", "both"), default="both")
    p_run.add_argument("--seed", type=int, default=None, metavar="U64")
    _add_timing_overrides(p_run)

    p_val = sub.add_parser("validate", help="validate a netlist file")
    p_val.add_argument("netlist", help="netlist file path")

    p_dis = sub.add_parser("disasm", help="decode a genetic code word")
    p_dis.add_argument("code", help="17 hex digits")

    p_rep = sub.add_parser("report", help="metrics from an exported CSV trace")
    p_rep.add_argument("trace", help="CSV trace path")
    p_rep.add_argument(
        "--scenario",
        default=None,
        help="scenario file enabling golden-run comparison fields",
    )

    sub.add_parser("apps", help="list bundled applications and scenarios")
    return parser


def cmd_run(args) -> int:
    from .sim import run_raw

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    status = 0
    for source in args.scenarios:
        try:
            scenario = load_scenario(source)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {source}: {exc}", file=sys.stderr)
            status = 2
            continue
        overrides = {
            k: getattr(args, k)
            for k in (
                "cell_delay",
                "check_threshold",
                "reroute_delay",
                "restore_delay",
                "stimulus_period",
            )
            if getattr(args, k, None) is not None
        }
        if overrides:
            scenario = dataclasses.replace(
                scenario, timing=dataclasses.replace(scenario.timing, **overrides)
            )
        if args.seed is not None:
            scenario = dataclasses.replace(scenario, seed=args.seed)
        try:
            result = run_raw(scenario)
        except (ValueError, PlacementError, NetlistError) as exc:
            print(f"error: {scenario.name}: {exc}", file=sys.stderr)
            status = 2
            continue
        m = metrics(result.trace, scenario)
        base = out_dir / scenario.name
        if args.format in ("csv", "both"):
            Path(f"{base}.csv").write_text(to_csv(result.trace))
        if args.format in ("vcd", "both"):
            Path(f"{base}.vcd").write_text(to_vcd(result.trace))
        report_text = format_metrics(m, scenario.timing)
        Path(f"{base}.metrics.txt").write_text(report_text)
        print(f"== {scenario.name}")
        print(report_text, end="")
    return status


def cmd_validate(args) -> int:
    path = Path(args.netlist)
    if not path.exists():
        print(f"error: netlist file not found: {path}", file=sys.stderr)
        return 2
    try:
        nl = parse_netlist(path.read_text(), path.stem)
        placement = place(nl)
    except (NetlistError, PlacementError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    report = depth(nl)
    print(
        f"{len(nl.nodes)} nodes, depth {report.critical_path}, "
        f"{placement.layer_count} layers"
    )
    for name, (layer, slot) in sorted(placement.slots.items(), key=lambda kv: kv[1]):
        print(f"  L{layer}.F{slot} {name}")
    return 0


def cmd_disasm(args) -> int:
    try:
        word = from_hex(args.code)
    except GeneticCodeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        config = decode_genetic(word)
    except GeneticCodeError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 1
    print(format_config(config))
    return 0


def cmd_report(args) -> int:
    path = Path(args.trace)
    if not path.exists():
        print(f"error: trace file not found: {path}", file=sys.stderr)
        return 2
    trace = from_csv(path.read_text())
    scenario = load_scenario(args.scenario) if args.scenario else None
    m = metrics(trace, scenario)
    print(format_metrics(m, trace.timing), end="")
    return 0


def cmd_apps(args) -> int:
    print("applications:")
    for name in BUNDLED:
        nl = resolve_netlist(name)
        report = depth(nl)
        outputs = ", ".join(nl.outputs)
        print(
            f"  {name}: {len(nl.nodes)} cells, depth {report.critical_path}, "
            f"outputs {outputs}"
        )
    print("scenarios:")
    for name in BUNDLED_SCENARIOS:
        print(f"  {name}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "validate": cmd_validate,
        "disasm": cmd_disasm,
        "report": cmd_report,
        "apps": cmd_apps,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
