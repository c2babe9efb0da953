"""Function-block netlist: parsing, validation and depth analysis.

Line-oriented text format ('#' starts a comment):

    input <name> : bit|int16
    node <id> = <OPCODE>(<ref>{, <ref>}) [imm=<int>] [delay=<k>]
    output <name> = <id>
    # partition <layer>: <id> <id> ...

An operand reference is an input name, a node id, or the reserved word
``imm`` which wires the port to the node's immediate constant.  The
``# partition`` pragma pins nodes to fabric layers; without it the
placer packs nodes by depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .cell import INT16_MAX, INT16_MIN, Opcode, OPCODE_ARITY, INT16_ONLY_OPCODES, WidthMode

IMM_REF = "imm"


class NetlistError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class NetNode:
    name: str
    opcode: Opcode
    operands: tuple[str, ...]
    immediate: int = 0
    delay_cycles: int = 0
    line: int = 0


@dataclass
class Netlist:
    name: str
    inputs: list[tuple[str, WidthMode]] = field(default_factory=list)
    nodes: list[NetNode] = field(default_factory=list)
    outputs: dict[str, str] = field(default_factory=dict)  # output name -> node id
    partition: list[list[str]] = field(default_factory=list)  # layer -> node ids
    widths: dict[str, WidthMode] = field(default_factory=dict)  # filled by validate

    def input_names(self) -> list[str]:
        return [n for n, _ in self.inputs]

    def input_width(self, name: str) -> WidthMode:
        for n, w in self.inputs:
            if n == name:
                return w
        raise KeyError(name)

    def node(self, name: str) -> NetNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)


_INPUT_RE = re.compile(r"^input\s+(\w+)\s*:\s*(bit|int16)$")
_NODE_RE = re.compile(
    r"^node\s+(\w+)\s*=\s*([A-Z]+)\s*\(\s*([^)]*)\s*\)\s*((?:\w+=-?\d+\s*)*)$"
)
_OUTPUT_RE = re.compile(r"^output\s+(\w+)\s*=\s*(\w+)$")
_PARTITION_RE = re.compile(r"^#\s*partition\s+(\d+)\s*:\s*(.+)$")


def parse_netlist(text: str, name: str = "netlist") -> Netlist:
    """Parse and validate netlist text; raises NetlistError with line numbers."""
    nl = Netlist(name=name)
    partition: dict[int, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        pm = _PARTITION_RE.match(raw.strip())
        if pm:
            idx = int(pm.group(1))
            ids = pm.group(2).replace(",", " ").split()
            partition.setdefault(idx, []).extend(ids)
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _INPUT_RE.match(line)
        if m:
            nl.inputs.append(
                (m.group(1), WidthMode.BIT if m.group(2) == "bit" else WidthMode.INT16)
            )
            continue
        m = _NODE_RE.match(line)
        if m:
            node_name, op_name, operand_text, attr_text = m.groups()
            try:
                opcode = Opcode[op_name]
            except KeyError:
                raise NetlistError(f"unknown opcode {op_name!r}", lineno) from None
            operands = tuple(
                o.strip() for o in operand_text.split(",") if o.strip()
            )
            immediate = 0
            delay = 0
            for attr in attr_text.split():
                key, _, val = attr.partition("=")
                if key == "imm":
                    immediate = int(val)
                elif key == "delay":
                    delay = int(val)
                else:
                    raise NetlistError(f"unknown attribute {key!r}", lineno)
            nl.nodes.append(
                NetNode(node_name, opcode, operands, immediate, delay, lineno)
            )
            continue
        m = _OUTPUT_RE.match(line)
        if m:
            nl.outputs[m.group(1)] = m.group(2)
            continue
        raise NetlistError(f"syntax error: {line!r}", lineno)
    if partition:
        nl.partition = [partition.get(i, []) for i in range(max(partition) + 1)]
    validate_netlist(nl)
    return nl


def validate_netlist(nl: Netlist) -> None:
    input_names = set()
    for iname, _ in nl.inputs:
        if iname == IMM_REF:
            raise NetlistError(f"input name {IMM_REF!r} is reserved")
        if iname in input_names:
            raise NetlistError(f"duplicate input {iname!r}")
        input_names.add(iname)
    node_names = set()
    for node in nl.nodes:
        if node.name in node_names or node.name in input_names:
            raise NetlistError(f"duplicate name {node.name!r}", node.line)
        if node.name == IMM_REF:
            raise NetlistError(f"node name {IMM_REF!r} is reserved", node.line)
        node_names.add(node.name)

    for node in nl.nodes:
        arity = OPCODE_ARITY[node.opcode]
        if len(node.operands) != arity:
            raise NetlistError(
                f"{node.opcode.name} takes {arity} operands, got {len(node.operands)}",
                node.line,
            )
        for ref in node.operands:
            if ref != IMM_REF and ref not in input_names and ref not in node_names:
                raise NetlistError(f"dangling reference {ref!r}", node.line)
        if not (INT16_MIN <= node.immediate <= INT16_MAX):
            raise NetlistError("immediate out of int16 range", node.line)
        if node.opcode is Opcode.DELAY:
            if not (1 <= node.delay_cycles <= 255):
                raise NetlistError("DELAY requires delay=1..255", node.line)
        elif node.delay_cycles != 0:
            raise NetlistError("delay only valid on DELAY nodes", node.line)

    for oname, target in nl.outputs.items():
        if target not in node_names:
            raise NetlistError(f"output {oname!r} references unknown node {target!r}")

    if nl.partition:
        placed = [n for layer in nl.partition for n in layer]
        if sorted(placed) != sorted(node_names):
            raise NetlistError("partition pragma must cover every node exactly once")
        for i, layer in enumerate(nl.partition):
            if len(layer) > 4:
                raise NetlistError(f"partition layer {i} exceeds 4 worker slots")

    _check_combinational_cycles(nl)
    _resolve_widths(nl)


def _resolve_widths(nl: Netlist) -> None:
    """Propagate width modes to every node and enforce width rules.

    Forward references are legal (delay feedback loops need them) so
    widths settle by fixpoint iteration, which terminates in at most one
    pass per node.  Nodes fed only by constants default to BIT.
    """
    widths: dict[str, WidthMode] = dict(nl.inputs)
    pending = list(nl.nodes)
    while pending:
        progressed = False
        still_pending = []
        for node in pending:
            known = [
                widths[ref]
                for ref in node.operands
                if ref != IMM_REF and ref in widths
            ]
            unknown = [
                ref
                for ref in node.operands
                if ref != IMM_REF and ref not in widths
            ]
            if unknown and not known:
                still_pending.append(node)
                continue
            widths[node.name] = known[0] if known else WidthMode.BIT
            progressed = True
        if not progressed:
            for node in still_pending:  # delay-only loops: default to BIT
                widths[node.name] = WidthMode.BIT
            break
        pending = still_pending
    for node in nl.nodes:
        width = widths[node.name]
        for ref in node.operands:
            if ref != IMM_REF and widths[ref] is not width:
                raise NetlistError("operand width modes differ", node.line)
        if node.opcode in INT16_ONLY_OPCODES and width is WidthMode.BIT:
            raise NetlistError(
                f"{node.opcode.name} requires int16 operands", node.line
            )
        if IMM_REF in node.operands and width is WidthMode.BIT and node.immediate not in (0, 1):
            raise NetlistError("bit-wide constant operand must be 0 or 1", node.line)
    nl.widths = widths


def node_width(nl: Netlist, node: NetNode) -> WidthMode:
    """Width mode of a node's output."""
    if not nl.widths:
        _resolve_widths(nl)
    return nl.widths[node.name]


def _combinational_operands(nl: Netlist, node: NetNode) -> list[str]:
    """Operand node ids that propagate combinationally (inputs and the
    outputs of DELAY nodes act as wave sources and are excluded)."""
    delay_nodes = {n.name for n in nl.nodes if n.opcode is Opcode.DELAY}
    input_names = set(nl.input_names())
    return [
        ref
        for ref in node.operands
        if ref != IMM_REF and ref not in input_names and ref not in delay_nodes
    ]


def _check_combinational_cycles(nl: Netlist) -> None:
    """The graph restricted to non-DELAY edges must be acyclic."""
    order, cycle = _topological_order(nl)
    if cycle:
        raise NetlistError(
            "combinational cycle through: " + " -> ".join(cycle),
            nl.node(cycle[0]).line,
        )


def _topological_order(nl: Netlist) -> tuple[list[str], list[str]]:
    deps = {n.name: _combinational_operands(nl, n) for n in nl.nodes}
    state: dict[str, int] = {}  # 0 visiting, 1 done
    order: list[str] = []
    cycle: list[str] = []

    def visit(name: str, stack: list[str]) -> bool:
        if state.get(name) == 1:
            return True
        if state.get(name) == 0:
            cycle.extend(stack[stack.index(name):])
            return False
        state[name] = 0
        stack.append(name)
        for dep in deps[name]:
            if not visit(dep, stack):
                return False
        stack.pop()
        state[name] = 1
        order.append(name)
        return True

    for node in nl.nodes:
        if not visit(node.name, []):
            return [], cycle
    return order, []


def topological_order(nl: Netlist) -> list[str]:
    """Node ids in combinational evaluation order (DELAY edges broken)."""
    order, cycle = _topological_order(nl)
    if cycle:
        raise NetlistError("combinational cycle")
    return order


@dataclass
class DepthReport:
    node_depth: dict[str, int]
    critical_path: int


def depth(nl: Netlist) -> DepthReport:
    """Combinational depth per node.

    depth(node) = 1 + max(depth of non-DELAY operands); primary inputs
    and DELAY node outputs contribute 0 (a delay stage breaks the path).
    """
    delay_nodes = {n.name for n in nl.nodes if n.opcode is Opcode.DELAY}
    input_names = set(nl.input_names())
    depths: dict[str, int] = {}
    for name in topological_order(nl):
        node = nl.node(name)
        best = 0
        for ref in node.operands:
            if ref == IMM_REF or ref in input_names or ref in delay_nodes:
                continue
            best = max(best, depths[ref])
        depths[name] = 1 + best
    # a DELAY node's depth reflects where its captured input settles
    critical = max(depths.values(), default=0)
    return DepthReport(node_depth=depths, critical_path=critical)


def eval_level(nl: Netlist, node: NetNode, report: DepthReport | None = None) -> int:
    """Wave level at which a node's cell evaluates.

    DELAY cells capture on the stimulus clock itself (level 0); all other
    cells evaluate one cell delay after their deepest combinational operand.
    """
    if node.opcode is Opcode.DELAY:
        return 0
    report = report or depth(nl)
    return report.node_depth[node.name]
