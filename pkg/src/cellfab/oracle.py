"""Ideal netlist evaluator used as the independent reference.

Evaluates a netlist directly on integers in topological order with
fault-free, redundancy-free semantics: one value per node, DELAY nodes
read prior state.  Deliberately shares no evaluation code with the cell
model so the two can check each other.
"""

from __future__ import annotations

from .cell import WidthMode, wrap16
from .netlist import IMM_REF, Netlist, Opcode, node_width, topological_order


def _trunc_q88(p: int) -> int:
    q = abs(p) >> 8
    return -q if p < 0 else q


class NetlistOracle:
    """Stateful step-by-step reference evaluation of a netlist."""

    def __init__(self, nl: Netlist):
        self.netlist = nl
        self.order = topological_order(nl)
        self.delay_nodes = [n for n in nl.nodes if n.opcode is Opcode.DELAY]
        self.state: dict[str, tuple[int, ...]] = {
            n.name: (0,) * n.delay_cycles for n in self.delay_nodes
        }
        self.widths = {n.name: node_width(nl, n) for n in nl.nodes}

    def step(self, inputs: dict[str, int]) -> dict[str, int]:
        """Advance one stimulus period; returns every node's settled value."""
        missing = [n for n in self.netlist.input_names() if n not in inputs]
        if missing:
            raise ValueError(f"incomplete input assignment: missing {missing}")
        values: dict[str, int] = dict(inputs)
        for node in self.delay_nodes:
            values[node.name] = self.state[node.name][0]
        for name in self.order:
            node = self.netlist.node(name)
            if node.opcode is Opcode.DELAY:
                continue
            values[name] = self._eval_node(node, values)
        for node in self.delay_nodes:
            captured = self._operand(node, 0, values)
            self.state[node.name] = self.state[node.name][1:] + (captured,)
        return values

    def outputs(self, values: dict[str, int]) -> dict[str, int]:
        return {name: values[node] for name, node in self.netlist.outputs.items()}

    def _operand(self, node, i: int, values: dict[str, int]) -> int:
        ref = node.operands[i]
        return node.immediate if ref == IMM_REF else values[ref]

    def _eval_node(self, node, values: dict[str, int]) -> int:
        bit = self.widths[node.name] is WidthMode.BIT
        ops = [self._operand(node, i, values) for i in range(len(node.operands))]
        op = node.opcode
        if op is Opcode.NOP:
            return 0
        if op is Opcode.AND:
            r = ops[0] & ops[1]
        elif op is Opcode.OR:
            r = ops[0] | ops[1]
        elif op is Opcode.NOT:
            r = ~ops[0]
        elif op is Opcode.ADD:
            r = ops[0] + ops[1]
        elif op is Opcode.SUB:
            r = ops[0] - ops[1]
        elif op is Opcode.MUL:
            r = _trunc_q88(ops[0] * ops[1])
        elif op is Opcode.CMP:
            return 1 if ops[0] >= ops[1] else 0
        elif op is Opcode.MUX:
            return ops[1] if ops[0] == 0 else ops[2]
        else:
            raise ValueError(f"oracle cannot evaluate {op}")
        return r & 1 if bit else wrap16(r)


def reference_eval(
    nl: Netlist,
    inputs: dict[str, int],
    delay_state: dict[str, tuple[int, ...]] | None = None,
) -> tuple[dict[str, int], dict[str, tuple[int, ...]]]:
    """One-shot ideal evaluation: (primary outputs, advanced delay state)."""
    oracle = NetlistOracle(nl)
    if delay_state is not None:
        for name, pipe in delay_state.items():
            oracle.state[name] = tuple(pipe)
    values = oracle.step(inputs)
    return oracle.outputs(values), dict(oracle.state)


def settled_reference(nl: Netlist, inputs: dict[str, int], holds: int) -> dict[str, int]:
    """Outputs after holding one input vector for ``holds`` periods.

    With inputs held constant every delay pipeline flushes to a
    history-independent fixpoint, which is the steady state the fabric
    must reach as well.
    """
    oracle = NetlistOracle(nl)
    values: dict[str, int] = {}
    for _ in range(max(1, holds)):
        values = oracle.step(inputs)
    return oracle.outputs(values)
