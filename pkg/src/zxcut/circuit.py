"""The ``.zxcirc`` text format and the circuit to ZX translation.

A file starts with ``qubits N`` and then has one instruction per line::

    qubits 2
    INITP 0
    CX 0 1      # @bell
    MZPS 1

``#`` starts a comment.  Two comment forms carry metadata and are kept when a
circuit is printed again: a trailing ``# @name`` labels the spiders created
by that instruction, and the lines ``# @begin NAME`` / ``# @end NAME`` mark a
contiguous instruction range as a named region.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .graph import Diagram, EdgeType, Region, VertexType, _embed, boundary_edge
from .scalar import ExactScalar

ONE_QUBIT = ("H", "S", "SDG", "T", "TDG", "X", "Z", "INIT0", "INITP", "MZPS", "MXPS")
TWO_QUBIT = ("CX", "CZ")
INITS = ("INIT0", "INITP")
MEASURES = ("MZPS", "MXPS")

# Z-rotations in units of pi/4
_Z_PHASE = {"T": 1, "S": 2, "Z": 4, "SDG": 6, "TDG": 7}

_LABEL = re.compile(r"^@([A-Za-z0-9_.\-]+)$")
_REGION = re.compile(r"^@(begin|end)\s+([A-Za-z0-9_.\-]+)$")


class CircuitError(ValueError):
    def __init__(self, msg: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class Instruction:
    op: str
    qubits: tuple[int, ...]
    label: str | None = None


@dataclass
class Circuit:
    n_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    regions: dict[str, tuple[int, int]] = field(default_factory=dict)

    def append(self, op: str, *qubits: int, label: str | None = None) -> None:
        self.instructions.append(Instruction(op, tuple(qubits), label))

    def validate(self) -> None:
        started: set[int] = set()
        measured: set[int] = set()
        for i, ins in enumerate(self.instructions):
            _check_instruction(ins, self.n_qubits, started, measured, None)
        for name, (a, b) in self.regions.items():
            if not 0 <= a <= b <= len(self.instructions):
                raise CircuitError(f"region {name} out of range")

    def t_count(self) -> int:
        return sum(1 for ins in self.instructions if ins.op in ("T", "TDG"))


def _check_instruction(ins: Instruction, n: int, started: set[int], measured: set[int], line: int | None) -> None:
    arity = 2 if ins.op in TWO_QUBIT else 1
    if ins.op not in ONE_QUBIT + TWO_QUBIT:
        raise CircuitError(f"unknown instruction {ins.op!r}", line)
    if len(ins.qubits) != arity:
        raise CircuitError(f"{ins.op} takes {arity} qubit(s), got {len(ins.qubits)}", line)
    for q in ins.qubits:
        if not 0 <= q < n:
            raise CircuitError(f"qubit {q} out of range 0..{n - 1}", line)
        if q in measured:
            raise CircuitError(f"qubit {q} was already measured", line)
    if arity == 2 and ins.qubits[0] == ins.qubits[1]:
        raise CircuitError(f"{ins.op} needs two distinct qubits", line)
    if ins.op in INITS and ins.qubits[0] in started:
        raise CircuitError(f"{ins.op} on qubit {ins.qubits[0]} must be its first instruction", line)
    started.update(ins.qubits)
    if ins.op in MEASURES:
        measured.add(ins.qubits[0])


def parse_circuit(text: str) -> Circuit:
    circ: Circuit | None = None
    started: set[int] = set()
    measured: set[int] = set()
    open_regions: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        comment = comment.strip()
        tokens = body.split()
        if not tokens:
            m = _REGION.match(comment)
            if m and circ is not None:
                kind, name = m.groups()
                pos = len(circ.instructions)
                if kind == "begin":
                    if name in open_regions or name in circ.regions:
                        raise CircuitError(f"region {name} opened twice", lineno)
                    open_regions[name] = pos
                else:
                    if name not in open_regions:
                        raise CircuitError(f"region {name} closed before it was opened", lineno)
                    circ.regions[name] = (open_regions.pop(name), pos)
            continue
        if circ is None:
            if len(tokens) != 2 or tokens[0] != "qubits" or not tokens[1].isdigit():
                raise CircuitError("expected header 'qubits N'", lineno)
            circ = Circuit(int(tokens[1]))
            continue
        op = tokens[0].upper()
        try:
            qs = tuple(int(t) for t in tokens[1:])
        except ValueError:
            raise CircuitError(f"bad qubit index in {body.strip()!r}", lineno) from None
        label = None
        m = _LABEL.match(comment)
        if m:
            label = m.group(1)
        ins = Instruction(op, qs, label)
        _check_instruction(ins, circ.n_qubits, started, measured, lineno)
        circ.instructions.append(ins)
    if circ is None:
        raise CircuitError("empty circuit: missing 'qubits N' header", 1)
    if open_regions:
        raise CircuitError(f"unterminated region(s): {', '.join(sorted(open_regions))}")
    return circ


def print_circuit(c: Circuit) -> str:
    begins: dict[int, list[str]] = {}
    ends: dict[int, list[str]] = {}
    for name, (a, b) in sorted(c.regions.items()):
        begins.setdefault(a, []).append(name)
        ends.setdefault(b, []).append(name)
    lines = [f"qubits {c.n_qubits}"]
    for i in range(len(c.instructions) + 1):
        for name in ends.get(i, []):
            if c.regions[name][0] == i:
                lines.append(f"# @begin {name}")
            lines.append(f"# @end {name}")
        for name in begins.get(i, []):
            if c.regions[name][1] != i:
                lines.append(f"# @begin {name}")
        if i == len(c.instructions):
            break
        ins = c.instructions[i]
        text = " ".join([ins.op, *map(str, ins.qubits)])
        if ins.label:
            text += f"  # @{ins.label}"
        lines.append(text)
    return "\n".join(lines) + "\n"


def circuit_to_diagram(c: Circuit) -> Diagram:
    """Translate a circuit with post-selected measurements into a diagram.

    Uninitialised qubits become inputs and unmeasured qubits outputs, both in
    qubit order.  Each gate is an exact tensor equality, so the diagram
    equals the unnormalised post-selected action of the circuit.
    """
    c.validate()
    d = Diagram()
    n = c.n_qubits
    first_op: dict[int, str] = {}
    for ins in c.instructions:
        for q in ins.qubits:
            first_op.setdefault(q, ins.op)
    frontier: dict[int, int] = {}
    pending: dict[int, EdgeType] = {q: EdgeType.PLAIN for q in range(n)}
    for q in range(n):
        if first_op.get(q) not in INITS:
            frontier[q] = d.add_input()

    in_region: dict[str, set[int]] = {name: set() for name in c.regions}
    # regions only ever pick up powers of sqrt2, tracked as exponents
    region_sqrt2 = {name: 0 for name in c.regions}
    region_pending: dict[str, dict[int, EdgeType]] = {}
    ports: dict[str, dict[int, tuple[int, EdgeType]]] = {name: {} for name in c.regions}

    def active(i: int) -> list[str]:
        return [name for name, (a, b) in c.regions.items() if a <= i < b]

    def attach(q: int, v: int, i: int) -> None:
        prev = frontier.get(q)
        if prev is not None:
            et = pending[q]
            d.add_edge(prev, v, et)
            for name, verts in in_region.items():
                a, b = c.regions[name]
                if prev in verts and not (a <= i < b):
                    rp = region_pending[name][q]
                    port_type = EdgeType.PLAIN if rp == et else EdgeType.HADAMARD
                    ports[name][q] = (v, port_type)
        pending[q] = EdgeType.PLAIN
        frontier[q] = v

    def new(kind: VertexType, phase: int, i: int, label: str | None) -> int:
        v = d.add_vertex(kind, phase)
        for name in active(i):
            in_region[name].add(v)
        if label:
            d.add_label(v, label)
        return v

    def scale(e: int, i: int) -> None:
        d.scalar = d.scalar * ExactScalar.sqrt2_power(e)
        for name in active(i):
            region_sqrt2[name] += e
    for i, ins in enumerate(c.instructions + [None]):  # type: ignore[list-item]
        for name, (a, b) in c.regions.items():
            if b == i and name not in region_pending:
                region_pending[name] = dict(pending)
        if ins is None:
            break
        op, qs, lab = ins.op, ins.qubits, ins.label
        if op in _Z_PHASE:
            attach(qs[0], new(VertexType.Z, _Z_PHASE[op], i, lab), i)
        elif op == "X":
            attach(qs[0], new(VertexType.X, 4, i, lab), i)
        elif op == "H":
            q = qs[0]
            pending[q] = EdgeType.HADAMARD if pending[q] == EdgeType.PLAIN else EdgeType.PLAIN
        elif op in TWO_QUBIT:
            a_, b_ = qs
            u = new(VertexType.Z, 0, i, lab)
            v = new(VertexType.X if op == "CX" else VertexType.Z, 0, i, lab)
            attach(a_, u, i)
            attach(b_, v, i)
            d.add_edge(u, v, EdgeType.PLAIN if op == "CX" else EdgeType.HADAMARD)
            scale(1, i)
        elif op in INITS:
            v = new(VertexType.X if op == "INIT0" else VertexType.Z, 0, i, lab)
            frontier[qs[0]] = v
            pending[qs[0]] = EdgeType.PLAIN
            scale(-1, i)
        elif op in MEASURES:
            q = qs[0]
            v = new(VertexType.X if op == "MZPS" else VertexType.Z, 0, i, lab)
            attach(q, v, i)
            del frontier[q]
            scale(-1, i)
        else:  # pragma: no cover - validate() rejects unknown ops
            raise CircuitError(f"unknown instruction {op}")
    end = len(c.instructions)
    for q in range(n):
        if q in frontier:
            attach(q, d.add_output(), end)
    for name in c.regions:
        d.regions[name] = Region(
            vertices=frozenset(in_region[name]),
            ports=[ports[name][q] for q in sorted(ports[name])],
            outer_scalar=d.scalar * ExactScalar.sqrt2_power(-region_sqrt2[name]),
        )
    return d


def substitute_region(d: Diagram, name: str, replacement: Diagram) -> Diagram:
    """Swap the named region for a state diagram with one output per port."""
    reg = d.regions[name]
    if replacement.inputs or len(replacement.outputs) != len(reg.ports):
        raise ValueError(
            f"replacement has {len(replacement.outputs)} outputs, region {name} has {len(reg.ports)} ports"
        )
    r = d.copy()
    for v in sorted(reg.vertices):
        if v in r.ty:
            r.remove_vertex(v)
    r.regions = {k: v for k, v in r.regions.items() if k != name}
    r.scalar = reg.outer_scalar
    m = _embed(r, replacement)
    for (outside, et), o in zip(reg.ports, replacement.outputs):
        x, e = boundary_edge(r, m[o])
        r.remove_vertex(m[o])
        r.add_edge(x, outside, EdgeType.PLAIN if e == et else EdgeType.HADAMARD)
    return r


def sub_circuit(c: Circuit, start: int, stop: int) -> Circuit:
    """Instructions ``start:stop`` on the qubits they touch, renumbered in order."""
    body = c.instructions[start:stop]
    used = sorted({q for ins in body for q in ins.qubits})
    index = {q: i for i, q in enumerate(used)}
    out = Circuit(len(used))
    for ins in body:
        out.append(ins.op, *(index[q] for q in ins.qubits), label=ins.label)
    for name, (a, b) in c.regions.items():
        if start <= a and b <= stop:
            out.regions[name] = (a - start, b - start)
    return out


def load_builtin(name: str) -> Circuit:
    """Parse a committed circuit file such as ``msc_d3``."""
    from importlib import resources

    return parse_circuit(resources.files("zxcut.data").joinpath(f"{name}.zxcirc").read_text())


def _region_circuit(name: str, region: str) -> Circuit:
    c = load_builtin(name)
    return sub_circuit(c, *c.regions[region])


def build_injection_d3() -> Diagram:
    """Degenerate injection and first stabiliser round: 7 data legs, one T."""
    return circuit_to_diagram(_region_circuit("msc_d3", "d3.injection"))


def build_double_check_d3() -> Diagram:
    """The d=3 double check as a 7-in, 7-out map with 14 T gates."""
    return circuit_to_diagram(_region_circuit("msc_d3", "d3.check"))


def build_msc_d3() -> Diagram:
    return circuit_to_diagram(load_builtin("msc_d3"))


def build_msc_d5() -> Diagram:
    return circuit_to_diagram(load_builtin("msc_d5"))
