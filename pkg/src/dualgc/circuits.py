"""Boolean circuit intermediate representation.

A circuit is a flat list of AND/OR/XOR/NOT gates in topological order over
integer wire ids, plus an input map (per input group, the ordered wire ids it
feeds) and an output map (per output group, the ordered wire ids it reads).
Input groups correspond to data providers in the protocol and to operands in
gadget fragments. Multi-bit values are unsigned big-endian: index 0 of a bus
is the most significant bit.

Gates are stored as ``(kind, a, b, out)`` tuples with ``b == -1`` for NOT;
the flat-tuple form keeps million-gate circuits cheap to build and evaluate.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import InputShapeError

AND, OR, XOR, NOT = 0, 1, 2, 3
KIND_NAMES = ("AND", "OR", "XOR", "NOT")
KIND_BY_NAME = {name: kind for kind, name in enumerate(KIND_NAMES)}

Gate = tuple[int, int, int, int]


@dataclass
class Circuit:
    wire_count: int
    gates: list[Gate]
    input_map: tuple[tuple[int, ...], ...]
    output_map: tuple[tuple[int, ...], ...]
    _hash: bytes | None = field(default=None, repr=False, compare=False)

    @property
    def input_wires(self) -> list[int]:
        return [w for group in self.input_map for w in group]

    @property
    def output_wires(self) -> list[int]:
        return [w for group in self.output_map for w in group]

    def hash(self) -> bytes:
        """SHA-256 of the canonical netlist text; binds the full topology."""
        if self._hash is None:
            self._hash = hashlib.sha256(to_netlist(self).encode()).digest()
        return self._hash


def validate(circuit: Circuit) -> None:
    """Check single assignment, topological order, and map sanity."""
    n = circuit.wire_count
    defined = bytearray(n)
    seen_inputs = set()
    for group in circuit.input_map:
        for w in group:
            if not 0 <= w < n:
                raise ValueError(f"input wire {w} out of range")
            if w in seen_inputs:
                raise ValueError(f"input wire {w} appears twice in the input map")
            seen_inputs.add(w)
            defined[w] = 1
    for kind, a, b, out in circuit.gates:
        if kind not in (AND, OR, XOR, NOT):
            raise ValueError(f"unknown gate kind {kind}")
        operands = (a,) if kind == NOT else (a, b)
        for w in operands:
            if not 0 <= w < n or not defined[w]:
                raise ValueError(f"gate reads undefined wire {w}")
        if kind == NOT and b != -1:
            raise ValueError("NOT gate must carry b == -1")
        if not 0 <= out < n:
            raise ValueError(f"gate output wire {out} out of range")
        if defined[out]:
            raise ValueError(f"wire {out} assigned twice")
        defined[out] = 1
    for group in circuit.output_map:
        for w in group:
            if not 0 <= w < n or not defined[w]:
                raise ValueError(f"output map reads undefined wire {w}")


def eval_plain(circuit: Circuit, inputs) -> list[list[int]]:
    """Evaluate on plaintext bits; one bit list per input group, big-endian."""
    if len(inputs) != len(circuit.input_map):
        raise InputShapeError(
            f"expected {len(circuit.input_map)} input groups, got {len(inputs)}")
    values = bytearray(circuit.wire_count)
    for group, bits in zip(circuit.input_map, inputs):
        if len(bits) != len(group):
            raise InputShapeError(
                f"input group expects {len(group)} bits, got {len(bits)}")
        for w, bit in zip(group, bits):
            if bit not in (0, 1):
                raise InputShapeError(f"input bit must be 0 or 1, got {bit!r}")
            values[w] = bit
    for kind, a, b, out in circuit.gates:
        if kind == AND:
            values[out] = values[a] & values[b]
        elif kind == XOR:
            values[out] = values[a] ^ values[b]
        elif kind == OR:
            values[out] = values[a] | values[b]
        else:
            values[out] = values[a] ^ 1
    return [[values[w] for w in group] for group in circuit.output_map]


def to_netlist(circuit: Circuit) -> str:
    """Line-oriented text: header, input/output maps, one gate per line."""
    lines = [
        f"circuit {circuit.wire_count} {len(circuit.gates)} "
        f"{len(circuit.input_map)} {len(circuit.output_map)}"
    ]
    for i, group in enumerate(circuit.input_map):
        lines.append("input " + " ".join([str(i)] + [str(w) for w in group]))
    for i, group in enumerate(circuit.output_map):
        lines.append("output " + " ".join([str(i)] + [str(w) for w in group]))
    for kind, a, b, out in circuit.gates:
        if kind == NOT:
            lines.append(f"NOT {a} {out}")
        else:
            lines.append(f"{KIND_NAMES[kind]} {a} {b} {out}")
    return "\n".join(lines) + "\n"


def from_netlist(text: str) -> Circuit:
    """Parse the netlist format emitted by :func:`to_netlist`; validates."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("circuit "):
        raise ValueError("netlist must start with a 'circuit' header line")
    header = lines[0].split()
    wire_count, gate_count, n_in, n_out = (int(x) for x in header[1:5])
    input_map: list[tuple[int, ...]] = [()] * n_in
    output_map: list[tuple[int, ...]] = [()] * n_out
    gates: list[Gate] = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "input":
            input_map[int(parts[1])] = tuple(int(w) for w in parts[2:])
        elif parts[0] == "output":
            output_map[int(parts[1])] = tuple(int(w) for w in parts[2:])
        elif parts[0] == "NOT":
            gates.append((NOT, int(parts[1]), -1, int(parts[2])))
        elif parts[0] in KIND_BY_NAME:
            gates.append((KIND_BY_NAME[parts[0]], int(parts[1]), int(parts[2]),
                          int(parts[3])))
        else:
            raise ValueError(f"unknown netlist line: {ln!r}")
    if len(gates) != gate_count:
        raise ValueError("gate count in header does not match body")
    circuit = Circuit(wire_count, gates, tuple(input_map), tuple(output_map))
    validate(circuit)
    return circuit


def int_to_bits(value: int, width: int) -> list[int]:
    """Unsigned big-endian bit list; value must fit in ``width`` bits."""
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out
