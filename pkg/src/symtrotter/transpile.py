"""Peephole optimizer: rotation fusion, commute-aware CNOT cancellation,
two-qubit block consolidation and single-qubit resynthesis, iterated to a
fixpoint.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import ROTATIONS, Circuit, Gate
from .synthesis import ANGLE_TOL, euler_gates, interaction_cnot_count, synthesize_2q, wrap_angle

DEFAULT_MAX_ROUNDS = 8
_TWO_PI = 2 * math.pi

# single-qubit kinds that slide through a CNOT on the named line
_PASSES_CONTROL = frozenset({"RZ", "Z"})
_PASSES_TARGET = frozenset({"RX", "X"})


@dataclass
class PassReport:
    input_cnots: int
    output_cnots: int
    input_depth: int
    output_depth: int
    passes_applied: list[str] = field(default_factory=list)
    rounds: int = 0
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _wire_runs(gates):
    """Yield, per wire, lists of gate indices of consecutive single-qubit gates."""
    runs: dict[int, list[int]] = {}
    out = []
    for i, g in enumerate(gates):
        if g.kind == "BARRIER" or len(g.qubits) > 1:
            for q in g.qubits:
                if runs.get(q):
                    out.append(runs.pop(q))
            continue
        runs.setdefault(g.qubits[0], []).append(i)
    out.extend(r for r in runs.values() if r)
    return out


def fuse_rotations(c: Circuit) -> Circuit:
    """Merge neighbouring same-axis rotations on a wire and drop trivial ones."""
    gates = list(c.gates)
    phase = c.global_phase
    keep = [True] * len(gates)
    for run in _wire_runs(gates):
        acc = None  # index of the rotation collecting the current streak
        for i in run:
            g = gates[i]
            if acc is not None and g.kind == gates[acc].kind:
                gates[acc] = Gate(g.kind, g.qubits, gates[acc].angle + g.angle)
                keep[i] = False
                continue
            acc = i if g.kind in ROTATIONS else None
        for i in run:
            g = gates[i]
            if not keep[i] or g.kind not in ROTATIONS:
                continue
            t = wrap_angle(g.angle)
            if abs(t) < ANGLE_TOL:
                keep[i] = False
            elif abs(abs(t) - _TWO_PI) < ANGLE_TOL:
                # R(2pi) = -I
                keep[i] = False
                phase += math.pi
            elif t != g.angle:
                gates[i] = Gate(g.kind, g.qubits, t)
    return c.with_gates([g for g, k in zip(gates, keep) if k], phase)


def _slides_through(g: Gate, ctl: int, tgt: int) -> bool:
    if g.kind == "BARRIER":
        return not ({ctl, tgt} & set(g.qubits))
    if ctl not in g.qubits and tgt not in g.qubits:
        return True
    if len(g.qubits) != 1:
        return False
    if g.qubits[0] == ctl:
        return g.kind in _PASSES_CONTROL
    return g.kind in _PASSES_TARGET


def cancel_cnots(c: Circuit) -> Circuit:
    """Remove CNOT pairs with the same orientation that meet after commuting
    Z-type gates along the control and X-type gates along the target."""
    out: list[Gate | None] = []
    for g in c.gates:
        if g.kind == "CNOT":
            ctl, tgt = g.qubits
            for j in range(len(out) - 1, -1, -1):
                prev = out[j]
                if prev is None:
                    continue
                if prev.kind == "CNOT" and prev.qubits == g.qubits:
                    out[j] = None
                    break
                if not _slides_through(prev, ctl, tgt):
                    out.append(g)
                    break
            else:
                out.append(g)
            continue
        out.append(g)
    return c.with_gates([g for g in out if g is not None])


def _block_unitary(gates, q0: int, q1: int) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for g in gates:
        m = g.matrix
        if len(g.qubits) == 1:
            m = np.kron(m, np.eye(2)) if g.qubits[0] == q0 else np.kron(np.eye(2), m)
        elif g.qubits != (q0, q1):
            # reversed orientation: conjugate by SWAP
            m = m.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        u = m @ u
    return u


def consolidate_2q(c: Circuit) -> Circuit:
    """Collapse maximal two-qubit blocks whose KAK form needs fewer CNOTs."""
    items: list[list] = []  # each item: [pair or None, gates]
    open_block: dict[int, int] = {}
    for g in c.gates:
        if g.kind == "BARRIER" or len(g.qubits) > 2:
            for q in g.qubits:
                open_block.pop(q, None)
            items.append([None, [g]])
            continue
        if len(g.qubits) == 1:
            q = g.qubits[0]
            if q in open_block:
                items[open_block[q]][1].append(g)
            else:
                items.append([None, [g]])
            continue
        a, b = g.qubits
        ia, ib = open_block.get(a), open_block.get(b)
        if ia is not None and ia == ib:
            items[ia][1].append(g)
            continue
        for q in (a, b):
            idx = open_block.get(q)
            if idx is not None:
                for r in items[idx][0]:
                    open_block.pop(r, None)
        items.append([(a, b), [g]])
        open_block[a] = open_block[b] = len(items) - 1
    gates: list[Gate] = []
    phase = c.global_phase
    for pair, block in items:
        if pair is None:
            gates.extend(block)
            continue
        cx = sum(1 for g in block if g.kind == "CNOT") + 3 * sum(1 for g in block if g.kind == "SWAP")
        u = _block_unitary(block, *pair)
        if interaction_cnot_count(u) < cx:
            new, ph = synthesize_2q(u, *pair)
            gates.extend(new)
            phase += ph
        else:
            gates.extend(block)
    return c.with_gates(gates, phase)


def _canonical_run(gs) -> bool:
    kinds = [g.kind for g in gs]
    if len(kinds) > 3 or set(kinds) - {"RZ", "RX"}:
        return False
    if any(a == b for a, b in zip(kinds, kinds[1:])):
        return False
    return len(kinds) < 3 or kinds == ["RZ", "RX", "RZ"]


def resynthesize_1q(c: Circuit) -> Circuit:
    """Replace non-canonical single-qubit runs by at most three ZXZ rotations."""
    gates: list[Gate | list[Gate] | None] = list(c.gates)
    phase = c.global_phase
    for run in _wire_runs(c.gates):
        gs = [c.gates[i] for i in run]
        if _canonical_run(gs):
            continue
        u = np.eye(2, dtype=complex)
        for g in gs:
            u = g.matrix @ u
        new, ph = euler_gates(u, gs[0].qubits[0])
        phase += ph
        gates[run[0]] = new
        for i in run[1:]:
            gates[i] = None
    flat: list[Gate] = []
    for g in gates:
        if g is None:
            continue
        if isinstance(g, list):
            flat.extend(g)
        else:
            flat.append(g)
    return c.with_gates(flat, phase)


PASSES = (
    ("fuse_rotations", fuse_rotations),
    ("cancel_cnots", cancel_cnots),
    ("consolidate_2q", consolidate_2q),
    ("resynthesize_1q", resynthesize_1q),
)


def optimize(c: Circuit, max_rounds: int = DEFAULT_MAX_ROUNDS) -> tuple[Circuit, PassReport]:
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    report = PassReport(c.cnot_count(), c.cnot_count(), c.depth(), c.depth(), converged=False)
    cur = c
    for rnd in range(1, max_rounds + 1):
        changed = False
        for name, fn in PASSES:
            nxt = fn(cur)
            if nxt.gates != cur.gates:
                report.passes_applied.append(name)
                changed = True
            cur = nxt
        report.rounds = rnd
        if not changed:
            report.converged = True
            break
    report.output_cnots = cur.cnot_count()
    report.output_depth = cur.depth()
    return cur, report
