"""Time-evolution circuit builders.

Four strategies are offered for the three-site chain:

``naive``
    pairwise Heisenberg exponentials on (0,1) then (1,2), repeated.
``general``
    encode with the parity-folding permutation, run the two-qubit effective
    Trotter unit on qubits 0 and 1, decode.  Works for any input state.
``shallow_specific``
    the encoder is replaced by X relabeling of a known basis input, the
    decoder only handles the even-parity subspace (two CNOTs).
``shallow_shallow``
    X relabeling on both ends; exact only when the total time is a multiple
    of pi, where every state returns to itself up to phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .circuit import Circuit, Gate, cnot, h, rx, rz, unitary_of, x
from .model import build_encoder_3, partial_transform, triple_sites
from .numerics import PAULI, expm_hermitian, kron
from .synthesis import canonical_gates

STRATEGIES = ("naive", "general", "shallow_specific", "shallow_shallow")
PERIOD_TOL = 1e-9
DEFAULT_INITIAL = "011"

_HEIS_PAIR = sum(kron(PAULI[p], PAULI[p]) for p in "XYZ")


class PlanError(ValueError):
    pass


def is_period_multiple(t: float, tol: float = PERIOD_TOL) -> bool:
    k = round(t / math.pi)
    return abs(t - k * math.pi) < tol


@dataclass(frozen=True)
class TrotterPlan:
    steps: int
    total_time: float
    strategy: str = "general"
    width: int = 3
    # basis label the circuit will act on; only the shallow strategies need it
    initial_state: str | None = DEFAULT_INITIAL

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise PlanError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if not isinstance(self.steps, int) or self.steps < 1:
            raise PlanError(f"steps must be a positive integer, got {self.steps!r}")
        if not math.isfinite(self.total_time):
            raise PlanError("total_time must be finite")
        if self.width != 3:
            raise PlanError("only the three-site chain is supported by the strategy builders")
        if self.strategy == "shallow_shallow" and not is_period_multiple(self.total_time):
            raise PlanError(f"shallow_shallow needs a total time in pi*Z, got {self.total_time!r}")
        if self.strategy.startswith("shallow"):
            _require_basis_label(self.initial_state, self.strategy)

    @property
    def dt(self) -> float:
        return self.total_time / self.steps


def _require_basis_label(label, strategy: str) -> str:
    if not isinstance(label, str) or len(label) != 3 or set(label) - set("01"):
        raise PlanError(f"{strategy} needs a computational-basis input such as '011', got {label!r}")
    if strategy == "shallow_specific" and label.count("1") % 2:
        raise PlanError(f"shallow_specific decodes the even-parity subspace only; {label!r} has odd parity")
    return label


# --- building blocks -------------------------------------------------------

def heisenberg_pair(q0: int, q1: int, dt: float, width: int) -> Circuit:
    """``exp(-i dt (XX + YY + ZZ))`` on ``(q0, q1)`` with its exact global phase."""
    gates = canonical_gates(-dt, -dt, -dt, 0, 1)
    got = unitary_of(Circuit(2, gates))
    want = expm_hermitian(_HEIS_PAIR, -1j * dt)
    phase = float(np.angle(np.vdot(got, want)))
    remap = {0: q0, 1: q1}
    return Circuit(width, [Gate(g.kind, tuple(remap[q] for q in g.qubits), g.angle) for g in gates],
                   global_phase=phase)


def naive_step(dt: float, n_sites: int = 3, pairs: Iterable[tuple[int, int]] | None = None) -> Circuit:
    if n_sites < 2:
        raise PlanError("a chain needs at least two sites")
    if pairs is None:
        pairs = [(i, i + 1) for i in range(n_sites - 1)]
    out = Circuit(n_sites)
    for a, b in pairs:
        out = out + heisenberg_pair(a, b, dt, n_sites)
    return out


def second_block(theta: float, q0: int = 0, q1: int = 1, width: int = 2) -> Circuit:
    """``exp(i theta (X Z + Z X))`` with both CNOTs on ``(q0, q1)``."""
    # H on q0 maps XZ + ZX to ZZ + XX; CNOT conjugation sends those to I Z and X I
    gates = [h(q0), cnot(q0, q1), rx(q0, -2 * theta), rz(q1, -2 * theta), cnot(q0, q1), h(q0)]
    return Circuit(width, gates)


def trotter_unit(theta: float, q0: int = 0, q1: int = 1, width: int = 2) -> Circuit:
    """One first-order step of the two-site effective Hamiltonian.

    Matrix: ``exp(-i th (X1 + Z2)) exp(i th (X1 Z2 + X2 Z1)) exp(-i th (X2 + Z1))``.
    """
    first = [rz(q0, 2 * theta), rx(q1, 2 * theta)]
    last = [rx(q0, 2 * theta), rz(q1, 2 * theta)]
    return Circuit(width, first + list(second_block(theta, q0, q1, width).gates) + last)


def encoder_3() -> Circuit:
    """Gate realization of the three-site encoding permutation."""
    return Circuit(3, [cnot(0, 2), cnot(1, 2), cnot(0, 1), cnot(2, 0)], {"role": "encode"})


def decoder_3() -> Circuit:
    return Circuit(3, encoder_3().inverse().gates, {"role": "decode"})


def specific_decoder() -> Circuit:
    """Decoder valid on the even subspace, where the parity qubit reads 0."""
    return Circuit(3, [cnot(1, 2), cnot(0, 1)], {"role": "decode"})


def encoded_label(label: str) -> str:
    enc = build_encoder_3()
    idx = int(label, 2)
    out = int(np.argmax(np.abs(enc.matrix[:, idx])))
    return format(out, "03b")


def relabel(src: str, dst: str) -> Circuit:
    return Circuit(3, [x(q) for q, (a, b) in enumerate(zip(src, dst)) if a != b])


def trotter_body(plan: TrotterPlan) -> Circuit:
    unit = trotter_unit(plan.dt, 0, 1, plan.width)
    return Circuit(plan.width, unit.gates * plan.steps)


def build_evolution(plan: TrotterPlan) -> Circuit:
    meta = {"strategy": plan.strategy, "steps": plan.steps, "total_time": plan.total_time}
    if plan.strategy == "naive":
        step = naive_step(plan.dt, plan.width)
        return Circuit(plan.width, step.gates * plan.steps, meta, step.global_phase * plan.steps)
    body = trotter_body(plan)
    if plan.strategy == "general":
        c = encoder_3() + body + decoder_3()
    else:
        label = plan.initial_state
        enc = encoded_label(label)
        pre = relabel(label, enc)
        if plan.strategy == "shallow_specific":
            c = pre + body + specific_decoder()
        else:
            c = pre + body + pre.inverse()
    return Circuit(plan.width, c.gates, meta, c.global_phase)


# --- larger chains: mixed-frame steps --------------------------------------

def block_encoder_gates(m: int) -> list[Gate]:
    a, b, c = triple_sites(m)
    return [cnot(a, b), cnot(c, b), cnot(b, a), cnot(b, c)]


def flexible_axis_step(n_sites: int, x_set: Iterable[int], dt: float, reverse: bool = False) -> Circuit:
    """One first-order step in the mixed frame picked by ``x_set``.

    Blocks listed in ``x_set`` keep their raw pair exponentials; the others run
    as encode, effective Trotter unit on the outer sites, decode.  ``reverse``
    flips the block order so consecutive steps can meet at a shared border.
    """
    if n_sites != 5:
        raise PlanError("flexible-axis steps are implemented for five sites")
    pt = partial_transform(n_sites, x_set)
    k = (n_sites - 1) // 2
    blocks = list(range(1, k + 1))
    if reverse:
        blocks.reverse()
    out = Circuit(n_sites)
    for m in blocks:
        a, b, c = triple_sites(m)
        if m in pt.raw_blocks:
            pairs = [(a, b), (b, c)]
            if reverse:
                pairs.reverse()
            for p, q in pairs:
                out = out + heisenberg_pair(p, q, dt, n_sites)
        else:
            enc = block_encoder_gates(m)
            dec = list(reversed(enc))
            unit = trotter_unit(dt, a, c, n_sites)
            out = out + Circuit(n_sites, enc + list(unit.gates) + dec)
    return Circuit(n_sites, out.gates, {"x_set": sorted(pt.raw_blocks), "dt": dt}, out.global_phase)


__all__ = [
    "STRATEGIES",
    "PlanError",
    "TrotterPlan",
    "build_evolution",
    "decoder_3",
    "encoded_label",
    "encoder_3",
    "flexible_axis_step",
    "heisenberg_pair",
    "is_period_multiple",
    "naive_step",
    "relabel",
    "second_block",
    "specific_decoder",
    "trotter_body",
    "trotter_unit",
]
