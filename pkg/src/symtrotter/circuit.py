"""Gate-list circuit IR with statevector and density-matrix executors.

Ordering convention, used everywhere in the package: site ``i`` of the chain
(1-indexed) is qubit ``i - 1``, and a basis label such as ``"011"`` lists
qubit 0 first.  Qubit 0 is the most significant bit of the state index, so
``"011"`` is index 3.  Labels in the opposite (bit-major) order are converted
with :func:`flip_label`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

ROTATIONS = frozenset({"RX", "RY", "RZ"})
ONE_QUBIT = frozenset({"RX", "RY", "RZ", "X", "Y", "Z", "H"})
TWO_QUBIT = frozenset({"CNOT", "SWAP"})
KINDS = ONE_QUBIT | TWO_QUBIT | {"BARRIER"}

MAX_UNITARY_WIDTH = 8

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


class CircuitError(ValueError):
    pass


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[complex(c, -s), 0], [0, complex(c, s)]], dtype=complex)
    raise CircuitError(f"{kind} is not a rotation")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind} acts on repeated qubits {self.qubits}")
        if self.kind in ONE_QUBIT and len(self.qubits) != 1:
            raise CircuitError(f"{self.kind} takes one qubit")
        if self.kind in TWO_QUBIT and len(self.qubits) != 2:
            raise CircuitError(f"{self.kind} takes two qubits")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")

    @property
    def matrix(self) -> np.ndarray:
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.angle)
        return _FIXED[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def __str__(self) -> str:
        args = [str(q) for q in self.qubits]
        if self.angle is not None:
            args.append(repr(self.angle))
        return f"{self.kind} {','.join(args)}".rstrip()


def rx(q, angle):
    return Gate("RX", (q,), angle)


def ry(q, angle):
    return Gate("RY", (q,), angle)


def rz(q, angle):
    return Gate("RZ", (q,), angle)


def x(q):
    return Gate("X", (q,))


def h(q):
    return Gate("H", (q,))


def cnot(control, target):
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)
    # exp(i * global_phase) multiplies the gate product
    global_phase: float = 0.0

    def __post_init__(self):
        if self.width < 1:
            raise CircuitError("circuit width must be positive")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise CircuitError(f"not a Gate: {g!r}")
            for q in g.qubits:
                if not 0 <= q < self.width:
                    raise CircuitError(f"{g} addresses qubit {q} outside width {self.width}")
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise CircuitError(f"width mismatch: {self.width} vs {other.width}")
        meta = {**self.metadata, **other.metadata}
        return Circuit(self.width, self.gates + other.gates, meta, self.global_phase + other.global_phase)

    def with_gates(self, gates: Iterable[Gate], global_phase: float | None = None) -> "Circuit":
        phase = self.global_phase if global_phase is None else global_phase
        return replace(self, gates=tuple(gates), global_phase=phase)

    def inverse(self) -> "Circuit":
        return self.with_gates((g.inverse() for g in reversed(self.gates)), -self.global_phase)

    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "CNOT")

    def gate_count(self, include_barriers: bool = False) -> int:
        return sum(1 for g in self.gates if include_barriers or g.kind != "BARRIER")

    def depth(self) -> int:
        level = [0] * self.width
        for g in self.gates:
            if g.kind == "BARRIER":
                continue
            d = 1 + max(level[q] for q in g.qubits)
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def to_text(self) -> str:
        lines = [f"# width={self.width}"]
        if self.global_phase:
            lines.append(f"# global_phase={self.global_phase!r}")
        lines.extend(str(g) for g in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, width: int | None = None) -> "Circuit":
        gates = []
        declared = None
        phase = 0.0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("width="):
                    declared = int(body.split("=", 1)[1])
                elif body.startswith("global_phase="):
                    phase = float(body.split("=", 1)[1])
                continue
            if not line:
                continue
            parts = line.split(None, 1)
            kind = parts[0].upper()
            args = [a.strip() for a in parts[1].split(",")] if len(parts) > 1 else []
            try:
                if kind == "BARRIER":
                    gates.append(Gate(kind, tuple(int(a) for a in args)))
                    continue
                arity = 1 if kind in ONE_QUBIT else 2
                if kind not in KINDS:
                    raise CircuitError(f"unknown gate kind {kind!r}")
                expected = arity + (1 if kind in ROTATIONS else 0)
                if len(args) != expected:
                    raise CircuitError(f"{kind} expects {expected} arguments, got {len(args)}")
                qubits = tuple(int(a) for a in args[:arity])
                angle = float(args[arity]) if kind in ROTATIONS else None
                gates.append(Gate(kind, qubits, angle))
            except (CircuitError, ValueError) as exc:
                raise CircuitError(f"line {lineno}: {exc}") from exc
        if width is None:
            width = declared
        if width is None:
            width = 1 + max((q for g in gates for q in g.qubits), default=0)
        if gates and any(g.kind == "BARRIER" and not g.qubits for g in gates):
            gates = [Gate("BARRIER", tuple(range(width))) if g.kind == "BARRIER" and not g.qubits else g for g in gates]
        return cls(width, tuple(gates), global_phase=phase)


def flip_label(label: str) -> str:
    """Convert between site-major and bit-major basis labels."""
    return label[::-1]


def basis_index(label: str) -> int:
    if not label or any(c not in "01" for c in label):
        raise CircuitError(f"bad basis label {label!r}")
    return int(label, 2)


def basis_label(index: int, width: int) -> str:
    return format(index, f"0{width}b")


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(len(a)))) if len(a) else -1
        if n < 1 or 2 ** n != len(a):
            raise CircuitError("amplitude vector length must be a power of two")
        norm = np.linalg.norm(a)
        if abs(norm - 1) > 1e-10:
            raise CircuitError(f"state is not normalized (norm {norm:.12f})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def width(self) -> int:
        return int(round(math.log2(len(self.amplitudes))))

    @classmethod
    def from_label(cls, label: str) -> "StateVector":
        a = np.zeros(2 ** len(label), dtype=complex)
        a[basis_index(label)] = 1
        return cls(a)

    @classmethod
    def superposition(cls, labels: Sequence[str]) -> "StateVector":
        """Equal-weight superposition of computational basis states."""
        a = np.zeros(2 ** len(labels[0]), dtype=complex)
        for lab in labels:
            a[basis_index(lab)] += 1
        return cls(a / np.linalg.norm(a))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = m.shape[0]
        if m.ndim != 2 or m.shape[1] != dim or dim < 2 or dim & (dim - 1):
            raise CircuitError("density matrix must be square with power-of-two dimension")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise CircuitError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > 1e-10:
            raise CircuitError(f"density matrix trace {np.trace(m).real:.12f} != 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def width(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    @classmethod
    def from_statevector(cls, psi: StateVector) -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))

    @classmethod
    def maximally_mixed(cls, width: int) -> "DensityMatrix":
        d = 2 ** width
        return cls(np.eye(d, dtype=complex) / d)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.matrix)), 0.0, None)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def is_physical(self, tol: float = 1e-9) -> bool:
        return self.min_eigenvalue() >= -tol


def _apply_gate(vec: np.ndarray, gate: Gate, offset: int, m: int, conj: bool = False) -> np.ndarray:
    if gate.kind == "BARRIER":
        return vec
    u = gate.matrix.conj() if conj else gate.matrix
    if len(gate.qubits) == 1:
        return kernels.apply_1q(vec, u, gate.qubits[0] + offset, m)
    q0, q1 = gate.qubits
    return kernels.apply_2q(vec, u, q0 + offset, q1 + offset, m)


def apply(circuit: Circuit, state: StateVector) -> StateVector:
    if state.width != circuit.width:
        raise CircuitError(f"state width {state.width} != circuit width {circuit.width}")
    n = circuit.width
    vec = np.array(state.amplitudes)
    for g in circuit.gates:
        vec = _apply_gate(vec, g, 0, n)
    if circuit.global_phase:
        vec = vec * np.exp(1j * circuit.global_phase)
    vec /= np.linalg.norm(vec)
    return StateVector(vec)


def unitary_of(circuit: Circuit) -> np.ndarray:
    n = circuit.width
    if n > MAX_UNITARY_WIDTH:
        raise CircuitError(f"unitary_of supports width <= {MAX_UNITARY_WIDTH}")
    dim = 2 ** n
    # the identity as a vector on 2n qubits; gates act on the row qubits
    vec = np.eye(dim, dtype=complex).reshape(-1)
    for g in circuit.gates:
        vec = _apply_gate(vec, g, 0, 2 * n)
    u = vec.reshape(dim, dim)
    if circuit.global_phase:
        u = u * np.exp(1j * circuit.global_phase)
    return u


def evolve_density(circuit: Circuit, rho: DensityMatrix, noise=None) -> DensityMatrix:
    """Evolve ``rho`` through ``circuit``, depolarizing after every gate per ``noise``."""
    from .noise import NoiseModel

    if noise is None:
        noise = NoiseModel.null()
    elif not isinstance(noise, NoiseModel):
        raise CircuitError(f"noise must be a NoiseModel, got {type(noise).__name__}")
    n = circuit.width
    if rho.width != n:
        raise CircuitError(f"density width {rho.width} != circuit width {n}")
    vec = np.array(rho.matrix).reshape(-1)
    for g in circuit.gates:
        if g.kind == "BARRIER":
            continue
        vec = _apply_gate(vec, g, 0, 2 * n)
        vec = _apply_gate(vec, g, n, 2 * n, conj=True)
        p = noise.rate_for(g)
        if p > 0:
            vec = kernels.depolarize(vec, n, g.qubits, p)
    m = vec.reshape(2 ** n, 2 ** n)
    m = (m + m.conj().T) / 2
    m /= np.trace(m).real
    return DensityMatrix(m)


def push_through_readout(probs: np.ndarray, confusions: Sequence[np.ndarray]) -> np.ndarray:
    """Apply per-qubit column-stochastic confusion matrices to a distribution."""
    n = len(confusions)
    t = np.asarray(probs, dtype=float).reshape((2,) * n)
    for q, a in enumerate(confusions):
        t = np.moveaxis(np.tensordot(np.asarray(a, dtype=float), t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def make_rng(seed) -> np.random.Generator:
    """PCG64 stream for an integer seed (or pass a Generator through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_counts(state, shots: int, readout=None, seed=0) -> dict[str, int]:
    """Draw ``shots`` measurement outcomes; keys are site-major labels, sorted."""
    return sample_distribution(state.probabilities(), shots, readout, seed)


def sample_distribution(probs, shots: int, readout=None, seed=0) -> dict[str, int]:
    """Sample a Born distribution, pushing it through the readout confusion first."""
    if shots < 1:
        raise CircuitError("shots must be >= 1")
    probs = np.asarray(probs, dtype=float)
    n = int(round(math.log2(len(probs))))
    if readout is not None:
        confusions = readout.readout_for(n) if hasattr(readout, "readout_for") else list(readout)
        if confusions:
            probs = push_through_readout(probs, confusions)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    counts = make_rng(seed).multinomial(shots, probs)
    return {basis_label(i, n): int(c) for i, c in enumerate(counts) if c}


def counts_to_probabilities(counts: Mapping[str, int], width: int) -> np.ndarray:
    p = np.zeros(2 ** width)
    for lab, c in counts.items():
        p[basis_index(lab)] += c
    return p / p.sum()
