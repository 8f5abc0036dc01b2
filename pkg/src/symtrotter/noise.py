"""Gate depolarizing + readout confusion noise, and CNOT Pauli twirling."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import Circuit, DensityMatrix, Gate
from . import kernels
from .numerics import PAULI, kron

# Artifact defaults; not calibration data from any device.
DEFAULT_P1 = 0.001
DEFAULT_P2 = 0.01
DEFAULT_P1_GIVEN_0 = 0.02
DEFAULT_P0_GIVEN_1 = 0.04
DEFAULT_TWIRLS = 16


class NoiseModelError(ValueError):
    pass


def confusion_matrix(p1_given_0: float, p0_given_1: float) -> np.ndarray:
    """Column-stochastic 2x2 matrix; column j is the outcome distribution for true bit j."""
    return np.array([[1 - p1_given_0, p0_given_1], [p1_given_0, 1 - p0_given_1]], dtype=float)


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    # one matrix shared by all qubits, or one per qubit
    readout: tuple = field(default=())

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise NoiseModelError(f"{name} must be a probability in [0, 1], got {v!r}")
        mats = []
        for a in self.readout:
            a = np.asarray(a, dtype=float)
            if a.shape != (2, 2):
                raise NoiseModelError(f"readout confusion must be 2x2, got shape {a.shape}")
            if np.any(a < 0) or np.max(np.abs(a.sum(axis=0) - 1)) > 1e-12:
                raise NoiseModelError("readout confusion columns must be probability vectors")
            a.setflags(write=False)
            mats.append(a)
        object.__setattr__(self, "readout", tuple(mats))

    @classmethod
    def null(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def default(cls) -> "NoiseModel":
        return cls(DEFAULT_P1, DEFAULT_P2, (confusion_matrix(DEFAULT_P1_GIVEN_0, DEFAULT_P0_GIVEN_1),))

    @property
    def is_null(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and not self.readout

    def without_readout(self) -> "NoiseModel":
        return NoiseModel(self.p1, self.p2, ())

    def rate_for(self, gate: Gate) -> float:
        if gate.kind == "BARRIER":
            return 0.0
        return self.p1 if len(gate.qubits) == 1 else self.p2

    def readout_for(self, n: int) -> list[np.ndarray]:
        if not self.readout:
            return []
        if len(self.readout) == 1:
            return [self.readout[0]] * n
        if len(self.readout) != n:
            raise NoiseModelError(f"noise model has {len(self.readout)} readout matrices for {n} qubits")
        return list(self.readout)

    def assignment_matrix(self, n: int) -> np.ndarray:
        """Full 2^n assignment matrix (Kronecker product, qubit 0 leftmost)."""
        out = np.eye(1)
        for a in self.readout_for(n) or [np.eye(2)] * n:
            out = np.kron(out, a)
        return out

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "readout": [a.tolist() for a in self.readout]}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        unknown = set(d) - {"p1", "p2", "readout"}
        if unknown:
            raise NoiseModelError(f"unknown noise keys: {sorted(unknown)}")
        readout = d.get("readout", [])
        if readout and np.asarray(readout).ndim == 2:
            readout = [readout]
        return cls(float(d.get("p1", 0.0)), float(d.get("p2", 0.0)), tuple(readout))

    @classmethod
    def from_file(cls, path) -> "NoiseModel":
        path = Path(path)
        text = path.read_text()
        if path.suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
        if not isinstance(data, dict):
            raise NoiseModelError(f"{path}: expected a key-value document")
        return cls.from_dict(data)


def depolarize(rho: DensityMatrix, qubits: Sequence[int], p: float) -> DensityMatrix:
    if not 0.0 <= p <= 1.0:
        raise NoiseModelError(f"depolarizing probability must be in [0, 1], got {p}")
    n = rho.width
    vec = kernels.depolarize(np.array(rho.matrix).reshape(-1), n, tuple(qubits), p)
    return DensityMatrix(vec.reshape(2 ** n, 2 ** n))


_LETTERS = "IXYZ"


def _conjugation_table() -> dict[tuple[str, str], tuple[str, str, int]]:
    cx = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    table = {}
    for a in _LETTERS:
        for b in _LETTERS:
            m = cx @ kron(PAULI[a], PAULI[b]) @ cx
            for c in _LETTERS:
                for d in _LETTERS:
                    ov = np.trace(kron(PAULI[c], PAULI[d]).conj().T @ m) / 4
                    if abs(abs(ov) - 1) < 1e-12:
                        table[(a, b)] = (c, d, int(round(ov.real)))
    return table


# (pre_control, pre_target) -> (post_control, post_target, sign) with
# CNOT (a⊗b) CNOT = sign * (c⊗d)
CNOT_TWIRL_TABLE = _conjugation_table()


@dataclass(frozen=True)
class TwirledEnsemble:
    circuits: tuple[Circuit, ...]
    seed: int
    twirls: int


def _twirl_once(c: Circuit, rng: np.random.Generator) -> Circuit:
    gates = []
    phase = c.global_phase
    for g in c.gates:
        if g.kind != "CNOT":
            gates.append(g)
            continue
        ctl, tgt = g.qubits
        k = int(rng.integers(16))
        a, b = _LETTERS[k // 4], _LETTERS[k % 4]
        pc, pt, sign = CNOT_TWIRL_TABLE[(a, b)]
        gates.extend(Gate(p, (q,)) for p, q in ((a, ctl), (b, tgt)) if p != "I")
        gates.append(g)
        gates.extend(Gate(p, (q,)) for p, q in ((pc, ctl), (pt, tgt)) if p != "I")
        if sign < 0:
            phase += math.pi
    return c.with_gates(gates, phase)


def twirl(c: Circuit, twirls: int = DEFAULT_TWIRLS, seed: int = 0) -> TwirledEnsemble:
    if twirls < 1:
        raise ValueError("twirls must be >= 1")
    streams = np.random.SeedSequence(seed).spawn(twirls)
    members = tuple(_twirl_once(c, np.random.Generator(np.random.PCG64(s))) for s in streams)
    return TwirledEnsemble(members, seed, twirls)
