"""Readout-error mitigation by assignment-matrix inversion, and zero-noise
extrapolation by unitary folding with a linear fit."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, DensityMatrix, basis_label, counts_to_probabilities, evolve_density, sample_counts, x
from .noise import NoiseModel

# above this the linear solve is treated as singular
MAX_CONDITION = 1e12
DEFAULT_SCALES = (1.0, 2.0, 3.0)

Sampler = Callable[[Circuit, int, int], dict]


class MitigationError(ValueError):
    pass


@dataclass(frozen=True)
class AssignmentMatrix:
    matrix: np.ndarray
    shots_per_state: int = 0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        dim = m.shape[0]
        if m.ndim != 2 or m.shape[1] != dim or dim & (dim - 1):
            raise MitigationError("assignment matrix must be square with power-of-two size")
        if np.any(m < 0):
            raise MitigationError("assignment matrix has negative entries")
        tol = 1.0 / self.shots_per_state if self.shots_per_state else 1e-12
        if np.max(np.abs(m.sum(axis=0) - 1)) > max(tol, 1e-12):
            raise MitigationError("assignment matrix columns must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def width(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def to_csv(self) -> str:
        labels = [basis_label(i, self.width) for i in range(self.matrix.shape[0])]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measured\\prepared"] + labels)
        for lab, row in zip(labels, self.matrix):
            w.writerow([lab] + [repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, shots_per_state: int = 0) -> "AssignmentMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        body = [[float(v) for v in r[1:]] for r in rows[1:] if r]
        return cls(np.array(body), shots_per_state)


def _noise_sampler(noise: NoiseModel) -> Sampler:
    def run(circuit: Circuit, shots: int, seed: int) -> dict:
        n = circuit.width
        rho = DensityMatrix(np.diag(np.eye(2 ** n)[0]).astype(complex))
        rho = evolve_density(circuit, rho, noise.without_readout())
        return sample_counts(rho, shots, noise, seed)

    return run


def calibrate(noise: NoiseModel | Sampler, n_qubits: int, shots: int, seed: int = 0) -> AssignmentMatrix:
    """Prepare every basis state with X gates, measure, and stack the frequencies as columns."""
    if shots < 1:
        raise MitigationError("shots must be >= 1")
    sampler = _noise_sampler(noise) if isinstance(noise, NoiseModel) else noise
    dim = 2 ** n_qubits
    seeds = np.random.SeedSequence(seed).spawn(dim)
    cols = []
    for j in range(dim):
        label = basis_label(j, n_qubits)
        prep = Circuit(n_qubits, [x(q) for q, b in enumerate(label) if b == "1"])
        counts = sampler(prep, shots, int(seeds[j].generate_state(1)[0]))
        cols.append(counts_to_probabilities(counts, n_qubits))
    return AssignmentMatrix(np.column_stack(cols), shots)


def project_simplex(v: Sequence[float]) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def mitigate_counts(a: AssignmentMatrix, noisy: Sequence[float]) -> np.ndarray:
    noisy = np.asarray(noisy, dtype=float)
    if noisy.shape != (a.matrix.shape[0],):
        raise MitigationError(f"distribution has length {noisy.size}, assignment matrix is {a.matrix.shape[0]}")
    cond = a.condition_number
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        raise MitigationError(f"assignment matrix is singular (condition number {cond:.3e})")
    raw = np.linalg.solve(a.matrix, noisy)
    return project_simplex(raw)


def fold(c: Circuit, scale: float) -> Circuit:
    """Unitary folding: ``k`` full ``C C^dagger`` rounds plus a partial fold of the tail."""
    if not math.isfinite(scale) or scale < 1:
        raise MitigationError(f"scale factor must be >= 1, got {scale!r}")
    k = int((scale - 1) // 2)
    out = c
    for _ in range(k):
        out = out + c.inverse() + c
    rest = (scale - 1) / 2 - k
    gates = [g for g in c.gates if g.kind != "BARRIER"]
    m = math.ceil(rest * len(gates) - 1e-9)
    if m > 0:
        tail = Circuit(c.width, gates[-m:])
        out = out + tail.inverse() + tail
    return Circuit(c.width, out.gates, {**c.metadata, "fold_scale": scale}, out.global_phase)


@dataclass(frozen=True)
class ZneSchedule:
    scale_factors: tuple[float, ...] = DEFAULT_SCALES
    fit: str = "linear"

    def __post_init__(self):
        sf = tuple(float(s) for s in self.scale_factors)
        if self.fit != "linear":
            raise MitigationError(f"unsupported fit {self.fit!r}")
        if any(s < 1 for s in sf):
            raise MitigationError("scale factors must be >= 1")
        if len(set(sf)) != len(sf):
            raise MitigationError("scale factors must be distinct")
        if 1.0 not in sf:
            raise MitigationError("scale factors must include 1.0")
        object.__setattr__(self, "scale_factors", sf)


def extrapolate(schedule: ZneSchedule, values: Sequence[float]) -> float:
    """Least-squares line through ``(scale, value)`` evaluated at zero noise."""
    xs = np.asarray(schedule.scale_factors)
    ys = np.asarray(values, dtype=float)
    if ys.shape != xs.shape:
        raise MitigationError(f"{ys.size} values for {xs.size} scale factors")
    if len(xs) < 2 or np.ptp(xs) == 0:
        raise MitigationError("linear fit needs at least two distinct scale factors")
    _, intercept = np.polyfit(xs, ys, 1)
    return float(intercept)
