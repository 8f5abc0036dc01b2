"""Pauli-basis state tomography with linear inversion and a fast
maximum-likelihood projection onto physical states."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, DensityMatrix, StateVector, basis_index, h, rz
from .numerics import PAULI, kron_all

PHYSICAL_TOL = 1e-9


class TomographyError(ValueError):
    pass


def all_settings(n: int) -> tuple[str, ...]:
    return tuple("".join(p) for p in itertools.product("XYZ", repeat=n))


def all_paulis(n: int) -> tuple[str, ...]:
    return tuple("".join(p) for p in itertools.product("IXYZ", repeat=n))


@dataclass(frozen=True)
class TomographySettings:
    bases: tuple[str, ...]
    shots: int = 8192

    def __post_init__(self):
        bases = tuple(self.bases)
        if not bases:
            raise TomographyError("no settings")
        n = len(bases[0])
        if sorted(bases) != sorted(all_settings(n)):
            raise TomographyError(f"settings must cover all {3 ** n} bases exactly once")
        object.__setattr__(self, "bases", bases)

    @classmethod
    def full(cls, n: int, shots: int = 8192) -> "TomographySettings":
        return cls(all_settings(n), shots)


def basis_change(setting: str) -> Circuit:
    """Rotate each qubit so its measured axis lands on Z."""
    gates = []
    phase = 0.0
    for q, axis in enumerate(setting):
        if axis == "X":
            gates.append(h(q))
        elif axis == "Y":
            # S^dagger = exp(-i pi/4) RZ(-pi/2)
            gates += [rz(q, -math.pi / 2), h(q)]
            phase -= math.pi / 4
        elif axis != "Z":
            raise TomographyError(f"bad measurement axis {axis!r}")
    return Circuit(len(setting), gates, {"setting": setting}, phase)


def tomography_circuits(base: Circuit) -> list[tuple[str, Circuit]]:
    return [(s, base + basis_change(s)) for s in all_settings(base.width)]


@dataclass
class ExpectationTable:
    n: int
    values: dict[str, float]
    shots: int = 0  # 0 marks exact expectations
    scale_factor: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values["I" * self.n] = 1.0

    def __getitem__(self, pauli: str) -> float:
        return self.values[pauli]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["pauli_string", "value", "shots", "scale_factor"])
        for p in all_paulis(self.n):
            w.writerow([p, f"{self.values[p]:.12g}", self.shots, f"{self.scale_factor:g}"])
        return buf.getvalue()


def _parity_signs(support: Sequence[int], n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    bits = np.zeros(2 ** n, dtype=int)
    for q in support:
        bits ^= (idx >> (n - 1 - q)) & 1
    return 1 - 2 * bits


def _as_distribution(data, n: int) -> np.ndarray:
    if isinstance(data, Mapping):
        p = np.zeros(2 ** n)
        for lab, c in data.items():
            p[basis_index(lab)] += c
        total = p.sum()
        if total <= 0:
            raise TomographyError("empty histogram")
        return p / total
    p = np.asarray(data, dtype=float)
    if p.shape != (2 ** n,):
        raise TomographyError(f"distribution must have length {2 ** n}")
    return p


def estimate_expectations(
    data: Mapping[str, object], n: int | None = None, shots: int = 0, scale_factor: float = 1.0
) -> ExpectationTable:
    """Pauli expectations from per-setting outcome histograms or probability vectors.

    Each Pauli string is averaged over every setting that measures its
    non-identity letters.
    """
    if n is None:
        n = len(next(iter(data)))
    missing = set(all_settings(n)) - set(data)
    if missing:
        raise TomographyError(f"missing settings: {sorted(missing)[:5]}")
    dists = {s: _as_distribution(data[s], n) for s in all_settings(n)}
    values = {}
    for p in all_paulis(n):
        support = [q for q, c in enumerate(p) if c != "I"]
        signs = _parity_signs(support, n)
        compatible = [s for s in dists if all(s[q] == p[q] for q in support)]
        values[p] = float(np.mean([signs @ dists[s] for s in compatible]))
    return ExpectationTable(n, values, shots, scale_factor)


def pauli_matrix(p: str) -> np.ndarray:
    return kron_all(PAULI[c] for c in p)


def exact_expectations(rho: DensityMatrix | StateVector) -> ExpectationTable:
    """Infinite-shot table, ``Tr(rho P)`` for every Pauli string."""
    if isinstance(rho, StateVector):
        rho = DensityMatrix.from_statevector(rho)
    n = rho.width
    m = rho.matrix
    return ExpectationTable(n, {p: float(np.real(np.trace(m @ pauli_matrix(p)))) for p in all_paulis(n)})


def reconstruct_linear(t: ExpectationTable) -> DensityMatrix:
    d = 2 ** t.n
    rho = np.zeros((d, d), dtype=complex)
    for p in all_paulis(t.n):
        if p not in t.values:
            raise TomographyError(f"table is missing {p}")
        rho += t.values[p] * pauli_matrix(p)
    rho /= d
    return DensityMatrix((rho + rho.conj().T) / 2)


def truncate_eigenvalues(vals: Sequence[float]) -> np.ndarray:
    """Fast MLE truncation of a unit-sum spectrum.

    Walk the eigenvalues from the smallest up; while the current one, with its
    share of the accumulated deficit, is negative, zero it and carry the
    deficit.  The remaining eigenvalues absorb the deficit equally.
    """
    vals = np.asarray(vals, dtype=float)
    order = np.argsort(vals)[::-1]
    lam = vals[order].copy()
    d = len(lam)
    acc = 0.0
    i = d - 1
    while i >= 0 and lam[i] + acc / (i + 1) < 0:
        acc += lam[i]
        lam[i] = 0.0
        i -= 1
    lam[: i + 1] += acc / (i + 1)
    out = np.empty(d)
    out[order] = lam
    return out


def project_mle(rho: DensityMatrix) -> DensityMatrix:
    vals, vecs = np.linalg.eigh(rho.matrix)
    if vals[0] >= 0:
        return rho
    lam = truncate_eigenvalues(vals / vals.sum())
    m = (vecs * lam) @ vecs.conj().T
    return DensityMatrix((m + m.conj().T) / 2)


def fidelity(rho: DensityMatrix, target: StateVector) -> float:
    """``<psi|rho|psi>`` for a physical ``rho`` and pure target."""
    if not rho.is_physical(PHYSICAL_TOL):
        raise TomographyError(f"density matrix is not physical (min eigenvalue {rho.min_eigenvalue():.3e})")
    a = target.amplitudes
    return float(np.real(np.vdot(a, rho.matrix @ a)))
