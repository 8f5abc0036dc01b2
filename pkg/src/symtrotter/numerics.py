"""Dense complex linear-algebra helpers shared by every other module.

Matrices are plain ``numpy.ndarray`` objects with complex dtype.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NotHermitianError(ValueError):
    pass


def as_cmatrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(a⊗b)[i*rb+k, j*cb+l] = a[i,j]*b[k,l]``."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.shape[0] == h.shape[1] and float(np.max(np.abs(h - h.conj().T), initial=0.0)) < tol


def _require_hermitian(h) -> np.ndarray:
    h = as_cmatrix(h)
    if not is_hermitian(h):
        dev = float(np.max(np.abs(h - h.conj().T)))
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^dagger| = {dev:.3e})")
    return h


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    # distinct levels and their multiplicities
    levels: tuple[float, ...]
    degeneracies: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


def eig_hermitian(h, tol: float = DEGENERACY_TOL) -> Spectrum:
    h = _require_hermitian(h)
    vals, vecs = np.linalg.eigh(h)
    levels: list[float] = []
    degs: list[int] = []
    for v in vals:
        if levels and abs(v - levels[-1]) < tol:
            degs[-1] += 1
        else:
            levels.append(float(v))
            degs.append(1)
    return Spectrum(vals, vecs, tuple(levels), tuple(degs))


def expm_hermitian(h, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via the spectral decomposition."""
    h = _require_hermitian(h)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(complex(scale) * vals)) @ vecs.conj().T


def frobenius(a) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))


def trace_norm(a) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(a), compute_uv=False)))


def phase_aligned_distance(a, b) -> float:
    """Frobenius distance between ``a`` and ``b`` after removing the best global phase."""
    a = np.asarray(a)
    b = np.asarray(b)
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return frobenius(a - phase * b)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
