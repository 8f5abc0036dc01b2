"""Pauli-string Hamiltonians for the open XXX chain and its parity-reduced forms.

Sites are 0-indexed internally and 1-indexed in text dumps (``"-1 Z1 X2"``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .numerics import PAULI, eig_hermitian, expm_hermitian, kron_all

ZERO_COEFF = 1e-14
GAP_TOL = 1e-9


class ModelError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PauliTerm:
    # sort key first so sorted() gives the canonical order
    letters: tuple[tuple[int, str], ...]
    coefficient: float = field(default=1.0, compare=False)

    def __post_init__(self):
        letters = tuple(sorted((int(s), str(p)) for s, p in self.letters))
        sites = [s for s, _ in letters]
        if len(set(sites)) != len(sites):
            raise ModelError(f"repeated site in {letters}")
        for s, p in letters:
            if p not in "XYZ" or len(p) != 1:
                raise ModelError(f"bad Pauli letter {p!r}")
            if s < 0:
                raise ModelError(f"negative site index {s}")
        if not math.isfinite(self.coefficient):
            raise ModelError("coefficient must be finite")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.letters)

    def label(self, width: int) -> str:
        chars = ["I"] * width
        for s, p in self.letters:
            chars[s] = p
        return "".join(chars)

    def to_matrix(self, width: int) -> np.ndarray:
        return self.coefficient * kron_all(PAULI[c] for c in self.label(width))

    def __str__(self) -> str:
        body = " ".join(f"{p}{s + 1}" for s, p in self.letters)
        return f"{self.coefficient:+.17g} {body}".rstrip()


def term(coefficient: float, spec: str = "") -> PauliTerm:
    """``term(-1, "Z1 X2")`` with 1-indexed sites."""
    letters = []
    for tok in spec.split():
        letters.append((int(tok[1:]) - 1, tok[0].upper()))
    return PauliTerm(tuple(letters), coefficient)


def _canonical(terms: Iterable[PauliTerm]) -> tuple[PauliTerm, ...]:
    acc: dict[tuple, float] = {}
    for t in terms:
        acc[t.letters] = acc.get(t.letters, 0.0) + t.coefficient
    out = [PauliTerm(k, c) for k, c in acc.items() if abs(c) > ZERO_COEFF]
    out.sort(key=lambda t: (t.support, t.letters))
    return tuple(out)


@dataclass(frozen=True)
class PauliSum:
    width: int
    terms: tuple[PauliTerm, ...] = ()

    def __post_init__(self):
        terms = _canonical(self.terms)
        for t in terms:
            if t.support and max(t.support) >= self.width:
                raise ModelError(f"term {t} exceeds width {self.width}")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.width != self.width:
            raise ModelError("width mismatch")
        return PauliSum(self.width, self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.width, tuple(PauliTerm(t.letters, factor * t.coefficient) for t in self.terms))

    def to_matrix(self) -> np.ndarray:
        d = 2 ** self.width
        out = np.zeros((d, d), dtype=complex)
        for t in self.terms:
            out += t.to_matrix(self.width)
        return out

    def embed(self, width: int, sites: tuple[int, ...]) -> "PauliSum":
        """Place this sum on ``sites`` of a ``width``-site register (identity elsewhere)."""
        if len(sites) != self.width:
            raise ModelError("need one target site per local site")
        return PauliSum(width, tuple(PauliTerm(tuple((sites[s], p) for s, p in t.letters), t.coefficient) for t in self.terms))

    def labels(self) -> dict[str, float]:
        return {t.label(self.width): t.coefficient for t in self.terms}

    @classmethod
    def from_matrix(cls, m: np.ndarray, width: int, tol: float = 1e-12) -> "PauliSum":
        """Pauli decomposition of a Hermitian matrix (brute force over 4^width strings)."""
        m = np.asarray(m, dtype=complex)
        terms = []
        for letters in itertools.product("IXYZ", repeat=width):
            c = np.trace(kron_all(PAULI[p] for p in letters) @ m) / 2 ** width
            if abs(c.imag) > tol:
                raise ModelError("matrix is not Hermitian: complex Pauli coefficient")
            if abs(c.real) > tol:
                terms.append(PauliTerm(tuple((s, p) for s, p in enumerate(letters) if p != "I"), c.real))
        return cls(width, tuple(terms))

    def to_text(self) -> str:
        return f"# width={self.width}\n" + "".join(f"{t}\n" for t in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        width = None
        terms = []
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("#"):
                if line[1:].strip().startswith("width="):
                    width = int(line.split("=", 1)[1])
                continue
            if not line:
                continue
            coeff, _, rest = line.partition(" ")
            terms.append(term(float(coeff), rest))
        if width is None:
            width = 1 + max((s for t in terms for s in t.support), default=0)
        return cls(width, tuple(terms))


def build_heisenberg(n_sites: int) -> PauliSum:
    """Open-chain J=1 XXX Hamiltonian: sum over neighbours of XX + YY + ZZ."""
    if n_sites < 2:
        raise ModelError("the chain needs at least two sites")
    terms = [PauliTerm(((i, p), (i + 1, p)), 1.0) for i in range(n_sites - 1) for p in "XYZ"]
    return PauliSum(n_sites, tuple(terms))


def parity_operator(n_sites: int, letter: str = "Z") -> PauliSum:
    return PauliSum(n_sites, (PauliTerm(tuple((i, letter) for i in range(n_sites)), 1.0),))


@dataclass(frozen=True)
class EncodingOperator:
    matrix: np.ndarray
    # site-major basis label -> site-major label of its image
    basis_map: Mapping[str, str]

    @property
    def width(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    def bit_major_map(self) -> dict[str, str]:
        return {k[::-1]: v[::-1] for k, v in self.basis_map.items()}

    def conjugate(self, h: np.ndarray) -> np.ndarray:
        return self.matrix @ h @ self.matrix.conj().T


def _permutation_map(u: np.ndarray, tol: float = 1e-12) -> dict[str, str]:
    n = int(round(math.log2(u.shape[0])))
    out = {}
    for j in range(u.shape[0]):
        col = u[:, j]
        i = int(np.argmax(np.abs(col)))
        if abs(abs(col[i]) - 1) < tol:
            out[format(j, f"0{n}b")] = format(i, f"0{n}b")
    return out


# The 3-site encoding table as tabulated with the leftmost character of each
# ket standing for site 3 (bit-major); converted to site-major on use.
ENCODER_3_TABLE_BIT_MAJOR = {
    "000": "000",
    "011": "001",
    "110": "010",
    "101": "011",
    "111": "100",
    "100": "101",
    "001": "110",
    "010": "111",
}


def build_encoder_3() -> EncodingOperator:
    """Parity-folding permutation for three sites; parity lands on site 3."""
    table = {k[::-1]: v[::-1] for k, v in ENCODER_3_TABLE_BIT_MAJOR.items()}
    u = np.zeros((8, 8), dtype=complex)
    for src, dst in table.items():
        u[int(dst, 2), int(src, 2)] = 1
    return EncodingOperator(u, table)


def effective_hamiltonian_3() -> PauliSum:
    """Two-site Hamiltonian ``X1 + X2 + Z1 + Z2 - Z1 X2 - X1 Z2``."""
    return PauliSum(
        2,
        (
            term(1, "X1"),
            term(1, "X2"),
            term(1, "Z1"),
            term(1, "Z2"),
            term(-1, "Z1 X2"),
            term(-1, "X1 Z2"),
        ),
    )


@dataclass(frozen=True)
class Periodicity:
    is_periodic: bool
    period: float
    phase: complex


def check_periodicity(h, period: float = math.pi) -> Periodicity:
    """Whether ``exp(-i h period)`` is a multiple of the identity.

    True exactly when every eigenvalue gap times ``period / 2pi`` is an integer
    (for ``period = pi``: all gaps even integers).
    """
    m = h.to_matrix() if isinstance(h, PauliSum) else np.asarray(h, dtype=complex)
    spec = eig_hermitian(m)
    levels = np.array(spec.levels)
    gaps = (levels - levels[0]) * period / (2 * math.pi)
    ok = bool(np.all(np.abs(gaps - np.round(gaps)) < GAP_TOL))
    w = expm_hermitian(m, -1j * period)
    phase = complex(w[0, 0]) if ok else complex("nan")
    return Periodicity(ok, period, phase)


def _require_odd(n_sites: int) -> int:
    if n_sites < 3 or n_sites % 2 == 0:
        raise ModelError(f"n_sites must be odd and >= 3, got {n_sites}")
    return (n_sites - 1) // 2


def _local(width: int, ops: Mapping[int, str]) -> np.ndarray:
    return kron_all(PAULI[ops.get(i, "I")] for i in range(width))


def _folding_operator(width: int, middle: int, outer: tuple[int, ...], parity_sites: tuple[int, ...]) -> np.ndarray:
    eye = np.eye(2 ** width, dtype=complex)
    par = _local(width, {s: "Z" for s in parity_sites})
    zm, xm, ym = (_local(width, {middle: p}) for p in "ZXY")
    flips = _local(width, {s: "X" for s in outer})
    odd = flips @ (eye - zm + xm - 1j * ym) / 2 @ (eye - par) / 2
    even = (eye + zm + xm + 1j * ym) / 2 @ (eye + par) / 2
    return odd + even


def build_encoder_general(n_sites: int) -> EncodingOperator:
    """Projector-form encoder for an odd chain; parity is stored on the middle site."""
    k = _require_odd(n_sites)
    mid = k  # site k+1, 0-indexed
    outer = tuple(s for s in range(n_sites) if s != mid)
    u = _folding_operator(n_sites, mid, outer, tuple(range(n_sites)))
    return EncodingOperator(u, _permutation_map(u))


def effective_hamiltonian_general(n_sites: int) -> PauliSum:
    k = _require_odd(n_sites)
    # 0-indexed: sites k-1 and k+1 flank the parity site k
    left, mid, right = k - 1, k, k + 1
    terms = [
        PauliTerm(((m, p), (m + 1, p)), 1.0)
        for m in range(n_sites - 1)
        if m not in (left, mid)
        for p in "XYZ"
    ]
    terms.append(PauliTerm(((left, "X"),), 1.0))
    terms.append(PauliTerm(((right, "X"),), 1.0))
    dressing = tuple((m, "Z") for m in range(n_sites) if m not in (left, mid, right))
    for coeff, core in (
        (1.0, ((left, "Z"),)),
        (1.0, ((right, "Z"),)),
        (-1.0, ((left, "X"), (right, "Z"))),
        (-1.0, ((left, "Z"), (right, "X"))),
    ):
        terms.append(PauliTerm(core + dressing, coeff))
    return PauliSum(n_sites, tuple(terms))


def triple_sites(m: int) -> tuple[int, int, int]:
    """0-indexed sites (2m-2, 2m-1, 2m) of block ``m`` (1-indexed)."""
    return (2 * m - 2, 2 * m - 1, 2 * m)


def build_block_encoder(n_sites: int, m: int) -> EncodingOperator:
    """Encoder acting on the three sites of block ``m`` only."""
    k = _require_odd(n_sites)
    if not 1 <= m <= k:
        raise ModelError(f"block index must be in 1..{k}")
    a, b, c = triple_sites(m)
    u = _folding_operator(n_sites, b, (a, c), (a, b, c))
    return EncodingOperator(u, _permutation_map(u))


def block_effective_hamiltonian(n_sites: int, m: int) -> PauliSum:
    """``H_eff`` of block ``m`` on its two outer sites."""
    _require_odd(n_sites)
    a, _, c = triple_sites(m)
    return effective_hamiltonian_3().embed(n_sites, (a, c))


@dataclass(frozen=True)
class PartialTransform:
    """Mixed-frame split of the chain Hamiltonian.

    ``raw_blocks`` keep their Heisenberg pair terms; ``encoded_blocks`` are
    represented as ``U(m)^dagger H_eff^m U(m)``.
    """

    n_sites: int
    raw_blocks: tuple[int, ...]
    encoded_blocks: tuple[int, ...]

    def raw_pairs(self) -> tuple[tuple[int, int], ...]:
        pairs = []
        for m in self.raw_blocks:
            a, b, c = triple_sites(m)
            pairs += [(a, b), (b, c)]
        return tuple(pairs)

    def raw_terms(self) -> PauliSum:
        terms = [PauliTerm(((i, p), (j, p)), 1.0) for i, j in self.raw_pairs() for p in "XYZ"]
        return PauliSum(self.n_sites, tuple(terms))

    def block_matrix(self, m: int) -> np.ndarray:
        u = build_block_encoder(self.n_sites, m).matrix
        return u.conj().T @ block_effective_hamiltonian(self.n_sites, m).to_matrix() @ u

    def to_matrix(self) -> np.ndarray:
        out = self.raw_terms().to_matrix()
        for m in self.encoded_blocks:
            out = out + self.block_matrix(m)
        return out

    def hamiltonian(self) -> PauliSum:
        return PauliSum.from_matrix(self.to_matrix(), self.n_sites)


def partial_transform(n_sites: int, x_set: Iterable[int]) -> PartialTransform:
    k = _require_odd(n_sites)
    xs = set(int(m) for m in x_set)
    if not xs <= set(range(1, k + 1)):
        raise ModelError(f"x_set must be a subset of 1..{k}, got {sorted(xs)}")
    raw = tuple(m for m in range(1, k + 1) if m in xs)
    enc = tuple(m for m in range(1, k + 1) if m not in xs)
    return PartialTransform(n_sites, raw, enc)


def total_spin_identity_matrix() -> np.ndarray:
    """``(S_tot)^2/2 - (s1 + s3)^2/2 - 3/2`` in Pauli units for three sites."""
    def vec_sum(sites):
        return [sum(_local(3, {s: p}) for s in sites) for p in "XYZ"]

    tot = vec_sum((0, 1, 2))
    outer = vec_sum((0, 2))
    sq = lambda v: reduce(lambda acc, c: acc + c @ c, v, np.zeros((8, 8), dtype=complex))
    return sq(tot) / 2 - sq(outer) / 2 - 1.5 * np.eye(8)
