"""Exact one- and two-qubit resynthesis.

One-qubit unitaries become ZXZ Euler rotations.  Two-qubit unitaries go
through the KAK (Cartan) decomposition

    U = e^{i phi} (A1 ⊗ A0) exp(i (a XX + b YY + c ZZ)) (B1 ⊗ B0)

and are rebuilt with the fewest CNOTs their interaction coordinates allow.
"""
from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit, Gate, cnot, h, rx, ry, rz, unitary_of
from .numerics import PAULI, kron

ANGLE_TOL = 1e-12
COORD_TOL = 1e-9

_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex) / math.sqrt(2)
_MAGIC_DAG = _MAGIC.conj().T
_XX = kron(PAULI["X"], PAULI["X"])
_YY = kron(PAULI["Y"], PAULI["Y"])
_ZZ = kron(PAULI["Z"], PAULI["Z"])
# XX, YY, ZZ are diagonal in the magic basis
_DIAG = np.array([np.real(np.diag(_MAGIC_DAG @ p @ _MAGIC)) for p in (_XX, _YY, _ZZ)])
_COORD_SOLVE = np.linalg.inv(np.column_stack([np.ones(4), _DIAG.T]))
_MIX = (0.5387, 1.3217, 2.7183, 0.1234, 4.567)


class SynthesisError(ValueError):
    pass


def euler_zxz(u: np.ndarray) -> tuple[float, float, float, float]:
    """Angles with ``u = e^{i phase} RZ(alpha) RX(beta) RZ(gamma)``.

    Returns ``(alpha, beta, gamma, phase)``; ``RZ(gamma)`` acts first.
    """
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    v = u / np.sqrt(det)
    a, b = v[0, 0], v[0, 1]
    beta = 2 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        alpha, gamma = -2 * np.angle(a), 0.0
    elif abs(a) < 1e-14:
        alpha, gamma = -2 * np.angle(1j * b), 0.0
    else:
        s = -2 * np.angle(a)
        d = -2 * np.angle(1j * b)
        alpha, gamma = (s + d) / 2, (s - d) / 2
    alpha, gamma = float(alpha), float(gamma)
    r = _rz(alpha) @ _rx(beta) @ _rz(gamma)
    k = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    phase = float(np.angle(u[k] / r[k]))
    return alpha, float(beta), gamma, phase


def _rz(t):
    return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def wrap_angle(t: float) -> float:
    """Angle into [-2pi, 2pi); untouched when already there so values stay bit-stable."""
    if -2 * math.pi <= t < 2 * math.pi:
        return t
    return (t + 2 * math.pi) % (4 * math.pi) - 2 * math.pi


def euler_gates(u: np.ndarray, q: int) -> tuple[list[Gate], float]:
    alpha, beta, gamma, phase = euler_zxz(u)
    gates = []
    for kind, t in (("RZ", gamma), ("RX", beta), ("RZ", alpha)):
        if abs(t) > ANGLE_TOL:
            gates.append(Gate(kind, (q,), t))
    return gates, phase


def _real_orthogonal_diagonalizer(m: np.ndarray) -> np.ndarray:
    for r in _MIX:
        _, q = np.linalg.eigh(m.real + r * m.imag)
        d = q.T @ m @ q
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-10:
            return q
    raise SynthesisError("could not diagonalize the symmetric unitary")


def _factor_kron(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    a = math.sqrt(s[0]) * uu[:, 0].reshape(2, 2)
    b = math.sqrt(s[0]) * vh[0].reshape(2, 2)
    return a, b


def kak(u: np.ndarray):
    """KAK decomposition of a 4x4 unitary.

    Returns ``(phase, (a1, a0), (a, b, c), (b1, b0))`` with
    ``u = e^{i phase} (a1⊗a0) exp(i(a XX + b YY + c ZZ)) (b1⊗b0)``.
    """
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    phase = float(np.angle(det)) / 4
    us = u * np.exp(-1j * phase)
    up = _MAGIC_DAG @ us @ _MAGIC
    q = _real_orthogonal_diagonalizer(up.T @ up)
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    lam = np.diag(q.T @ (up.T @ up) @ q)
    d = np.exp(0.5j * np.angle(lam))
    left = up @ q / d
    if np.max(np.abs(left.imag)) > 1e-8:
        raise SynthesisError("KAK left factor is not real")
    left = left.real
    if np.linalg.det(left) < 0:
        d[0] = -d[0]
        left[:, 0] *= -1
    theta = np.angle(d)
    w, a, b, c = _COORD_SOLVE @ theta
    k1 = _MAGIC @ left @ _MAGIC_DAG
    k2 = _MAGIC @ q.T @ _MAGIC_DAG
    return phase + float(w), _factor_kron(k1), (float(a), float(b), float(c)), _factor_kron(k2)


def _reduce_coords(coords):
    """Shift each coordinate into (-pi/4, pi/4]; return the shifts in units of pi/2."""
    out, shifts = [], []
    for t in coords:
        k = math.floor(t / (math.pi / 2) + 0.5)
        r = t - k * math.pi / 2
        if r <= -math.pi / 4 + COORD_TOL:
            r += math.pi / 2
            k -= 1
        out.append(r)
        shifts.append(k)
    return out, shifts


def interaction_cnot_count(u: np.ndarray) -> int:
    """Minimum CNOT count for a two-qubit unitary."""
    _, _, coords, _ = kak(u)
    red, _ = _reduce_coords(coords)
    nz = [abs(t) > COORD_TOL for t in red]
    if not any(nz):
        return 0
    if sum(nz) == 1 and abs(abs(max(red, key=abs)) - math.pi / 4) < COORD_TOL:
        return 1
    if sum(nz) <= 2:
        return 2
    return 3


def canonical_gates(a: float, b: float, c: float, q0: int, q1: int) -> list[Gate]:
    """Three-CNOT circuit for ``exp(i(a XX + b YY + c ZZ))`` up to global phase."""
    hp = math.pi / 2
    return [
        rz(q1, -hp),
        cnot(q1, q0),
        rz(q0, hp - 2 * c),
        ry(q1, 2 * a - hp),
        cnot(q0, q1),
        ry(q1, hp - 2 * b),
        cnot(q1, q0),
        rz(q0, hp),
    ]


def _xz_gates(a: float, c: float, q0: int, q1: int) -> list[Gate]:
    # CNOT conjugation maps XX -> X⊗I and ZZ -> I⊗Z
    gates = [cnot(q0, q1)]
    if abs(a) > ANGLE_TOL:
        gates.append(rx(q0, -2 * a))
    if abs(c) > ANGLE_TOL:
        gates.append(rz(q1, -2 * c))
    gates.append(cnot(q0, q1))
    return gates


def _interaction_gates(red, q0: int, q1: int) -> list[Gate]:
    a, b, c = red
    nz = [abs(t) > COORD_TOL for t in red]
    hp = math.pi / 2
    if not any(nz):
        return []
    if sum(nz) == 1 and abs(abs(max(red, key=abs)) - math.pi / 4) < COORD_TOL:
        axis = nz.index(True)
        # exp(±i pi/4 ZZ) is a CZ up to local phases; rotate the axis onto ZZ
        core = [rz(q0, -hp), rz(q1, -hp), h(q1), cnot(q0, q1), h(q1)]
        if red[axis] < 0:
            core = [rz(q0, hp), rz(q1, hp), h(q1), cnot(q0, q1), h(q1)]
        if axis == 2:
            return core
        if axis == 0:
            return [h(q0), h(q1)] + core + [h(q0), h(q1)]
        return [rx(q0, hp), rx(q1, hp)] + core + [rx(q0, -hp), rx(q1, -hp)]
    if sum(nz) <= 2:
        if not nz[1]:
            return _xz_gates(a, c, q0, q1)
        if not nz[0]:
            # RZ(pi/2) on both qubits swaps XX and YY
            return [rz(q0, hp), rz(q1, hp)] + _xz_gates(b, c, q0, q1) + [rz(q0, -hp), rz(q1, -hp)]
        # RX(pi/2) on both qubits swaps YY and ZZ
        return [rx(q0, hp), rx(q1, hp)] + _xz_gates(a, b, q0, q1) + [rx(q0, -hp), rx(q1, -hp)]
    return canonical_gates(a, b, c, q0, q1)


_PAULI_BY_AXIS = ("X", "Y", "Z")


def synthesize_2q(u: np.ndarray, q0: int, q1: int) -> tuple[list[Gate], float]:
    """Minimal-CNOT gate list for ``u`` on ``(q0, q1)`` plus the global phase it leaves out.

    ``u`` is written in the basis where ``q0`` is the more significant qubit.
    """
    _, (a1, a0), coords, (b1, b0) = kak(u)
    red, shifts = _reduce_coords(coords)
    # fold the pi/2 shifts, (i PP)^k, into the right-hand locals
    for axis, k in enumerate(shifts):
        p = PAULI[_PAULI_BY_AXIS[axis]]
        if k % 2:
            b1 = p @ b1
            b0 = p @ b0
    gates: list[Gate] = []
    for q, m in ((q0, b1), (q1, b0)):
        gates += euler_gates(m, q)[0]
    gates += _interaction_gates(red, q0, q1)
    for q, m in ((q0, a1), (q1, a0)):
        gates += euler_gates(m, q)[0]
    local = Circuit(2, [Gate(g.kind, tuple(0 if qq == q0 else 1 for qq in g.qubits), g.angle) for g in gates])
    got = unitary_of(local)
    overlap = np.vdot(got, u)
    phase = float(np.angle(overlap))
    if np.linalg.norm(got * np.exp(1j * phase) - u) > 1e-8:
        raise SynthesisError("two-qubit resynthesis failed to reproduce the block unitary")
    return gates, phase
