"""Pure numpy twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same index convention: qubit 0 is the most significant bit
of the flat index.
"""
from __future__ import annotations

import numpy as np


def apply_1q(vec: np.ndarray, u: np.ndarray, q: int, m: int) -> np.ndarray:
    t = vec.reshape((2,) * m)
    t = np.tensordot(u, t, axes=([1], [q]))
    return np.moveaxis(t, 0, q).reshape(-1)


def apply_2q(vec: np.ndarray, u: np.ndarray, q0: int, q1: int, m: int) -> np.ndarray:
    t = vec.reshape((2,) * m)
    t = np.tensordot(u.reshape(2, 2, 2, 2), t, axes=([2, 3], [q0, q1]))
    return np.moveaxis(t, (0, 1), (q0, q1)).reshape(-1)


def depolarize(vec: np.ndarray, n: int, qubits, p: float) -> np.ndarray:
    qubits = sorted(int(q) for q in qubits)
    k = len(qubits)
    rho = vec.reshape((2,) * (2 * n))
    rest = [q for q in range(n) if q not in qubits]
    # reduced state on the untouched qubits, then re-insert I/2^k on the others
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for q in qubits:
        col[q] = row[q]
    reduced = np.einsum("".join(row + col) + "->" + "".join([row[q] for q in rest] + [col[q] for q in rest]), rho)
    eye = np.eye(2 ** k).reshape((2,) * (2 * k)) / 2 ** k
    full = np.tensordot(reduced, eye, axes=0)
    # full axes: rest rows, rest cols, Q rows, Q cols -> reorder to rows(0..n-1), cols(0..n-1)
    nr = len(rest)
    src_of = {}
    for i, q in enumerate(rest):
        src_of[("r", q)] = i
        src_of[("c", q)] = nr + i
    for i, q in enumerate(qubits):
        src_of[("r", q)] = 2 * nr + i
        src_of[("c", q)] = 2 * nr + k + i
    order = [src_of[("r", q)] for q in range(n)] + [src_of[("c", q)] for q in range(n)]
    mixed = np.transpose(full, order).reshape(-1)
    return (1.0 - p) * vec + p * mixed
