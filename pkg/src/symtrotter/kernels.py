"""Backend selection for the gate-application kernels.

The compiled extension is used when it was built; otherwise the numpy twin.
Set ``SYMTROTTER_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_FORCE_PURE = os.environ.get("SYMTROTTER_PURE_PYTHON", "") not in ("", "0")

try:
    if _FORCE_PURE:
        raise ImportError("pure-python backend forced")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

# compiled depolarize keeps its subset table on the stack
_MAX_COMPILED_DEPOL_QUBITS = 6


def _c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


def apply_1q(vec, u, q: int, m: int) -> np.ndarray:
    return _impl.apply_1q(_c(vec), _c(u), int(q), int(m))


def apply_2q(vec, u, q0: int, q1: int, m: int) -> np.ndarray:
    return _impl.apply_2q(_c(vec), _c(u), int(q0), int(q1), int(m))


def depolarize(vec, n: int, qubits, p: float) -> np.ndarray:
    qubits = tuple(int(q) for q in qubits)
    if len(qubits) > _MAX_COMPILED_DEPOL_QUBITS:
        return _pykernels.depolarize(_c(vec), int(n), qubits, float(p))
    return _impl.depolarize(_c(vec), int(n), qubits, float(p))
