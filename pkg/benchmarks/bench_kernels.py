"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per call for each kernel and a full noisy
density-matrix evolution of a 100-step circuit on each backend.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from symtrotter import _pykernels, circuit, kernels
from symtrotter.circuit import DensityMatrix, StateVector, evolve_density
from symtrotter.noise import NoiseModel
from symtrotter.numerics import random_unitary
from symtrotter.trotter import TrotterPlan, build_evolution

try:
    from symtrotter import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_rows(repeat: int):
    rng = np.random.Generator(np.random.PCG64(0))
    rows = []
    for n in (3, 5, 7):
        m = 2 * n
        vec = rng.normal(size=2**m) + 1j * rng.normal(size=2**m)
        u1, u2 = random_unitary(2, rng), random_unitary(4, rng)
        cases = {
            "apply_1q": lambda k: k.apply_1q(vec, u1, 1, m),
            "apply_2q": lambda k: k.apply_2q(vec, u2, 0, n - 1, m),
            "depolarize": lambda k: k.depolarize(vec, n, (0, 1), 0.01),
        }
        number = max(10, 20000 // 2**m)
        for name, call in cases.items():
            py = _best(lambda: call(_pykernels), repeat, number)
            cy = _best(lambda: call(_ckernels), repeat, number) if _ckernels else math.nan
            rows.append((name, n, py, cy))
    return rows


def evolution_row(repeat: int):
    c = build_evolution(TrotterPlan(100, math.pi, "general"))
    rho = DensityMatrix.from_statevector(StateVector.from_label("011"))
    noise = NoiseModel.default()
    out = {}
    for label, impl in (("python", _pykernels), ("cython", _ckernels)):
        if impl is None:
            out[label] = math.nan
            continue
        kernels._impl = impl
        out[label] = _best(lambda: evolve_density(c, rho, noise), repeat, 1)
    return len(c), out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    saved = kernels._impl
    try:
        print(f"default backend: {kernels.BACKEND}")
        print(f"{'kernel':<11} {'qubits':>6} {'python us':>11} {'cython us':>11} {'speedup':>8}")
        for name, n, py, cy in kernel_rows(args.repeat):
            print(f"{name:<11} {n:>6} {py * 1e6:>11.2f} {cy * 1e6:>11.2f} {py / cy:>8.2f}")
        gates, t = evolution_row(args.repeat)
        print(f"\nnoisy evolution, {gates} gates, 3 qubits:")
        print(f"  python {t['python'] * 1e3:.1f} ms, cython {t['cython'] * 1e3:.1f} ms, "
              f"speedup {t['python'] / t['cython']:.2f}x")
    finally:
        kernels._impl = saved
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
