import math
import warnings

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symtrotter.circuit import (
    Circuit,
    DensityMatrix,
    StateVector,
    apply,
    evolve_density,
    sample_counts,
    unitary_of,
)
from symtrotter.numerics import PAULI, random_hermitian, random_unitary
from symtrotter.tomography import (
    ExpectationTable,
    TomographyError,
    TomographySettings,
    all_paulis,
    all_settings,
    basis_change,
    estimate_expectations,
    exact_expectations,
    fidelity,
    pauli_matrix,
    project_mle,
    reconstruct_linear,
    tomography_circuits,
    truncate_eigenvalues,
)

from test_circuit import random_circuit


def _random_state(g, n=3):
    v = g.normal(size=2**n) + 1j * g.normal(size=2**n)
    return StateVector(v / np.linalg.norm(v))


def _trace_one_indefinite(g, dim=8):
    m = random_hermitian(dim, g) * 0.3
    return m + (1 - np.trace(m).real) / dim * np.eye(dim)


def test_settings_counts():
    assert len(all_settings(3)) == 27
    assert len(all_paulis(3)) == 64
    with pytest.raises(TomographyError):
        TomographySettings(("XX", "YY"))
    assert TomographySettings.full(2).shots == 8192


@pytest.mark.parametrize("axis", "XYZ")
def test_basis_change_diagonalizes(axis):
    u = unitary_of(basis_change(axis))
    assert np.allclose(u @ PAULI[axis] @ u.conj().T, PAULI["Z"], atol=1e-12)


def test_y_basis_change_phase_is_tracked():
    # RZ(-pi/2) H with its phase equals H S^dagger exactly
    sdg = np.diag([1, -1j])
    hm = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(unitary_of(basis_change("Y")), hm @ sdg)


def test_bad_axis():
    with pytest.raises(TomographyError):
        basis_change("Q")


def test_probability_data_gives_exact_expectations(rng):
    psi = _random_state(rng)
    data = {s: apply(c, psi).probabilities() for s, c in tomography_circuits(Circuit(3))}
    est = estimate_expectations(data, 3)
    exact = exact_expectations(psi)
    for p in all_paulis(3):
        assert est[p] == pytest.approx(exact[p], abs=1e-12)


def test_linear_reconstruction_recovers_state(rng):
    rho = DensityMatrix.from_statevector(_random_state(rng))
    assert np.allclose(reconstruct_linear(exact_expectations(rho)).matrix, rho.matrix, atol=1e-12)


def test_counts_pipeline_fidelity(rng):
    psi = _random_state(rng)
    c = random_circuit(5)
    data = {}
    for s, circ in tomography_circuits(c):
        data[s] = sample_counts(apply(circ, psi), 8192, seed=len(data))
    rho = project_mle(reconstruct_linear(estimate_expectations(data, 3, 8192)))
    target = apply(c, psi)
    assert fidelity(rho, target) > 0.95


def test_missing_setting():
    with pytest.raises(TomographyError, match="missing"):
        estimate_expectations({"XX": {"00": 1}}, 2)


def test_empty_histogram():
    data = {s: {"00": 1} for s in all_settings(2)}
    data["ZZ"] = {}
    with pytest.raises(TomographyError):
        estimate_expectations(data, 2)


def test_csv_layout():
    t = exact_expectations(StateVector.from_label("0"))
    lines = t.to_csv().splitlines()
    assert lines[0] == "pauli_string,value,shots,scale_factor"
    assert lines[1].startswith("I,1,0,1")
    assert len(lines) == 5


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-1, 2), min_size=2, max_size=8))
def test_truncation_matches_simplex_projection(vals):
    vals = np.array(vals)
    vals = vals + (1 - vals.sum()) / len(vals)
    lam = truncate_eigenvalues(vals)
    assert lam.min() >= -1e-12 and lam.sum() == pytest.approx(1)
    x = cp.Variable(len(vals))
    cp.Problem(cp.Minimize(cp.sum_squares(x - vals)), [x >= 0, cp.sum(x) == 1]).solve(solver="CLARABEL")
    assert np.allclose(lam, x.value, atol=1e-6)


def _nearest_by_support(vals):
    # every support set, each with the optimal uniform shift; keep the closest feasible one
    best, best_d = None, np.inf
    d = len(vals)
    for mask in range(1, 2**d):
        idx = [i for i in range(d) if mask >> i & 1]
        lam = np.zeros(d)
        lam[idx] = vals[idx] - (vals[idx].sum() - 1) / len(idx)
        if lam.min() < 0:
            continue
        dist = np.sum((lam - vals) ** 2)
        if dist < best_d:
            best, best_d = lam, dist
    return best


def test_mle_brute_force_dim8():
    g = np.random.Generator(np.random.PCG64(2024))
    worst = 0.0
    for _ in range(200):
        m = _trace_one_indefinite(g)
        got = project_mle(DensityMatrix(m)).matrix
        vals, vecs = np.linalg.eigh(m)
        want = (vecs * _nearest_by_support(vals)) @ vecs.conj().T
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst < 1e-8


def test_mle_matches_semidefinite_program():
    # free-form SDP, no shared-eigenbasis assumption; solver accuracy is ~1e-6
    g = np.random.Generator(np.random.PCG64(7))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(20):
            m = _trace_one_indefinite(g)
            got = project_mle(DensityMatrix(m)).matrix
            x = cp.Variable((8, 8), hermitian=True)
            cp.Problem(cp.Minimize(cp.sum_squares(x - m)), [x >> 0, cp.real(cp.trace(x)) == 1]).solve(solver="CLARABEL")
            assert np.max(np.abs(got - x.value)) < 1e-5


def test_mle_leaves_physical_alone(rng):
    rho = DensityMatrix.from_statevector(_random_state(rng))
    assert np.allclose(project_mle(rho).matrix, rho.matrix, atol=1e-12)


def test_fidelity_rejects_unphysical(rng):
    m = _trace_one_indefinite(rng)
    assert np.linalg.eigvalsh(m)[0] < 0
    with pytest.raises(TomographyError):
        fidelity(DensityMatrix(m), StateVector.from_label("000"))


def test_fidelity_pure():
    psi = StateVector.superposition(["010", "110"])
    assert fidelity(DensityMatrix.from_statevector(psi), psi) == pytest.approx(1.0)
    assert fidelity(DensityMatrix.maximally_mixed(3), psi) == pytest.approx(1 / 8)


def test_pauli_matrix_order():
    assert np.allclose(pauli_matrix("XZ"), np.kron(PAULI["X"], PAULI["Z"]))
