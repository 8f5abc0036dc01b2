import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from symtrotter.circuit import Circuit, StateVector, apply, unitary_of
from symtrotter.model import build_encoder_3, build_heisenberg, effective_hamiltonian_3, partial_transform
from symtrotter.numerics import PAULI, kron, kron_all, phase_aligned_distance
from symtrotter.trotter import (
    PlanError,
    TrotterPlan,
    block_encoder_gates,
    build_evolution,
    decoder_3,
    encoded_label,
    encoder_3,
    flexible_axis_step,
    heisenberg_pair,
    is_period_multiple,
    naive_step,
    second_block,
    specific_decoder,
    trotter_unit,
)

X, Z = PAULI["X"], PAULI["Z"]
I2 = np.eye(2)
H3 = build_heisenberg(3).to_matrix()


def printed_second_block(th):
    c, s = math.cos(th), math.sin(th)
    cs = 1j * s * c
    return np.array(
        [
            [c * c, cs, cs, s * s],
            [cs, c * c, -s * s, -cs],
            [cs, -s * s, c * c, -cs],
            [s * s, -cs, -cs, c * c],
        ]
    )


def three_factor(th):
    a = scipy.linalg.expm(-1j * th * (kron(X, I2) + kron(I2, Z)))
    b = scipy.linalg.expm(1j * th * (kron(X, Z) + kron(Z, X)))
    c = scipy.linalg.expm(-1j * th * (kron(I2, X) + kron(Z, I2)))
    return a @ b @ c


def exact_state(label, t):
    psi = StateVector.from_label(label).amplitudes
    return scipy.linalg.expm(-1j * t * H3) @ psi


def fidelity_at(strategy, steps, t=math.pi, label="011"):
    c = build_evolution(TrotterPlan(steps, t, strategy, 3, label))
    out = apply(c, StateVector.from_label(label)).amplitudes
    return abs(np.vdot(exact_state(label, t), out)) ** 2


@settings(max_examples=40, deadline=None)
@given(st.floats(-2 * math.pi, 2 * math.pi))
def test_second_block_printed_matrix(th):
    c = second_block(th)
    assert np.allclose(unitary_of(c), printed_second_block(th), atol=1e-10)
    pairs = {g.qubits for g in c.gates if g.kind == "CNOT"}
    assert len(pairs) == 1


def test_second_block_special_angles():
    assert np.allclose(unitary_of(second_block(0.0)), np.eye(4))
    assert np.allclose(np.abs(unitary_of(second_block(math.pi / 4))), 0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2 * math.pi, 2 * math.pi))
def test_trotter_unit_three_factor(th):
    assert np.allclose(unitary_of(trotter_unit(th)), three_factor(th), atol=1e-10)


def test_unit_converges_to_effective_dynamics():
    n = 30
    u = np.linalg.matrix_power(unitary_of(trotter_unit(math.pi / n)), n)
    exact = scipy.linalg.expm(-1j * math.pi * effective_hamiltonian_3().to_matrix())
    v0 = np.eye(4)[1]
    assert abs(np.vdot(exact @ v0, u @ v0)) ** 2 >= 0.999


def test_split_does_not_commute():
    a = kron(X, I2) + kron(I2, Z)
    b = kron(I2, X) + kron(Z, I2)
    assert np.linalg.norm(a @ b - b @ a) > 1


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3))
def test_heisenberg_pair_exact(dt):
    pair = sum(kron(PAULI[p], PAULI[p]) for p in "XYZ")
    c = heisenberg_pair(0, 1, dt, 2)
    assert np.allclose(unitary_of(c), scipy.linalg.expm(-1j * dt * pair), atol=1e-10)
    assert c.cnot_count() == 3


def test_naive_step_is_pair_product():
    dt = 0.37
    pair = sum(kron(PAULI[p], PAULI[p]) for p in "XYZ")
    want = scipy.linalg.expm(-1j * dt * np.kron(I2, pair)) @ scipy.linalg.expm(-1j * dt * np.kron(pair, I2))
    assert np.allclose(unitary_of(naive_step(dt)), want, atol=1e-10)


def test_encoder_circuit_matches_permutation():
    assert np.allclose(unitary_of(encoder_3()), build_encoder_3().matrix)
    assert np.allclose(unitary_of(encoder_3() + decoder_3()), np.eye(8))


@pytest.mark.parametrize("label", ["000", "011", "101", "110"])
def test_specific_decoder_on_even_subspace(label):
    enc = encoded_label(label)
    assert enc[2] == "0"
    out = apply(specific_decoder(), StateVector.from_label(enc))
    assert out.probabilities()[int(label, 2)] == pytest.approx(1.0)


def test_general_matrix_structure():
    plan = TrotterPlan(5, 1.1, "general")
    unit = np.linalg.matrix_power(unitary_of(trotter_unit(plan.dt)), 5)
    u = build_encoder_3().matrix
    want = u.conj().T @ np.kron(unit, I2) @ u
    assert np.allclose(unitary_of(build_evolution(plan)), want, atol=1e-12)


@pytest.mark.parametrize("strategy", ["general", "shallow_specific", "shallow_shallow", "naive"])
def test_strategies_agree_on_contest_input(strategy):
    ref = fidelity_at("general", 12)
    assert fidelity_at(strategy, 12) == pytest.approx(ref, abs=1e-9)


def test_convergence_thresholds():
    assert fidelity_at("naive", 12) >= 0.90
    assert fidelity_at("shallow_specific", 30) >= 0.999


def test_first_order_error_ratio():
    def err(n):
        t = 1.0
        c = build_evolution(TrotterPlan(n, t, "general"))
        return np.linalg.norm(unitary_of(c) - scipy.linalg.expm(-1j * t * H3), 2)

    for n in (10, 20):
        assert err(n) / err(2 * n) == pytest.approx(2.0, rel=0.2)


def test_shallow_cnot_budget():
    core = 2 * 100
    assert build_evolution(TrotterPlan(100, math.pi, "shallow_shallow")).cnot_count() == core
    assert build_evolution(TrotterPlan(100, math.pi, "shallow_specific")).cnot_count() == core + 2
    assert build_evolution(TrotterPlan(100, math.pi, "general")).cnot_count() == core + 8


def test_plan_validation():
    with pytest.raises(PlanError):
        TrotterPlan(0, 1.0)
    with pytest.raises(PlanError):
        TrotterPlan(3, 1.0, "shallow_shallow")
    with pytest.raises(PlanError):
        TrotterPlan(3, math.pi, "shallow_specific", 3, "001")
    with pytest.raises(PlanError):
        TrotterPlan(3, math.pi, "shallow_specific", 3, None)
    with pytest.raises(PlanError):
        TrotterPlan(3, math.pi, "bogus")
    assert TrotterPlan(4, 2.0).dt == 0.5


def test_period_multiple():
    assert is_period_multiple(3 * math.pi)
    assert is_period_multiple(0.0)
    assert not is_period_multiple(1.0)


def test_block_encoder_gates_match_model():
    from symtrotter.model import build_block_encoder

    for m in (1, 2):
        c = Circuit(5, block_encoder_gates(m))
        assert np.allclose(unitary_of(c), build_block_encoder(5, m).matrix)


@pytest.mark.parametrize("x_set", [(), (1,), (2,), (1, 2)])
def test_flexible_step_is_first_order(x_set):
    h5 = build_heisenberg(5).to_matrix()
    errs = []
    for dt in (0.02, 0.01):
        u = unitary_of(flexible_axis_step(5, x_set, dt))
        errs.append(np.linalg.norm(u - scipy.linalg.expm(-1j * dt * h5), 2))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_flexible_step_all_raw_equals_naive():
    dt = 0.3
    a = unitary_of(flexible_axis_step(5, (1, 2), dt))
    b = unitary_of(naive_step(dt, 5))
    assert phase_aligned_distance(a, b) < 1e-10


def test_flexible_step_reverse_same_hamiltonian():
    h5 = partial_transform(5, (1,)).to_matrix()
    for rev in (False, True):
        u = unitary_of(flexible_axis_step(5, (1,), 1e-3, reverse=rev))
        gen = 1j * (u - np.eye(32)) / 1e-3
        assert np.linalg.norm(gen - h5, 2) < 0.05
