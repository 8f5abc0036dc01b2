import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from symtrotter.numerics import (
    PAULI,
    NotHermitianError,
    eig_hermitian,
    expm_hermitian,
    frobenius,
    is_hermitian,
    kron,
    kron_all,
    phase_aligned_distance,
    random_hermitian,
    random_unitary,
    trace_norm,
)

seeds = st.integers(0, 2**32 - 1)


def _gen(seed):
    return np.random.Generator(np.random.PCG64(seed))


def test_kron_matches_numpy(rng):
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(4, 2))
    assert np.allclose(kron(a, b), np.kron(a, b))


def test_kron_all_ordering():
    # qubit 0 leftmost: X on qubit 0 of two flips the most significant bit
    m = kron_all([PAULI["X"], PAULI["I"]])
    assert m[2, 0] == 1 and m[1, 0] == 0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_kron_associative(seed):
    g = _gen(seed)
    a, b, c = (g.normal(size=(2, 2)) + 1j * g.normal(size=(2, 2)) for _ in range(3))
    assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 4, 8]))
def test_expm_matches_scipy_and_inverts(seed, dim):
    g = _gen(seed)
    hm = random_hermitian(dim, g)
    t = float(g.uniform(-3, 3))
    u = expm_hermitian(hm, -1j * t)
    assert np.allclose(u, scipy.linalg.expm(-1j * t * hm), atol=1e-10)
    assert np.allclose(u @ expm_hermitian(hm, 1j * t), np.eye(dim), atol=1e-10)


def test_expm_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        expm_hermitian(np.array([[0, 1], [0, 0]]), -1j)


def test_eig_groups_degenerate_levels():
    hm = np.diag([2.0, -1.0, 2.0, 2.0 + 1e-12])
    spec = eig_hermitian(hm)
    assert spec.levels == pytest.approx((-1.0, 2.0))
    assert spec.degeneracies == (1, 3)
    assert spec.dimension == 4


def test_is_hermitian():
    assert is_hermitian(PAULI["Y"])
    assert not is_hermitian(np.array([[0, 1], [2, 0]]))


def test_norms(rng):
    a = rng.normal(size=(4, 4))
    assert frobenius(a) == pytest.approx(np.sqrt(np.sum(a**2)))
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)


def test_phase_aligned_distance_ignores_global_phase(rng):
    u = random_unitary(4, rng)
    assert phase_aligned_distance(u, np.exp(0.7j) * u) < 1e-12
    assert phase_aligned_distance(u, -u) < 1e-12
    assert phase_aligned_distance(u, np.eye(4)) > 0.1


def test_random_unitary_is_unitary(rng):
    u = random_unitary(8, rng)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
