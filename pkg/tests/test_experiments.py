import math
from dataclasses import replace

import numpy as np
import pytest

from symtrotter.circuit import DensityMatrix, apply, evolve_density
from symtrotter.experiments import (
    ConfigError,
    ExperimentConfig,
    exact_state,
    evolution_circuit,
    initial_vector,
    parse_state,
    preparation_circuit,
    run_calibrate,
    run_evolve,
    run_matrix,
    run_point,
    run_table,
    time_grid,
)
from symtrotter.noise import NoiseModel


def small(**kw):
    base = dict(steps=(6,), backend="sampled-noisy", shots=1024, repeats=2, twirls=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_parse_state():
    assert parse_state("011") == ("011",)
    assert parse_state("110", "bit-major") == ("011",)
    assert parse_state("010+110") == ("010", "110")
    with pytest.raises(ConfigError):
        parse_state("01a")
    with pytest.raises(ConfigError):
        parse_state("01+110")


@pytest.mark.parametrize("spec", ["011", "000", "010+110", "011+111"])
def test_preparation_circuit(spec):
    labels = parse_state(spec)
    psi = apply(preparation_circuit(labels), initial_vector(["000"]))
    assert abs(np.vdot(psi.amplitudes, initial_vector(labels).amplitudes)) ** 2 == pytest.approx(1.0)


def test_preparation_rejects_far_pairs():
    with pytest.raises(ConfigError):
        preparation_circuit(("000", "011"))


@pytest.mark.parametrize(
    "kw",
    [
        {"strategy": "bogus"},
        {"steps": (0,)},
        {"backend": "quantum"},
        {"mitigation": "magic"},
        {"shots": 0},
        {"strategy": "shallow_shallow", "total_time": 1.0},
        {"strategy": "shallow_specific", "initial_state": "010+110"},
        {"strategy": "shallow_specific", "initial_state": "001"},
        {"initial_state": "0110"},
        {"endianness": "middle"},
        {"scales": (2.0, 3.0)},
        {"total_time": math.inf},
    ],
)
def test_config_errors(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_echo_is_plain_data():
    echo = ExperimentConfig().echo()
    assert echo["noise"] == NoiseModel.null().to_dict()
    assert small().echo()["noise"]["p2"] == 0.01
    assert echo["steps"] == [30]


def test_exact_state_periodic_returns_input_up_to_phase():
    psi = exact_state(("011",), math.pi)
    assert abs(np.vdot(psi.amplitudes, initial_vector(["011"]).amplitudes)) ** 2 == pytest.approx(1.0)


def test_analytic_point_matches_statevector():
    cfg = ExperimentConfig(strategy="general", steps=(12,))
    f, _ = run_point(cfg, 12, 0)
    assert f == pytest.approx(0.972637, abs=1e-6)


def test_sampled_noiseless_point_close_to_analytic():
    cfg = small(backend="sampled-noiseless", steps=(30,), shots=8192, repeats=1)
    f, _ = run_point(cfg, 30, 0)
    assert f == pytest.approx(0.9993, abs=0.03)


def test_noisy_point_deterministic_and_physical():
    cfg = small(mitigation="qrem+zne+twirl")
    a = run_point(cfg, 6, 0)
    b = run_point(cfg, 6, 0)
    assert a[0] == b[0] and a[1] == b[1]
    assert 0 <= a[0] <= 1
    assert run_point(cfg, 6, 1)[0] != a[0]


def test_matrix_shape_and_parallel_equivalence():
    cfg = small(steps=(4,))
    seq = run_matrix(cfg, ("general", "shallow_specific"), ("none", "qrem"))
    par = run_matrix(cfg, ("general", "shallow_specific"), ("none", "qrem"), workers=2)
    assert [(r.strategy, r.mitigation) for r in seq] == [
        ("general", "none"), ("general", "qrem"), ("shallow_specific", "none"), ("shallow_specific", "qrem")
    ]
    assert [r.fidelities for r in seq] == [r.fidelities for r in par]
    assert all(len(r.fidelities) == 2 for r in seq)


def test_table_needs_single_step():
    with pytest.raises(ConfigError):
        run_table(small(steps=(4, 5)))


def test_evolution_circuit_report():
    c, rep = evolution_circuit(ExperimentConfig(steps=(10,)), 10)
    assert rep["output_cnots"] == c.cnot_count() <= 5
    c2, rep2 = evolution_circuit(ExperimentConfig(steps=(10,), optimize=False), 10)
    assert rep2 == {} and c2.cnot_count() == 22


def test_time_grid():
    g = time_grid(math.pi)
    assert len(g) == 21 and g[0] == 0 and g[-1] == math.pi


def test_evolve_analytic_tracks_trotter():
    pts = run_evolve(ExperimentConfig(strategy="general", steps=(30,), initial_state="010+110"))
    assert len(pts) == 21
    assert pts[0].exact == pytest.approx(1.0)
    assert max(abs(p.mean - p.trotter) for p in pts) < 1e-12


def test_evolve_sampled_within_envelope():
    cfg = ExperimentConfig(strategy="general", steps=(30,), backend="sampled-noiseless", repeats=1)
    for p in run_evolve(cfg, points=6):
        sigma = math.sqrt(max(p.trotter * (1 - p.trotter), 1e-12) / cfg.shots)
        assert abs(p.mean - p.trotter) <= 3 * sigma + 1e-12


def test_evolve_rejections():
    with pytest.raises(ConfigError):
        run_evolve(ExperimentConfig(strategy="shallow_shallow"))
    with pytest.raises(ConfigError):
        run_evolve(small(mitigation="qrem+zne"))


def test_calibrate_limits():
    with pytest.raises(ConfigError):
        run_calibrate(NoiseModel.default(), 0, 10, 0)
    a = run_calibrate(NoiseModel.default(), 2, 2000, 0)
    assert a.matrix.shape == (4, 4)
