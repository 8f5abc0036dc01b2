"""Symmetry-aware Trotterization of the three-site Heisenberg chain."""
from .circuit import Circuit, DensityMatrix, Gate, StateVector, apply, evolve_density, unitary_of
from .experiments import ExperimentConfig, run_evolve, run_sweep, run_table
from .kernels import BACKEND
from .model import build_encoder_3, build_heisenberg, effective_hamiltonian_3
from .noise import NoiseModel, twirl
from .transpile import optimize
from .trotter import STRATEGIES, TrotterPlan, build_evolution

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Circuit",
    "DensityMatrix",
    "ExperimentConfig",
    "Gate",
    "NoiseModel",
    "STRATEGIES",
    "StateVector",
    "TrotterPlan",
    "apply",
    "build_encoder_3",
    "build_evolution",
    "build_heisenberg",
    "effective_hamiltonian_3",
    "evolve_density",
    "optimize",
    "run_evolve",
    "run_sweep",
    "run_table",
    "twirl",
    "unitary_of",
]
