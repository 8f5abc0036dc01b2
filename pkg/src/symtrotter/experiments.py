"""Experiment orchestration: configuration, the noisy tomography pipeline,
and the evolve / sweep / table / calibrate drivers."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .circuit import (
    Circuit,
    DensityMatrix,
    StateVector,
    basis_index,
    evolve_density,
    flip_label,
    h,
    make_rng,
    sample_distribution,
    x,
)
from .mitigation import AssignmentMatrix, ZneSchedule, calibrate, extrapolate, fold, mitigate_counts
from .model import build_heisenberg
from .noise import NoiseModel, twirl, DEFAULT_TWIRLS
from .numerics import expm_hermitian
from .tomography import (
    ExpectationTable,
    all_paulis,
    all_settings,
    basis_change,
    estimate_expectations,
    exact_expectations,
    fidelity,
    project_mle,
    reconstruct_linear,
)
from .transpile import optimize
from .trotter import STRATEGIES, PlanError, TrotterPlan, build_evolution, is_period_multiple

BACKENDS = ("analytic", "sampled-noiseless", "sampled-noisy")
MITIGATIONS = ("none", "qrem", "qrem+zne", "qrem+zne+twirl")
TABLE_STRATEGIES = ("general", "shallow_specific", "shallow_shallow")
SWEEP_STEPS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 40)
TIME_GRID_POINTS = 21


class ConfigError(ValueError):
    pass


def parse_state(spec: str, endianness: str = "site-major") -> tuple[str, ...]:
    """``"011"`` or ``"010+110"``; labels are returned site-major."""
    labels = tuple(s.strip() for s in spec.split("+"))
    for lab in labels:
        if not lab or set(lab) - set("01"):
            raise ConfigError(f"bad basis label {lab!r} in initial state {spec!r}")
    if len({len(lab) for lab in labels}) != 1 or len(set(labels)) != len(labels):
        raise ConfigError(f"initial state {spec!r} must list distinct labels of equal length")
    if endianness == "bit-major":
        labels = tuple(flip_label(lab) for lab in labels)
    return labels


def initial_vector(labels: Sequence[str]) -> StateVector:
    return StateVector.superposition(list(labels)) if len(labels) > 1 else StateVector.from_label(labels[0])


def preparation_circuit(labels: Sequence[str]) -> Circuit:
    """X/H circuit preparing a basis state or an equal pair differing in one bit."""
    n = len(labels[0])
    if len(labels) == 1:
        return Circuit(n, [x(q) for q, b in enumerate(labels[0]) if b == "1"])
    if len(labels) == 2:
        a, b = labels
        diff = [q for q in range(n) if a[q] != b[q]]
        if len(diff) == 1:
            d = diff[0]
            return Circuit(n, [h(d)] + [x(q) for q in range(n) if q != d and a[q] == "1"])
    raise ConfigError("only basis states and pairs differing in one site can be prepared by a circuit")


@dataclass(frozen=True)
class ExperimentConfig:
    strategy: str = "shallow_specific"
    steps: tuple[int, ...] = (30,)
    total_time: float = math.pi
    initial_state: str = "011"
    backend: str = "analytic"
    noise: NoiseModel = field(default_factory=NoiseModel.default)
    noise_source: str = "default"
    mitigation: str = "none"
    shots: int = 8192
    repeats: int = 8
    seed: int = 0
    twirls: int = DEFAULT_TWIRLS
    endianness: str = "site-major"
    optimize: bool = True
    scales: tuple[float, ...] = (1.0, 2.0, 3.0)

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if not steps or any(s < 1 for s in steps):
            raise ConfigError("steps must be positive integers")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")
        if self.mitigation not in MITIGATIONS:
            raise ConfigError(f"unknown mitigation {self.mitigation!r}; choose from {', '.join(MITIGATIONS)}")
        if self.shots < 1 or self.repeats < 1 or self.twirls < 1:
            raise ConfigError("shots, repeats and twirls must be >= 1")
        if self.endianness not in ("site-major", "bit-major"):
            raise ConfigError(f"unknown endianness {self.endianness!r}")
        if not math.isfinite(self.total_time):
            raise ConfigError("time must be finite")
        if self.strategy == "shallow_shallow" and not is_period_multiple(self.total_time):
            raise ConfigError(f"shallow_shallow requires a time in pi*Z, got {self.total_time!r}")
        labels = parse_state(self.initial_state, self.endianness)
        if len(labels[0]) != 3:
            raise ConfigError("the initial state must have three sites")
        if self.strategy.startswith("shallow") and len(labels) != 1:
            raise ConfigError(f"{self.strategy} requires a computational-basis initial state")
        try:
            ZneSchedule(self.scales)
            self.plan(steps[0])
        except (PlanError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def labels(self) -> tuple[str, ...]:
        return parse_state(self.initial_state, self.endianness)

    def plan(self, steps: int, total_time: float | None = None) -> TrotterPlan:
        labels = self.labels
        label = labels[0] if len(labels) == 1 else None
        t = self.total_time if total_time is None else total_time
        return TrotterPlan(steps, t, self.strategy, 3, label)

    @property
    def noise_model(self) -> NoiseModel:
        return self.noise if self.backend == "sampled-noisy" else NoiseModel.null()

    def echo(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "noise"}
        d["steps"] = list(self.steps)
        d["scales"] = list(self.scales)
        d["noise"] = self.noise_model.to_dict()
        return d


@dataclass
class ExperimentResult:
    config: dict
    strategy: str
    steps: int
    mitigation: str
    fidelities: list[float]
    expectations: dict[str, float]
    pass_report: dict

    @property
    def mean(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def std(self) -> float:
        return float(np.std(self.fidelities, ddof=1)) if len(self.fidelities) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "steps": self.steps,
            "mitigation": self.mitigation,
            "fidelities": self.fidelities,
            "mean": self.mean,
            "std": self.std,
            "expectations": self.expectations,
            "pass_report": self.pass_report,
        }


def exact_state(labels: Sequence[str], t: float) -> StateVector:
    psi = initial_vector(labels)
    u = expm_hermitian(build_heisenberg(len(labels[0])).to_matrix(), -1j * t)
    v = u @ psi.amplitudes
    return StateVector(v / np.linalg.norm(v))


def evolution_circuit(cfg: ExperimentConfig, steps: int, t: float | None = None):
    c = build_evolution(cfg.plan(steps, t))
    if cfg.optimize:
        c, report = optimize(c)
        return c, asdict(report)
    return c, {}


def _job_seeds(cfg: ExperimentConfig, steps: int, repeat: int):
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(steps, repeat))
    cal, tw, samp = ss.spawn(3)
    return int(cal.generate_state(1)[0]), int(tw.generate_state(1)[0]), np.random.Generator(np.random.PCG64(samp))


def _setting_probabilities(rho: DensityMatrix, noise: NoiseModel) -> dict[str, np.ndarray]:
    out = {}
    gate_noise = noise.without_readout()
    for s in all_settings(rho.width):
        out[s] = evolve_density(basis_change(s), rho, gate_noise).probabilities()
    return out


def _split_shots(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def run_point(cfg: ExperimentConfig, steps: int, repeat: int, circuit: Circuit | None = None) -> tuple[float, dict]:
    """One tomography-scored run; returns the fidelity and the Pauli table used."""
    labels = cfg.labels
    target = exact_state(labels, cfg.total_time)
    if circuit is None:
        circuit, _ = evolution_circuit(cfg, steps)
    rho0 = DensityMatrix.from_statevector(initial_vector(labels))
    noise = cfg.noise_model
    if cfg.backend == "analytic":
        rho = evolve_density(circuit, rho0)
        table = exact_expectations(rho)
        est = project_mle(reconstruct_linear(table))
        return fidelity(est, target), table.values
    # mitigation is a no-op on the exact backend
    cal_seed, twirl_seed, rng = _job_seeds(cfg, steps, repeat)
    assign: AssignmentMatrix | None = None
    if cfg.mitigation != "none":
        assign = calibrate(noise, 3, cfg.shots, cal_seed)
    scales = cfg.scales if "zne" in cfg.mitigation else (1.0,)
    tables = []
    for scale in scales:
        folded = fold(circuit, scale)
        members = twirl(folded, cfg.twirls, twirl_seed).circuits if "twirl" in cfg.mitigation else (folded,)
        shot_split = _split_shots(cfg.shots, len(members))
        counts_by_setting: dict[str, np.ndarray] = {s: np.zeros(8) for s in all_settings(3)}
        for member, shots in zip(members, shot_split):
            if shots == 0:
                continue
            rho = evolve_density(member, rho0, noise.without_readout())
            for s, probs in _setting_probabilities(rho, noise).items():
                hist = sample_distribution(probs, shots, noise, rng)
                for lab, k in hist.items():
                    counts_by_setting[s][basis_index(lab)] += k
        dists = {}
        for s, cnt in counts_by_setting.items():
            p = cnt / cnt.sum()
            dists[s] = mitigate_counts(assign, p) if assign is not None else p
        tables.append(estimate_expectations(dists, 3, cfg.shots, scale))
    if len(tables) == 1:
        values = tables[0].values
    else:
        sched = ZneSchedule(scales)
        values = {p: extrapolate(sched, [t.values[p] for t in tables]) for p in all_paulis(3)}
    est = project_mle(reconstruct_linear(ExpectationTable(3, dict(values), cfg.shots)))
    return fidelity(est, target), values


# --- drivers ---------------------------------------------------------------

def _run_job(args):
    cfg, steps, repeat, circuit = args
    return run_point(cfg, steps, repeat, circuit)


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_matrix(
    cfg: ExperimentConfig,
    strategies: Sequence[str] | None = None,
    mitigations: Sequence[str] | None = None,
    workers: int = 1,
) -> list[ExperimentResult]:
    """Fidelity for every (steps, strategy, mitigation) cell, ordered by that key."""
    strategies = tuple(strategies or (cfg.strategy,))
    mitigations = tuple(mitigations or (cfg.mitigation,))
    cells = []
    jobs = []
    for steps in cfg.steps:
        for strat in strategies:
            try:
                sub = replace(cfg, strategy=strat)
            except ConfigError as exc:
                raise ConfigError(f"{strat}: {exc}") from exc
            circuit, report = evolution_circuit(sub, steps)
            for mit in mitigations:
                cell_cfg = replace(sub, mitigation=mit)
                cells.append((cell_cfg, steps, report))
                jobs.extend((cell_cfg, steps, r, circuit) for r in range(cfg.repeats))
    outcomes = _map(_run_job, jobs, workers)
    results = []
    for i, (cell_cfg, steps, report) in enumerate(cells):
        chunk = outcomes[i * cfg.repeats:(i + 1) * cfg.repeats]
        fids = [f for f, _ in chunk]
        mean_exp = {p: float(np.mean([v[p] for _, v in chunk])) for p in all_paulis(3)}
        results.append(
            ExperimentResult(cell_cfg.echo(), cell_cfg.strategy, steps, cell_cfg.mitigation, fids, mean_exp, report)
        )
    return results


def run_sweep(cfg, strategies=None, mitigations=None, workers: int = 1) -> list[ExperimentResult]:
    return run_matrix(cfg, strategies, mitigations, workers)


def run_table(cfg, strategies=TABLE_STRATEGIES, mitigations=MITIGATIONS, workers: int = 1) -> list[ExperimentResult]:
    if len(cfg.steps) != 1:
        raise ConfigError("the table uses a single step count")
    return run_matrix(cfg, strategies, mitigations, workers)


@dataclass
class EvolvePoint:
    index: int
    time: float
    exact: float
    trotter: float
    simulated: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.simulated))

    @property
    def std(self) -> float:
        return float(np.std(self.simulated, ddof=1)) if len(self.simulated) > 1 else 0.0


def time_grid(total_time: float, points: int = TIME_GRID_POINTS) -> list[float]:
    return [total_time * k / (points - 1) for k in range(points)]


def run_evolve(cfg: ExperimentConfig, points: int = TIME_GRID_POINTS) -> list[EvolvePoint]:
    """Return probability of the initial state along a time grid, simulated and exact."""
    if cfg.strategy == "shallow_shallow":
        raise ConfigError("shallow_shallow is only exact at t in pi*Z; pick another strategy for a time curve")
    if "zne" in cfg.mitigation:
        raise ConfigError("evolve supports --mitigation none or qrem")
    labels = cfg.labels
    psi0 = initial_vector(labels)
    undo = preparation_circuit(labels).inverse()
    steps = cfg.steps[0]
    noise = cfg.noise_model
    out = []
    for k, t in enumerate(time_grid(cfg.total_time, points)):
        exact = abs(np.vdot(psi0.amplitudes, exact_state(labels, t).amplitudes)) ** 2
        c, _ = evolution_circuit(cfg, steps, t)
        rho0 = DensityMatrix.from_statevector(psi0)
        trotter = float(np.real(np.vdot(psi0.amplitudes, evolve_density(c, rho0).matrix @ psi0.amplitudes)))
        sims = []
        if cfg.backend == "analytic":
            sims.append(trotter)
        else:
            rho = evolve_density(c + undo, rho0, noise.without_readout())
            for r in range(cfg.repeats):
                cal_seed, _, rng = _job_seeds(cfg, k, r)
                counts = sample_distribution(rho.probabilities(), cfg.shots, noise, rng)
                p = np.zeros(8)
                for lab, n in counts.items():
                    p[basis_index(lab)] = n / cfg.shots
                if cfg.mitigation == "qrem":
                    p = mitigate_counts(calibrate(noise, 3, cfg.shots, cal_seed), p)
                sims.append(float(p[0]))
        out.append(EvolvePoint(k, t, float(exact), trotter, sims))
    return out


def run_calibrate(noise: NoiseModel, n_qubits: int, shots: int, seed: int) -> AssignmentMatrix:
    if n_qubits < 1 or n_qubits > 8:
        raise ConfigError("calibration supports 1 to 8 qubits")
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    return calibrate(noise, n_qubits, shots, seed)
