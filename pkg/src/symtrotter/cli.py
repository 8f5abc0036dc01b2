"""Command-line driver: ``symtrotter {evolve,sweep,table,calibrate,optimize}``."""
from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import report
from .circuit import Circuit, CircuitError, Gate, basis_label
from .experiments import (
    BACKENDS,
    MITIGATIONS,
    SWEEP_STEPS,
    TABLE_STRATEGIES,
    ConfigError,
    ExperimentConfig,
    run_calibrate,
    run_evolve,
    run_sweep,
    run_table,
)
from .mitigation import MitigationError
from .model import ModelError
from .noise import NoiseModel, NoiseModelError
from .synthesis import SynthesisError
from .tomography import TomographyError, all_paulis
from .transpile import DEFAULT_MAX_ROUNDS, optimize
from .trotter import STRATEGIES, PlanError, TrotterPlan, build_evolution

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_TIME_RE = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_time(text: str) -> float:
    """Float, or a multiple of pi such as ``pi``, ``2pi``, ``pi/2``, ``0.5*pi``."""
    m = _TIME_RE.match(text.lower())
    if m:
        coef = m.group(1)
        c = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
        div = float(m.group(2)) if m.group(2) else 1.0
        return c * math.pi / div
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse time {text!r}; use a number or a multiple of pi") from None


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"steps must be comma-separated integers, got {text!r}") from None
    if not out:
        raise ConfigError("empty steps list")
    return out


def parse_choices(text: str, allowed, what: str) -> tuple[str, ...]:
    out = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in out if s not in allowed]
    if bad or not out:
        raise ConfigError(f"unknown {what} {', '.join(bad) or text!r}; choose from {', '.join(allowed)}")
    return out


def _common(p: argparse.ArgumentParser, steps_default: str, backend_default: str, mitigation_default: str):
    p.add_argument("--strategy", default=None, help="strategy name (comma list for sweep/table)")
    p.add_argument("--steps", default=steps_default, help="Trotter step count(s), comma separated")
    p.add_argument("--time", default="pi", help="total evolution time; accepts pi multiples")
    p.add_argument("--initial-state", default="011", help="basis label, or two labels joined by '+'")
    p.add_argument("--backend", default=backend_default, choices=BACKENDS)
    p.add_argument("--noise", default=None, metavar="PATH", help="noise config (JSON or YAML)")
    p.add_argument("--mitigation", default=mitigation_default, help="mitigation combo (comma list for sweep/table)")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--repeats", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--twirls", type=int, default=16)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-optimize", action="store_true", help="skip the peephole optimizer")
    p.add_argument("--out", default="runs", metavar="DIR")
    p.add_argument("--endianness", default="site-major", choices=("site-major", "bit-major"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symtrotter", description="Symmetry-aware Trotter workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="initial-state return probability on a time grid")
    _common(p, "30", "analytic", "none")
    p.add_argument("--points", type=int, default=21)

    p = sub.add_parser("sweep", help="fidelity versus Trotter steps")
    _common(p, ",".join(map(str, SWEEP_STEPS)), "sampled-noisy", "qrem")

    p = sub.add_parser("table", help="strategy x mitigation fidelity table")
    _common(p, "100", "sampled-noisy", ",".join(MITIGATIONS))

    p = sub.add_parser("calibrate", help="readout assignment matrix")
    p.add_argument("--qubits", type=int, default=3)
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", default=None, metavar="PATH")
    p.add_argument("--backend", default="sampled-noisy", choices=BACKENDS)
    p.add_argument("--out", default="runs", metavar="DIR")
    p.add_argument("--endianness", default="site-major", choices=("site-major", "bit-major"))

    p = sub.add_parser("optimize", help="run the peephole optimizer on a circuit file or a built plan")
    p.add_argument("circuit", nargs="?", help="circuit text file; omitted means build from the plan flags")
    p.add_argument("--strategy", default="shallow_specific", choices=STRATEGIES)
    p.add_argument("--steps", default="30")
    p.add_argument("--time", default="pi")
    p.add_argument("--initial-state", default="011")
    p.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    p.add_argument("--out", default="runs", metavar="DIR")
    p.add_argument("--endianness", default="site-major", choices=("site-major", "bit-major"))
    return ap


def load_noise(path: str | None) -> tuple[NoiseModel, str]:
    if path is None:
        return NoiseModel.default(), "default"
    try:
        return NoiseModel.from_file(path), str(path)
    except OSError as exc:
        raise ConfigError(f"cannot read noise config {path}: {exc.strerror or exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad noise config {path}: {exc}") from exc
    except Exception as exc:  # yaml parse errors
        raise ConfigError(f"bad noise config {path}: {exc}") from exc


def make_config(args, strategy: str, mitigation: str) -> ExperimentConfig:
    noise, source = load_noise(args.noise)
    return ExperimentConfig(
        strategy=strategy,
        steps=parse_int_list(args.steps),
        total_time=parse_time(args.time),
        initial_state=args.initial_state,
        backend=args.backend,
        noise=noise,
        noise_source=source,
        mitigation=mitigation,
        shots=args.shots,
        repeats=args.repeats,
        seed=args.seed,
        twirls=args.twirls,
        endianness=args.endianness,
        optimize=not args.no_optimize,
    )


def _pauli_out(p: str, endianness: str) -> str:
    return p[::-1] if endianness == "bit-major" else p


def _results_rows(results):
    return [
        [r.strategy, r.mitigation, r.steps, r.mean, r.std] + [float(f) for f in r.fidelities]
        for r in results
    ]


def _expectation_rows(results, endianness: str):
    rows = []
    for r in results:
        for p in all_paulis(3):
            rows.append([r.strategy, r.mitigation, r.steps, _pauli_out(p, endianness), r.expectations[p]])
    return rows


def cmd_evolve(args) -> int:
    cfg = make_config(args, args.strategy or "general", args.mitigation)
    pts = run_evolve(cfg, args.points)
    echo = cfg.echo()
    out = Path(args.out)
    header = ["index", "time", "exact", "trotter", "simulated_mean", "simulated_std", "binomial_sigma"]
    rows = []
    for p in pts:
        sigma = math.sqrt(max(p.trotter * (1 - p.trotter), 0.0) / cfg.shots) if cfg.backend != "analytic" else 0.0
        rows.append([p.index, p.time, p.exact, p.trotter, p.mean, p.std, sigma])
    report.write(out / "evolve.csv", report.csv_text(header, rows, echo))
    series = {
        "exact": ([p.time for p in pts], [p.exact for p in pts]),
        f"simulated ({cfg.backend})": ([p.time for p in pts], [p.mean for p in pts]),
    }
    report.write(out / "evolve.svg", report.svg_line_chart(series, "Initial-state probability", "time", "probability", echo))
    dev = max(abs(p.mean - p.exact) for p in pts)
    print(f"evolve: {len(pts)} points, max |simulated - exact| = {dev:.3e}; wrote {out / 'evolve.csv'}")
    return EXIT_OK


def _write_matrix(kind: str, args, cfg, results) -> None:
    echo = cfg.echo()
    out = Path(args.out)
    n = max(len(r.fidelities) for r in results)
    header = ["strategy", "mitigation", "steps", "mean", "std"] + [f"repeat_{i}" for i in range(n)]
    report.write(out / f"{kind}.csv", report.csv_text(header, _results_rows(results), echo))
    report.write(
        out / f"{kind}_expectations.csv",
        report.csv_text(["strategy", "mitigation", "steps", "pauli_string", "value"], _expectation_rows(results, args.endianness), echo),
    )
    report.write(out / f"{kind}.json", report.json_text({"results": [r.to_dict() for r in results]}, echo))


def cmd_sweep(args) -> int:
    strategies = parse_choices(args.strategy or "shallow_specific", STRATEGIES, "strategy")
    mitigations = parse_choices(args.mitigation, MITIGATIONS, "mitigation")
    cfg = make_config(args, strategies[0], mitigations[0])
    results = run_sweep(cfg, strategies, mitigations, args.jobs)
    _write_matrix("sweep", args, cfg, results)
    series = {}
    for r in results:
        xs, ys = series.setdefault(f"{r.strategy} / {r.mitigation}", ([], []))
        xs.append(r.steps)
        ys.append(r.mean)
    report.write(Path(args.out) / "sweep.svg", report.svg_line_chart(series, "Fidelity vs Trotter steps", "steps", "fidelity", cfg.echo()))
    for r in results:
        print(f"{r.strategy:17s} {r.mitigation:15s} n={r.steps:<4d} F = {r.mean:.4f} +/- {r.std:.4f}")
    return EXIT_OK


def cmd_table(args) -> int:
    strategies = parse_choices(args.strategy or ",".join(TABLE_STRATEGIES), STRATEGIES, "strategy")
    mitigations = parse_choices(args.mitigation, MITIGATIONS, "mitigation")
    cfg = make_config(args, strategies[0], mitigations[0])
    results = run_table(cfg, strategies, mitigations, args.jobs)
    _write_matrix("table", args, cfg, results)
    rows = [[r.strategy, r.mitigation, f"{r.mean:.4f} +/- {r.std:.4f}"] for r in results]
    text = report.aligned_table(rows, ["strategy", "mitigation", "fidelity"])
    report.write(Path(args.out) / "table.txt", report.config_line(cfg.echo()) + "\n" + text)
    print(text, end="")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    noise, source = load_noise(args.noise)
    if args.backend != "sampled-noisy":
        noise = NoiseModel.null()
    a = run_calibrate(noise, args.qubits, args.shots, args.seed)
    echo = {"command": "calibrate", "qubits": args.qubits, "shots": args.shots, "seed": args.seed,
            "backend": args.backend, "noise": noise.to_dict(), "noise_source": source,
            "endianness": args.endianness}
    n = args.qubits
    m = a.matrix
    labels = [basis_label(i, n) for i in range(2 ** n)]
    if args.endianness == "bit-major":
        perm = [int(lab[::-1], 2) for lab in labels]
        m = m[np.ix_(perm, perm)]
    header = ["measured\\prepared"] + labels
    rows = [[lab] + [float(v) for v in row] for lab, row in zip(labels, m)]
    out = Path(args.out)
    report.write(out / "assignment.csv", report.csv_text(header, rows, echo))
    report.write(out / "assignment.json", report.json_text({"condition_number": a.condition_number}, echo))
    print(f"assignment matrix {2 ** n}x{2 ** n}, condition number {a.condition_number:.6f}; wrote {out / 'assignment.csv'}")
    return EXIT_OK


def _flip_qubits(c: Circuit) -> Circuit:
    n = c.width
    return c.with_gates(Gate(g.kind, tuple(n - 1 - q for q in g.qubits), g.angle) for g in c.gates)


def cmd_optimize(args) -> int:
    if args.circuit:
        try:
            text = Path(args.circuit).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read circuit {args.circuit}: {exc.strerror or exc}") from exc
        c = Circuit.from_text(text)
        if args.endianness == "bit-major":
            c = _flip_qubits(c)
        source = str(args.circuit)
    else:
        steps = parse_int_list(args.steps)
        if len(steps) != 1:
            raise ConfigError("optimize builds one circuit; pass a single step count")
        label = args.initial_state[::-1] if args.endianness == "bit-major" else args.initial_state
        c = build_evolution(TrotterPlan(steps[0], parse_time(args.time), args.strategy, 3, label))
        source = f"{args.strategy} steps={steps[0]} time={args.time}"
    if args.max_rounds < 1:
        raise ConfigError("--max-rounds must be >= 1")
    opt, rep = optimize(c, args.max_rounds)
    if args.endianness == "bit-major":
        opt = _flip_qubits(opt)
    out = Path(args.out)
    report.write(out / "optimized.txt", f"# source: {source}\n" + opt.to_text())
    print(rep.to_json())
    return EXIT_OK


_COMMANDS = {
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "table": cmd_table,
    "calibrate": cmd_calibrate,
    "optimize": cmd_optimize,
}

_NUMERIC = (MitigationError, TomographyError, SynthesisError, np.linalg.LinAlgError, FloatingPointError)
_CONFIG = (ConfigError, PlanError, CircuitError, NoiseModelError, ModelError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _NUMERIC as exc:
        print(f"symtrotter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _CONFIG as exc:
        print(f"symtrotter: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
