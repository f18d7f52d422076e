"""Command-line entry point.

Exit codes: 0 all contracts passed, 1 contract violation, 2 usage,
parse, or build error. Diagnostics go to stderr, results to stdout.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import algorithms, gates
from .contracts import ContractCircuit, GateInstruction, MeasuredCircuit
from .decompose import decompose_circuit
from .dsl import DslError, elaborate, parse_file
from .errors import BuildError, ContractViolation, UnsupportedGateError
from .expressions import DEFAULT_EQ_TOL, GateOp
from .numerics import StateVector
from .simulator import Counts

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _load(path: str, tolerance: float):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None
    try:
        return elaborate(parse_file(source), eq_tol=tolerance)
    except DslError as exc:
        print(f"{path}:{exc.span}: error: {exc.message}", file=sys.stderr)
        return None


def _report_violation(exc: ContractViolation) -> None:
    print(f"{type(exc).__name__}: {exc}", file=sys.stderr)


def _print_value(value) -> None:
    if isinstance(value, Counts):
        body = ", ".join(f"{key!r}: {count}" for key, count in value.items())
        print("{" + body + "}")
    elif isinstance(value, algorithms.PhaseEstimate):
        print(value)
    else:
        print(value)


def cmd_run(args) -> int:
    runnable = _load(args.path, args.tolerance)
    if runnable is None:
        return EXIT_USAGE
    try:
        if isinstance(runnable, MeasuredCircuit):
            shots = args.shots if args.shots is not None else runnable.default_shots
            value, _counts = runnable.run(shots=shots, seed=args.seed)
            _print_value(value)
        else:
            runnable.run()
            print("all contracts passed")
    except BuildError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolation as exc:
        _report_violation(exc)
        return EXIT_VIOLATION
    return EXIT_OK


def _example_hadamard_test(shots: int, seed: int) -> None:
    pipeline = algorithms.hadamard_test_pipeline(gates.t(), GateOp(gates.t()))
    value, _ = pipeline.run(shots=shots, seed=seed)
    print(value)


def _example_qft(shots: int, seed: int) -> None:
    circuit = algorithms.qft_circuit(3)
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    initial = StateVector(amps / np.linalg.norm(amps))
    circuit.run(initial)
    print("all contracts passed")


def _example_qpe(shots: int, seed: int) -> None:
    prep = ContractCircuit(1)
    prep.append(gates.x(), [0])
    pipeline = algorithms.qpe_circuit(gates.t(), prep, 3, known_phase=1 / 8)
    estimate, _ = pipeline.run(shots=shots, seed=seed)
    print(estimate)


_EXAMPLES = {
    "hadamard-test": _example_hadamard_test,
    "qft": _example_qft,
    "qpe": _example_qpe,
}


def cmd_example(args) -> int:
    runner = _EXAMPLES.get(args.name)
    if runner is None:
        print(f"error: unknown example {args.name!r} (choose from {sorted(_EXAMPLES)})",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        runner(args.shots if args.shots is not None else 100_000, args.seed)
    except ContractViolation as exc:
        _report_violation(exc)
        return EXIT_VIOLATION
    return EXIT_OK


def _circuit_unitary(circuit: ContractCircuit) -> np.ndarray:
    dim = 1 << circuit.size
    columns = []
    flat = circuit.flattened()
    for index in range(dim):
        columns.append(flat.run(StateVector.basis(circuit.size, index)).amps)
    return np.stack(columns, axis=1)


def cmd_decompose(args) -> int:
    basis = [name.strip() for name in args.basis.split(",") if name.strip()]
    runnable = _load(args.path, args.tolerance)
    if runnable is None:
        return EXIT_USAGE
    circuit = runnable.circuit if isinstance(runnable, MeasuredCircuit) else runnable
    try:
        rewritten = decompose_circuit(circuit, basis)
    except UnsupportedGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for inst in rewritten.flattened().instructions:
        assert isinstance(inst, GateInstruction)
        print(f"{inst.gate!r} " + " ".join(str(q) for q in inst.qubits))
    original = _circuit_unitary(circuit)
    redone = _circuit_unitary(rewritten)
    # Align the one free global phase before comparing.
    ref = np.unravel_index(np.argmax(np.abs(original)), original.shape)
    phase = original[ref] / redone[ref] if abs(redone[ref]) > 1e-12 else 1.0
    phase /= abs(phase)
    residual = float(np.max(np.abs(redone * phase - original)))
    print(f"residual {residual:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcontract",
        description="Run circuit files with contracts on the built-in simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="parse, build, and run a .qc file")
    run_p.add_argument("path")
    run_p.add_argument("--shots", type=int, default=None,
                       help="override the file's declared shot count")
    run_p.add_argument("--seed", type=int, default=1)
    run_p.add_argument("--tolerance", type=float, default=DEFAULT_EQ_TOL,
                       help="state-equality tolerance for declarative asserts")
    run_p.set_defaults(func=cmd_run)

    ex_p = sub.add_parser("example", help="run a built-in example")
    ex_p.add_argument("name")
    ex_p.add_argument("--shots", type=int, default=None)
    ex_p.add_argument("--seed", type=int, default=1)
    ex_p.set_defaults(func=cmd_example)

    dec_p = sub.add_parser("decompose", help="rewrite a file's gates into a basis")
    dec_p.add_argument("path")
    dec_p.add_argument("--basis", default="h,rx,rz,cx")
    dec_p.add_argument("--tolerance", type=float, default=DEFAULT_EQ_TOL)
    dec_p.set_defaults(func=cmd_decompose)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
