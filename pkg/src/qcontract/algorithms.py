"""Contract-annotated builders for three standard algorithms: the
Hadamard test, the quantum Fourier transform, and quantum phase
estimation.

Each builder attaches the conditions that pin down what the circuit is
supposed to compute, so any change to the construction (a wrong gate, a
broken rewrite, a misordered ladder) surfaces as a tagged violation at
run time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gates
from .contracts import ContractCircuit, MeasuredCircuit
from .decompose import decompose_controlled
from .errors import BuildError
from .expressions import (
    FromVector,
    GateOp,
    MatrixOp,
    One,
    OperatorExpr,
    Zero,
    eq_state,
    eval_operator,
    expectation,
    partial_state,
)
from .gates import GateSpec
from .numerics import StateVector
from .simulator import Counts


def hadamard_test_circuit(ugate: GateSpec, op) -> ContractCircuit:
    """Interference circuit estimating Re<psi|U|psi> via an ancilla.

    ``ugate`` is the gate under test; ``op`` is the operator expression
    the gate is *supposed* to implement. The returned 2-qubit circuit
    applies H - controlled-U (rewritten into the {h, rx, rz, cx} basis)
    - H, with the ancilla on qubit 0, and carries the condition
    "condition1": the post state must equal
    ((psi + U psi)/2) ^ |0> + ((psi - U psi)/2) ^ |1> for psi the
    pre-state of qubit 1. A mismatch between gate and operator is
    exactly what the condition detects.
    """
    if ugate.arity != 1:
        raise BuildError(f"gate under test must act on 1 qubit, got arity {ugate.arity}")
    op_matrix = eval_operator(op)
    if op_matrix.shape != (2, 2):
        raise BuildError("reference operator must be 2x2")

    circ = ContractCircuit(ugate.arity + 1)
    circ.append(gates.h(), [0])
    circ.append(decompose_controlled(ugate.matrix).as_circuit(), [0, 1])
    circ.append(gates.h(), [0])

    if isinstance(op, OperatorExpr):
        u_expr = op
    elif isinstance(op, GateSpec):
        u_expr = GateOp(op)
    else:
        u_expr = MatrixOp(op_matrix)

    def condition(pre_state: StateVector, post_state: StateVector) -> bool:
        psi = FromVector(partial_state(pre_state, range(1, circ.size)))
        u_psi = u_expr @ psi
        expected = ((psi + u_psi) / 2 ^ Zero) + ((psi - u_psi) / 2 ^ One)
        return eq_state(post_state, expected)

    circ.add_condition("condition1", condition)
    return circ


def hadamard_test_pipeline(ugate: GateSpec, op, prep: ContractCircuit | None = None,
                           abs_tol: float = 0.01) -> MeasuredCircuit:
    """Full estimation pipeline: state prep, nested Hadamard test,
    ancilla measurement, and the statistical contract.

    ``prep`` is a 1-qubit circuit preparing the probe state (default H,
    i.e. |+>). The measurement condition "condition2" checks that the
    sampled estimate lies within ``abs_tol`` of the exact expectation.
    """
    if prep is None:
        prep = ContractCircuit(1)
        prep.append(gates.h(), [0])
    if prep.size != 1:
        raise BuildError("state preparation must act on 1 qubit")

    inner_test = hadamard_test_circuit(ugate, op)
    circ = ContractCircuit(2)
    circ.append(prep, [1])
    circ.append(inner_test, [0, 1])

    psi = prep.run()
    actual = expectation(psi, op).real

    measured = circ.measure([0], postprocess=estimate_real_expectation)

    def measure_condition(pre_measure_state: StateVector, counts: Counts, estimate: float) -> bool:
        return math.isclose(actual, estimate, abs_tol=abs_tol)

    measured.add_condition("condition2", measure_condition)
    return measured


def estimate_real_expectation(counts: Counts) -> float:
    """(N0 - N1) / (N0 + N1) over single-qubit counts; absent outcomes
    read as zero."""
    if any(len(key) != 1 for key in counts.keys()):
        raise ValueError("counts must cover exactly one qubit")
    n0 = counts["0"]
    n1 = counts["1"]
    total = n0 + n1
    if total == 0:
        raise ValueError("no outcomes recorded")
    return (n0 - n1) / total


def _qft_gate_run(n: int) -> list[tuple[GateSpec, tuple[int, ...]]]:
    """H + controlled-phase ladder + reversal swaps for the transform
    with matrix entries w^{jk}/sqrt(2^n), w = exp(2 pi i / 2^n)."""
    run: list[tuple[GateSpec, tuple[int, ...]]] = []
    for q in reversed(range(n)):
        run.append((gates.h(), (q,)))
        for p in reversed(range(q)):
            run.append((gates.controlled(gates.p(math.pi / (1 << (q - p)))), (p, q)))
    for lo in range(n // 2):
        run.append((gates.swap(), (lo, n - 1 - lo)))
    return run


def dft_matrix(n: int) -> np.ndarray:
    """The transform's defining matrix, built directly from its formula."""
    dim = 1 << n
    omega = np.exp(2j * np.pi / dim)
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return omega ** (j * k) / math.sqrt(dim)


def qft_circuit(n: int) -> ContractCircuit:
    """Fourier-transform circuit whose unitary equals :func:`dft_matrix`
    exactly (reversal swaps included, no implicit bit order).

    Carries the condition "qft_spec": post == F . pre, evaluated with an
    FFT so the check stays independent of the gate ladder.
    """
    if not 1 <= n <= 12:
        raise BuildError(f"qubit count must be in 1..12, got {n}")
    circ = ContractCircuit(n)
    for gate, qubits in _qft_gate_run(n):
        circ.append(gate, qubits)

    def qft_spec(pre_state: StateVector, post_state: StateVector) -> bool:
        expected = StateVector(np.fft.ifft(pre_state.amps) * math.sqrt(len(pre_state)), copy=False)
        return eq_state(post_state, expected)

    circ.add_condition("qft_spec", qft_spec)
    return circ


def inverse_qft_circuit(n: int) -> ContractCircuit:
    """Adjoint of the transform circuit: same gates, reversed, adjointed.

    Condition-free; used as a component inside phase estimation."""
    circ = ContractCircuit(n)
    for gate, qubits in reversed(_qft_gate_run(n)):
        circ.append(gates.adjoint(gate), qubits)
    return circ


@dataclass(frozen=True)
class PhaseEstimate:
    """Decoded phase readout: phase = int(mode_bitstring, 2) / 2^num_bits."""

    phase: float
    num_bits: int
    mode_bitstring: str

    def __str__(self) -> str:
        return f"phase {self.phase} (mode {self.mode_bitstring!r})"


def decode_phase(counts: Counts) -> PhaseEstimate:
    """Most frequent outcome as a binary fraction; ties break toward the
    lexicographically smallest bitstring."""
    best = max(counts.items(), key=lambda kv: (kv[1], [-ord(c) for c in kv[0]]))
    mode = best[0]
    return PhaseEstimate(int(mode, 2) / (1 << len(mode)), len(mode), mode)


def circular_distance(a: float, b: float) -> float:
    """Distance between phases that wrap at 1."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def qpe_circuit(ugate: GateSpec, eigenprep: ContractCircuit, m: int,
                known_phase: float | None = None) -> MeasuredCircuit:
    """Phase estimation with ``m`` counting qubits (0..m-1) and the
    target on qubit m.

    ``eigenprep`` prepares the target from |0>. Controlled powers
    U^(2^j) are computed by repeated matrix squaring then rewritten into
    the basis, keeping depth polynomial in ``m``. Counting qubits are
    measured most significant first, so the outcome key reads directly
    as a binary fraction. When ``known_phase`` is given, the measurement
    condition "phase_close" requires the decoded phase to be within
    1/2^m of it (circularly).
    """
    if not 1 <= m <= 10:
        raise BuildError(f"counting-qubit count must be in 1..10, got {m}")
    if ugate.arity != 1:
        raise BuildError(f"estimated gate must act on 1 qubit, got arity {ugate.arity}")
    if eigenprep.size != 1:
        raise BuildError("eigenstate preparation must act on 1 qubit")

    circ = ContractCircuit(m + 1)
    circ.append(eigenprep, [m])
    for j in range(m):
        circ.append(gates.h(), [j])
    power = ugate.matrix
    for j in range(m):
        circ.append(decompose_controlled(power).as_circuit(), [j, m])
        power = power @ power
    circ.append(inverse_qft_circuit(m), list(range(m)))

    measured = circ.measure(list(reversed(range(m))), postprocess=decode_phase)

    if known_phase is not None:
        target = float(known_phase) % 1.0
        resolution = 1.0 / (1 << m)

        def phase_close(pre_measure_state: StateVector, counts: Counts,
                        estimate: PhaseEstimate) -> bool:
            return circular_distance(estimate.phase, target) <= resolution

        measured.add_condition("phase_close", phase_close)
    return measured
