"""Rewriting gates into the {h, rx, rz, cx} basis.

Single-qubit unitaries go through ZYZ Euler angles; controlled
single-qubit unitaries through the two-CNOT ABC construction. The
global phase is tracked explicitly so the rewritten sequence times
e^{i*global_phase} reproduces the source matrix exactly, not merely up
to an unknown scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gates
from .errors import UnsupportedGateError
from .gates import GateSpec
from .numerics import require_unitary

REQUIRED_BASIS = frozenset({"h", "rx", "rz", "cx"})

_ANGLE_EPS = 1e-12


@dataclass
class DecomposedSequence:
    """Ordered basis-gate list plus the phase the rewrite factored out."""

    gates: list[tuple[GateSpec, tuple[int, ...]]] = field(default_factory=list)
    global_phase: float = 0.0
    num_qubits: int = 1

    def matrix(self) -> np.ndarray:
        """Multiply the sequence back out, including the global phase.

        Sequence indices are argument positions (0 = control for
        controlled rewrites); the result uses the same convention as
        gate matrices, argument 0 on the most significant index bit.
        """
        dim = 1 << self.num_qubits
        total = np.eye(dim, dtype=np.complex128)
        for gate, qubits in self.gates:
            register = tuple(self.num_qubits - 1 - q for q in qubits)
            total = _embed(gate.matrix, register, self.num_qubits) @ total
        return np.exp(1j * self.global_phase) * total

    def as_circuit(self):
        """The same instruction list as a condition-free circuit."""
        from .contracts import ContractCircuit

        circ = ContractCircuit(self.num_qubits)
        for gate, qubits in self.gates:
            circ.append(gate, list(qubits))
        return circ


def _embed(matrix: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Full 2^n matrix acting as ``matrix`` on ``qubits`` (test-scale only)."""
    k = len(qubits)
    dim = 1 << n
    g = matrix.reshape([2] * (2 * k))
    out = np.zeros((dim, dim), dtype=np.complex128)
    axes = [n - 1 - q for q in qubits]
    for col in range(dim):
        vec = np.zeros(dim, dtype=np.complex128)
        vec[col] = 1.0
        t = np.tensordot(g, vec.reshape([2] * n), axes=(list(range(k, 2 * k)), axes))
        out[:, col] = np.moveaxis(t, range(k), axes).reshape(-1)
    return out


def zyz_angles(matrix: np.ndarray) -> tuple[float, float, float, float]:
    """Euler angles (alpha, beta, gamma, delta) with
    U = e^{i alpha} RZ(beta) RY(gamma) RZ(delta), gamma in [0, pi].

    For diagonal inputs (gamma ~ 0) the split is canonicalized to
    beta = 0.
    """
    u = require_unitary(matrix)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    alpha = 0.5 * math.atan2(np.linalg.det(u).imag, np.linalg.det(u).real)
    v = np.exp(-1j * alpha) * u
    gamma = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if gamma < _ANGLE_EPS:
        beta = 0.0
        delta = -2.0 * float(np.angle(v[0, 0]))
        gamma = 0.0
    elif math.pi - gamma < _ANGLE_EPS:
        beta = 2.0 * float(np.angle(v[1, 0]))
        delta = 0.0
        gamma = math.pi
    else:
        phase00 = float(np.angle(v[0, 0]))
        phase10 = float(np.angle(v[1, 0]))
        beta = phase10 - phase00
        delta = -phase10 - phase00
    return alpha, beta, gamma, delta


def _rotation_run(target: int, rz_after: float, ry_mid: float, rz_before: float):
    """Gate list (time order) for the matrix RZ(rz_after) RY(ry_mid) RZ(rz_before).

    RY(t) is rewritten as RZ(pi/2) RX(t) RZ(-pi/2); adjacent RZs merge.
    """
    out = []
    if abs(ry_mid) < _ANGLE_EPS:
        angle = rz_before + rz_after
        if abs(angle) > _ANGLE_EPS:
            out.append((gates.rz(angle), (target,)))
        return out
    first = rz_before - math.pi / 2
    last = rz_after + math.pi / 2
    if abs(first) > _ANGLE_EPS:
        out.append((gates.rz(first), (target,)))
    out.append((gates.rx(ry_mid), (target,)))
    if abs(last) > _ANGLE_EPS:
        out.append((gates.rz(last), (target,)))
    return out


def decompose_1q(matrix: np.ndarray) -> DecomposedSequence:
    """Rewrite a 2x2 unitary over {rz, rx} with an explicit global phase."""
    alpha, beta, gamma, delta = zyz_angles(matrix)
    return DecomposedSequence(_rotation_run(0, beta, gamma, delta), alpha, num_qubits=1)


def decompose_controlled(matrix: np.ndarray) -> DecomposedSequence:
    """Rewrite controlled-U (control = qubit 0, target = qubit 1) over
    {rz, rx, cx} via the ABC construction."""
    alpha, beta, gamma, delta = zyz_angles(matrix)
    seq: list[tuple[GateSpec, tuple[int, ...]]] = []
    cx_gate = gates.cx()
    # C = RZ((delta-beta)/2), B = RY(-gamma/2) RZ(-(delta+beta)/2),
    # A = RZ(beta) RY(gamma/2); A X B X C = e^{-i alpha} U and A B C = I.
    seq += _rotation_run(1, 0.0, 0.0, (delta - beta) / 2)
    seq.append((cx_gate, (0, 1)))
    seq += _rotation_run(1, 0.0, -gamma / 2, -(delta + beta) / 2)
    seq.append((cx_gate, (0, 1)))
    seq += _rotation_run(1, beta, gamma / 2, 0.0)
    if abs(alpha) > _ANGLE_EPS:
        seq.append((gates.rz(alpha), (0,)))
    return DecomposedSequence(seq, alpha / 2, num_qubits=2)


def abc_factors(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The (A, B, C) matrices of the controlled construction; A B C = I."""
    _, beta, gamma, delta = zyz_angles(matrix)
    a = gates.rz(beta).matrix @ gates.ry(gamma / 2).matrix
    b = gates.ry(-gamma / 2).matrix @ gates.rz(-(delta + beta) / 2).matrix
    c = gates.rz((delta - beta) / 2).matrix
    return a, b, c


def decompose_circuit(circuit, basis) -> "ContractCircuit":
    """Rewrite every instruction of ``circuit`` into ``basis`` gates.

    Conditions and qubit count are preserved; nested sub-circuits are
    rewritten in place. Gates already in the basis pass through; other
    gates must be single-qubit or controlled single-qubit.
    """
    from .contracts import ContractCircuit, GateInstruction, SubInstruction

    basis = frozenset(basis)
    missing = REQUIRED_BASIS - basis
    if missing:
        raise UnsupportedGateError(f"basis must include {sorted(REQUIRED_BASIS)}; missing {sorted(missing)}")

    out = ContractCircuit(circuit.size)
    for inst in circuit.instructions:
        if isinstance(inst, SubInstruction):
            out.append(decompose_circuit(inst.circuit, basis), list(inst.qubits))
            continue
        gate, qubits = inst.gate, inst.qubits
        if gate.name in basis:
            out.append(gate, list(qubits))
        elif gate.arity == 1:
            for g, local in decompose_1q(gate.matrix).gates:
                out.append(g, [qubits[local[0]]])
        elif gate.controls == 1 and gate.base is not None and gate.base.arity == 1:
            for g, local in decompose_controlled(gate.base.matrix).gates:
                out.append(g, [qubits[q] for q in local])
        else:
            raise UnsupportedGateError(
                f"cannot rewrite gate {gate.name!r} (arity {gate.arity}) into basis {sorted(basis)}"
            )
    for tag, predicate in circuit.conditions.items():
        out.add_condition(tag, predicate)
    return out


def haar_random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix with
    the phase-fixed diagonal."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def controlled_matrix(matrix: np.ndarray) -> np.ndarray:
    """controlled-U with the control on the high index bit."""
    dim = matrix.shape[0]
    out = np.eye(2 * dim, dtype=np.complex128)
    out[dim:, dim:] = matrix
    return out


__all__ = [
    "DecomposedSequence", "zyz_angles", "decompose_1q", "decompose_controlled",
    "decompose_circuit", "abc_factors", "haar_random_unitary", "controlled_matrix",
    "REQUIRED_BASIS",
]
