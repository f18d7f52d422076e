"""Symbolic state and operator expressions used inside assertions.

Expression trees mirror how conditions are written in bra-ket notation: kets,
scalar multiples, sums, tensor products (``^``), operators applied with
``@`` and bras via ``~``. Evaluation is exact tree walking over the
numerics kernel; subnormalized intermediates are legal, only
:func:`eq_state` and :func:`expectation` require unit norm.

>>> psi = Plus
>>> expr = (psi + (gate_op("t") @ psi)) / 2 ^ Zero
>>> expr.eval().num_qubits
2
"""

from __future__ import annotations

import numpy as np

from . import gates as _gates
from .errors import EntangledSubsetError
from .gates import GateSpec
from .numerics import StateVector, inner, kron, purity, reduced_density, tensor_states

DEFAULT_EQ_TOL = 1e-8
DEFAULT_PURITY_TOL = 1e-8


def _as_state_expr(value) -> "StateExpr":
    if isinstance(value, StateExpr):
        return value
    if isinstance(value, StateVector):
        return FromVector(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return FromVector(StateVector(value))
    raise TypeError(f"cannot interpret {type(value).__name__} as a state expression")


def _as_operator_expr(value) -> "OperatorExpr":
    if isinstance(value, OperatorExpr):
        return value
    if isinstance(value, GateSpec):
        return GateOp(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return MatrixOp(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as an operator expression")


class StateExpr:
    """Base class for symbolic state expressions."""

    def eval(self) -> StateVector:
        raise NotImplementedError

    def __add__(self, other):
        return StateSum(self, _as_state_expr(other))

    def __sub__(self, other):
        return StateSum(self, Scaled(-1.0, _as_state_expr(other)))

    def __mul__(self, scalar):
        return Scaled(complex(scalar), self)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Scaled(1.0 / complex(scalar), self)

    def __xor__(self, other):
        return StateTensor(self, _as_state_expr(other))

    def __invert__(self):
        return BraExpr(self)


class KetLiteral(StateExpr):
    """Product state from ket labels; the rightmost label is qubit 0."""

    def __init__(self, labels: str):
        self.labels = labels

    def eval(self) -> StateVector:
        return StateVector.from_labels(self.labels)

    def __repr__(self) -> str:
        return f"|{self.labels}>"


class FromVector(StateExpr):
    def __init__(self, vector: StateVector):
        self.vector = vector

    def eval(self) -> StateVector:
        return self.vector


class Scaled(StateExpr):
    def __init__(self, coeff: complex, inner_expr: StateExpr):
        self.coeff = complex(coeff)
        self.inner = inner_expr

    def eval(self) -> StateVector:
        return StateVector(self.coeff * self.inner.eval().amps, copy=False)


class StateSum(StateExpr):
    def __init__(self, left: StateExpr, right: StateExpr):
        self.left = left
        self.right = right

    def eval(self) -> StateVector:
        a = self.left.eval()
        b = self.right.eval()
        if a.num_qubits != b.num_qubits:
            raise ValueError(f"cannot add states on {a.num_qubits} and {b.num_qubits} qubits")
        return StateVector(a.amps + b.amps, copy=False)


class StateTensor(StateExpr):
    """Tensor product; the right factor takes the lower qubit indices."""

    def __init__(self, left: StateExpr, right: StateExpr):
        self.left = left
        self.right = right

    def eval(self) -> StateVector:
        return tensor_states(self.left.eval(), self.right.eval())


class Applied(StateExpr):
    def __init__(self, op: "OperatorExpr", state: StateExpr):
        self.op = op
        self.state = state

    def eval(self) -> StateVector:
        matrix = self.op.eval()
        vec = self.state.eval()
        if matrix.shape[0] != len(vec):
            raise ValueError(
                f"operator dimension {matrix.shape[0]} does not match state dimension {len(vec)}"
            )
        return StateVector(matrix @ vec.amps, copy=False)


class BraExpr:
    """Adjoint of a state; ``~psi @ op @ psi`` evaluates to <psi|op|psi>."""

    def __init__(self, state: StateExpr):
        self.state = state

    def __matmul__(self, other):
        if isinstance(other, (OperatorExpr, GateSpec)):
            op = _as_operator_expr(other)
            return BraExpr(Applied(AdjointOp(op), self.state))
        ket = _as_state_expr(other)
        return inner(self.state.eval(), ket.eval())


class OperatorExpr:
    """Base class for symbolic operator expressions."""

    def eval(self) -> np.ndarray:
        raise NotImplementedError

    def __matmul__(self, other):
        if isinstance(other, (StateExpr, StateVector)):
            return Applied(self, _as_state_expr(other))
        return Compose(self, _as_operator_expr(other))

    def __add__(self, other):
        return OpSum(self, _as_operator_expr(other))

    def __sub__(self, other):
        return OpSum(self, OpScaled(-1.0, _as_operator_expr(other)))

    def __mul__(self, scalar):
        return OpScaled(complex(scalar), self)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return OpScaled(1.0 / complex(scalar), self)

    def __xor__(self, other):
        return OpTensor(self, _as_operator_expr(other))

    def __invert__(self):
        return AdjointOp(self)


class GateOp(OperatorExpr):
    def __init__(self, gate: GateSpec):
        self.gate = gate

    def eval(self) -> np.ndarray:
        return self.gate.matrix

    def __repr__(self) -> str:
        return f"GateOp({self.gate!r})"


class MatrixOp(OperatorExpr):
    """A literal matrix; not required to be unitary (projectors are fine)."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        if m.shape[0] & (m.shape[0] - 1) or m.shape[0] < 2:
            raise ValueError("operator dimension must be a power of two")
        self.matrix = m

    def eval(self) -> np.ndarray:
        return self.matrix


class Compose(OperatorExpr):
    def __init__(self, left: OperatorExpr, right: OperatorExpr):
        self.left = left
        self.right = right

    def eval(self) -> np.ndarray:
        a = self.left.eval()
        b = self.right.eval()
        if a.shape[1] != b.shape[0]:
            raise ValueError("operator dimensions do not compose")
        return a @ b


class OpSum(OperatorExpr):
    def __init__(self, left: OperatorExpr, right: OperatorExpr):
        self.left = left
        self.right = right

    def eval(self) -> np.ndarray:
        a = self.left.eval()
        b = self.right.eval()
        if a.shape != b.shape:
            raise ValueError("operator dimensions do not match")
        return a + b


class OpScaled(OperatorExpr):
    def __init__(self, coeff: complex, inner_expr: OperatorExpr):
        self.coeff = complex(coeff)
        self.inner = inner_expr

    def eval(self) -> np.ndarray:
        return self.coeff * self.inner.eval()


class OpTensor(OperatorExpr):
    def __init__(self, left: OperatorExpr, right: OperatorExpr):
        self.left = left
        self.right = right

    def eval(self) -> np.ndarray:
        return kron(self.left.eval(), self.right.eval())


class AdjointOp(OperatorExpr):
    def __init__(self, inner_expr: OperatorExpr):
        self.inner = inner_expr

    def eval(self) -> np.ndarray:
        return self.inner.eval().conj().T


#: Common single-qubit states, ready for expression building.
Zero = KetLiteral("0")
One = KetLiteral("1")
Plus = KetLiteral("+")
Minus = KetLiteral("-")


def eval_state(expr) -> StateVector:
    """Evaluate a state expression tree to a (possibly subnormalized) vector."""
    return _as_state_expr(expr).eval()


def eval_operator(expr) -> np.ndarray:
    """Evaluate an operator expression tree to a matrix."""
    return _as_operator_expr(expr).eval()


def expectation(psi, op) -> complex:
    """<psi|op|psi> for a normalized state."""
    vec = psi if isinstance(psi, StateVector) else eval_state(psi)
    if abs(vec.norm() ** 2 - 1.0) > 1e-8:
        raise ValueError(f"state must be normalized (norm^2 = {vec.norm() ** 2!r})")
    matrix = eval_operator(op)
    if matrix.shape[0] != len(vec):
        raise ValueError(
            f"operator dimension {matrix.shape[0]} does not match state dimension {len(vec)}"
        )
    return complex(np.vdot(vec.amps, matrix @ vec.amps))


def partial_state(state: StateVector, keep, purity_tol: float = DEFAULT_PURITY_TOL) -> StateVector:
    """Pure state of the ``keep`` qubits, defined only when they are
    unentangled from the rest.

    The reduced density matrix is formed and its dominant eigenvector
    returned with the global phase fixed (first non-negligible amplitude
    made real positive). Raises :class:`EntangledSubsetError` when the
    subset's purity falls below ``1 - purity_tol``.
    """
    rho = reduced_density(state, keep)
    pur = purity(rho)
    if pur < 1.0 - purity_tol:
        raise EntangledSubsetError(
            f"qubits {list(keep)} are entangled with their environment (purity {pur:.6g})",
            purity=pur,
        )
    eigvals, eigvecs = np.linalg.eigh(rho)
    vec = eigvecs[:, -1]
    nonzero = np.flatnonzero(np.abs(vec) > 1e-9)
    if nonzero.size:
        ref = vec[nonzero[0]]
        vec = vec * (ref.conjugate() / abs(ref))
    return StateVector(vec, copy=False)


def eq_state(a, b, tol: float = DEFAULT_EQ_TOL) -> bool:
    """Global-phase-invariant equality: |<a|b>|^2 >= 1 - tol.

    Accepts state expressions for either side, matching how conditions
    are written.
    """
    va = a if isinstance(a, StateVector) else eval_state(a)
    vb = b if isinstance(b, StateVector) else eval_state(b)
    if va.num_qubits != vb.num_qubits:
        raise ValueError(f"qubit count mismatch: {va.num_qubits} vs {vb.num_qubits}")
    for name, v in (("left", va), ("right", vb)):
        if abs(v.norm() ** 2 - 1.0) > 1e-6:
            raise ValueError(f"{name} state must be normalized (norm^2 = {v.norm() ** 2!r})")
    return abs(inner(va, vb)) ** 2 >= 1.0 - tol


def gate_op(name: str, *params: float) -> GateOp:
    """Catalog gate as an operator expression, e.g. ``gate_op("rz", 0.3)``."""
    return GateOp(_gates.by_name(name, tuple(params)))
