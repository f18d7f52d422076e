"""Complex linear-algebra kernel: state vectors, operator matrices,
tensor products and reduced density matrices.

Conventions used throughout the package:

* Amplitude index bit ``i`` is the state of qubit ``i`` (qubit 0 is the
  least significant bit).
* ``tensor_states(a, b)`` and ``kron(A, B)`` place the *right* factor on
  the lower qubit indices, so ``a ⊗ b`` means "b on qubit 0 upward".
"""

from __future__ import annotations

import numpy as np

NORMALIZATION_TOL = 1e-10
UNITARITY_TOL = 1e-9
HERMITICITY_TOL = 1e-10


def _require_power_of_two(length: int) -> int:
    n = int(length).bit_length() - 1
    if length < 2 or (1 << n) != length:
        raise ValueError(f"length {length} is not a power of two >= 2")
    return n


class StateVector:
    """Dense vector of 2**num_qubits complex amplitudes.

    Instances are immutable; the amplitude buffer is marked read-only.
    Vectors may be subnormalized (expression evaluation produces such
    intermediates); use :meth:`is_normalized` where unit norm matters.
    """

    __slots__ = ("amps", "num_qubits")

    def __init__(self, amps, *, copy: bool = True):
        arr = np.array(amps, dtype=np.complex128, copy=copy).reshape(-1)
        num_qubits = _require_power_of_two(arr.size)
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("amplitudes must be finite (no NaN/Inf)")
        arr.setflags(write=False)
        object.__setattr__(self, "amps", arr)
        object.__setattr__(self, "num_qubits", num_qubits)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        """|0...0> on ``num_qubits`` qubits."""
        return cls.basis(num_qubits, 0)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if not 0 <= index < (1 << num_qubits):
            raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, copy=False)

    @classmethod
    def from_labels(cls, labels: str) -> "StateVector":
        """Build a product state from ket labels, e.g. ``"+0"``.

        The rightmost label is qubit 0. Accepted labels: 0 1 + -.
        """
        single = {
            "0": np.array([1.0, 0.0], dtype=np.complex128),
            "1": np.array([0.0, 1.0], dtype=np.complex128),
            "+": np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0),
            "-": np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0),
        }
        if not labels:
            raise ValueError("empty ket")
        amps = np.array([1.0], dtype=np.complex128)
        for ch in labels:
            if ch not in single:
                raise ValueError(f"unknown ket label {ch!r}")
            amps = np.kron(amps, single[ch])
        return cls(amps, copy=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def __len__(self) -> int:
        return self.amps.size

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits}, amps={self.amps!r})"


def tensor_states(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; ``b`` occupies the lower qubit indices."""
    return StateVector(np.kron(a.amps, b.amps), copy=False)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``b`` on the lower index bits (same
    convention as :func:`tensor_states`)."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b> = sum conj(a_k) b_k."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit count mismatch: {a.num_qubits} vs {b.num_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def _check_keep(keep, num_qubits: int) -> list[int]:
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit index in {keep}")
    for q in keep:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit index {q} out of range for {num_qubits} qubits")
    return keep


def reduced_density(state: StateVector, keep) -> np.ndarray:
    """Partial trace over every qubit not in ``keep``.

    Row/column index bit ``j`` of the result corresponds to ``keep[j]``.
    """
    keep = _check_keep(keep, state.num_qubits)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    n = state.num_qubits
    m = len(keep)
    tensor = state.amps.reshape([2] * n)
    # Axis n-1-q holds qubit q; keep[j] must become index bit j, i.e.
    # axis m-1-j of the leading block after the move.
    src = [n - 1 - q for q in keep]
    dst = [m - 1 - j for j in range(m)]
    psi = np.moveaxis(tensor, src, dst).reshape(1 << m, -1)
    return psi @ psi.conj().T


def purity(rho: np.ndarray) -> float:
    """trace(rho^2) for a Hermitian density matrix."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho) ** 2).real)


def is_unitary(matrix: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    ident = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - ident)) <= tol)


def require_unitary(matrix: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(matrix.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    if not is_unitary(matrix, tol):
        raise ValueError("matrix is not unitary")
    return matrix
