"""Named parameterized gates, their matrices, and controlled/adjoint modifiers.

Canonical lowercase names ("i", "x", ..., "swap", "matrix") are the
spellings used by the text format and the CLI. For multi-qubit matrices
the gate's first qubit argument is the most significant matrix-index
bit; in particular a control qubit selects the lower-right block.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import require_unitary

_SQ2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class GateSpec:
    """A named unitary operation on ``arity`` qubits."""

    name: str
    arity: int
    matrix: np.ndarray = field(compare=False)
    params: tuple[float, ...] = ()
    # Set for gates built as controlled versions of a smaller gate.
    controls: int = 0
    base: "GateSpec | None" = field(default=None, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (1 << self.arity, 1 << self.arity):
            raise ValueError(f"gate {self.name!r}: matrix shape {m.shape} does not match arity {self.arity}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __repr__(self) -> str:
        if self.params:
            args = ", ".join(f"{p:.12g}" for p in self.params)
            return f"{self.name}({args})"
        return self.name


def unitary_of(gate: GateSpec) -> np.ndarray:
    """The gate's defining matrix."""
    return gate.matrix


def i() -> GateSpec:
    return GateSpec("i", 1, np.eye(2))


def x() -> GateSpec:
    return GateSpec("x", 1, np.array([[0, 1], [1, 0]]))


def y() -> GateSpec:
    return GateSpec("y", 1, np.array([[0, -1j], [1j, 0]]))


def z() -> GateSpec:
    return GateSpec("z", 1, np.diag([1, -1]))


def h() -> GateSpec:
    return GateSpec("h", 1, np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]]))


def s() -> GateSpec:
    return GateSpec("s", 1, np.diag([1, 1j]))


def t() -> GateSpec:
    return GateSpec("t", 1, np.diag([1, cmath.exp(1j * math.pi / 4)]))


def p(lam: float) -> GateSpec:
    """Phase gate diag(1, e^{i lam})."""
    return GateSpec("p", 1, np.diag([1, cmath.exp(1j * lam)]), params=(float(lam),))


def rx(theta: float) -> GateSpec:
    c, sn = math.cos(theta / 2), math.sin(theta / 2)
    return GateSpec("rx", 1, np.array([[c, -1j * sn], [-1j * sn, c]]), params=(float(theta),))


def ry(theta: float) -> GateSpec:
    c, sn = math.cos(theta / 2), math.sin(theta / 2)
    return GateSpec("ry", 1, np.array([[c, -sn], [sn, c]]), params=(float(theta),))


def rz(theta: float) -> GateSpec:
    # Symmetric convention diag(e^{-i t/2}, e^{i t/2}); p() is the
    # asymmetric variant. The basis rewriter's identities rely on this.
    return GateSpec(
        "rz", 1,
        np.diag([cmath.exp(-1j * theta / 2), cmath.exp(1j * theta / 2)]),
        params=(float(theta),),
    )


def swap() -> GateSpec:
    return GateSpec("swap", 2, np.array([
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ]))


def matrix_gate(matrix: np.ndarray) -> GateSpec:
    """Wrap an arbitrary unitary supplied by the caller."""
    m = require_unitary(matrix)
    arity = int(m.shape[0]).bit_length() - 1
    if (1 << arity) != m.shape[0]:
        raise ValueError("matrix dimension must be a power of two")
    return GateSpec("matrix", arity, m)


def controlled(gate: GateSpec) -> GateSpec:
    """Single-control version; the control is the first qubit argument."""
    dim = 1 << gate.arity
    m = np.eye(2 * dim, dtype=np.complex128)
    m[dim:, dim:] = gate.matrix
    return GateSpec(
        f"c{gate.name}", gate.arity + 1, m,
        params=gate.params, controls=gate.controls + 1, base=gate,
    )


def cx() -> GateSpec:
    return controlled(x())


def cz() -> GateSpec:
    return controlled(z())


def adjoint(gate: GateSpec) -> GateSpec:
    """Gate whose matrix is the conjugate transpose."""
    if gate.name in ("i", "x", "y", "z", "h", "swap"):
        return gate  # Hermitian
    if gate.name in ("rx", "ry", "rz", "p"):
        return _BUILDERS[gate.name](-gate.params[0])
    if gate.controls and gate.base is not None:
        return controlled(adjoint(gate.base))
    return GateSpec(f"{gate.name}_dg", gate.arity, gate.matrix.conj().T, params=gate.params)


_BUILDERS = {
    "i": i, "x": x, "y": y, "z": z, "h": h, "s": s, "t": t,
    "p": p, "rx": rx, "ry": ry, "rz": rz,
    "cx": cx, "cz": cz, "swap": swap,
}

#: Canonical gate names and the number of angle parameters each takes.
CATALOG: dict[str, int] = {
    "i": 0, "x": 0, "y": 0, "z": 0, "h": 0, "s": 0, "t": 0,
    "p": 1, "rx": 1, "ry": 1, "rz": 1,
    "cx": 0, "cz": 0, "swap": 0,
}


def by_name(name: str, params: tuple[float, ...] = ()) -> GateSpec:
    """Look up a catalog gate by its canonical name."""
    if name not in CATALOG:
        raise KeyError(f"unknown gate {name!r}")
    want = CATALOG[name]
    if len(params) != want:
        raise ValueError(f"gate {name!r} takes {want} parameter(s), got {len(params)}")
    return _BUILDERS[name](*params)
