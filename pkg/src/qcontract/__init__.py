"""Design-by-contract toolkit for quantum circuits.

Circuits built by parameterized procedures carry named assertions over
their pre/post states and over the statistical postprocessing of
measurement results; every assertion is checked on the built-in
statevector simulator at every invocation, nested circuits included.
"""

from . import algorithms, decompose, dsl, expressions, gates
from .contracts import ContractCircuit, GateInstruction, MeasuredCircuit, SubInstruction
from .errors import (
    BuildError,
    ContractViolation,
    EntangledSubsetError,
    MeasureConditionError,
    PostprocessError,
    StateConditionError,
    UnsupportedGateError,
)
from .expressions import (
    Minus,
    One,
    Plus,
    Zero,
    eq_state,
    eval_state,
    expectation,
    partial_state,
)
from .numerics import StateVector, inner, kron, purity, reduced_density, tensor_states
from .simulator import Counts, RunResult, apply_gate, marginal_probabilities, sample_counts

__version__ = "0.1.0"

__all__ = [
    "ContractCircuit", "MeasuredCircuit", "GateInstruction", "SubInstruction",
    "StateVector", "Counts", "RunResult",
    "ContractViolation", "StateConditionError", "MeasureConditionError",
    "EntangledSubsetError", "BuildError", "PostprocessError", "UnsupportedGateError",
    "Zero", "One", "Plus", "Minus",
    "eq_state", "eval_state", "expectation", "partial_state",
    "inner", "kron", "purity", "reduced_density", "tensor_states",
    "apply_gate", "marginal_probabilities", "sample_counts",
    "gates", "expressions", "decompose", "algorithms", "dsl",
    "__version__",
]
