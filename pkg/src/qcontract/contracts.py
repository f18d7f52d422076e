"""Design-by-contract circuits.

A :class:`ContractCircuit` is an ordered instruction list (gates and
nested sub-circuits) plus named conditions over its pre/post states.
Running a circuit executes it on the statevector simulator and checks
every condition eagerly, including the conditions of nested
sub-circuits, which see the pure partial states of their mapped qubits.
:class:`MeasuredCircuit` adds final-only measurement, a postprocess
function over the counts, and named measurement conditions.

Condition predicates must be pure functions; the framework treats a
falsy return as a violation and reports the condition's tag together
with the nesting path of the block that failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .errors import (
    BuildError,
    EntangledSubsetError,
    MeasureConditionError,
    PostprocessError,
    StateConditionError,
)
from .expressions import partial_state
from .gates import GateSpec
from .numerics import StateVector
from .simulator import Counts, RunResult, apply_gate, marginal_probabilities, sample_counts

StatePredicate = Callable[[StateVector, StateVector], bool]
MeasurePredicate = Callable[[StateVector, Counts, Any], bool]


@dataclass(frozen=True)
class GateInstruction:
    gate: GateSpec
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class SubInstruction:
    circuit: "ContractCircuit"
    qubits: tuple[int, ...]


def _format_path(path: tuple[int, ...]) -> str:
    return "top" + "".join(f"/{idx}" for idx in path)


def _check_indices(qubits, size: int, *, expected: int | None = None) -> tuple[int, ...]:
    qubits = tuple(int(q) for q in qubits)
    if expected is not None and len(qubits) != expected:
        raise BuildError(f"expected {expected} qubit argument(s), got {len(qubits)}")
    if len(set(qubits)) != len(qubits):
        raise BuildError(f"duplicate qubit index in {qubits}")
    for q in qubits:
        if not 0 <= q < size:
            raise BuildError(f"qubit index {q} out of range for a {size}-qubit circuit")
    return qubits


class ContractCircuit:
    """A circuit under contract: instructions plus named state conditions."""

    def __init__(self, size: int):
        if size < 1:
            raise BuildError(f"circuit size must be >= 1, got {size}")
        self.size = int(size)
        self.instructions: list[GateInstruction | SubInstruction] = []
        self.conditions: dict[str, StatePredicate] = {}

    def append(self, item: "GateSpec | ContractCircuit", qubits) -> None:
        """Append a gate or a sub-circuit acting on the listed qubits.

        A sub-circuit keeps its own conditions; they are re-checked at
        every run of this circuit, against the partial states of the
        mapped qubits.
        """
        if isinstance(item, GateSpec):
            qubits = _check_indices(qubits, self.size, expected=item.arity)
            self.instructions.append(GateInstruction(item, qubits))
        elif isinstance(item, ContractCircuit):
            qubits = _check_indices(qubits, self.size, expected=item.size)
            self.instructions.append(SubInstruction(item, qubits))
        else:
            raise BuildError(f"cannot append {type(item).__name__}")

    def add_condition(self, tag: str, predicate: StatePredicate) -> None:
        """Register a named predicate over (pre_state, post_state)."""
        if tag in self.conditions:
            raise BuildError(f"duplicate condition tag {tag!r}")
        self.conditions[tag] = predicate

    def run(self, initial: StateVector | None = None) -> StateVector:
        """Execute on the simulator, checking all conditions.

        Top-level conditions receive the full initial and final states;
        nested circuits' conditions receive partial states of their
        mapped qubits. The first failing condition aborts the run with a
        :class:`StateConditionError` carrying the tag and nesting path.
        """
        if initial is None:
            initial = StateVector.zero(self.size)
        if initial.num_qubits != self.size:
            raise BuildError(
                f"initial state has {initial.num_qubits} qubits, circuit has {self.size}"
            )
        final = _execute(self, initial, tuple(range(self.size)), ())
        _check_conditions(self.conditions, initial, final, ())
        return final

    def measure(self, qubits, postprocess: Callable[[Counts], Any] | None = None) -> "MeasuredCircuit":
        """Wrap this circuit with a final measurement of ``qubits``.

        The circuit itself is unchanged and stays reusable.
        """
        return MeasuredCircuit(self, qubits, postprocess)

    def flattened(self) -> "ContractCircuit":
        """Condition-free copy with every sub-circuit inlined to gates."""
        out = ContractCircuit(self.size)
        _flatten_into(self, tuple(range(self.size)), out)
        return out

    def __repr__(self) -> str:
        return (
            f"ContractCircuit(size={self.size}, instructions={len(self.instructions)}, "
            f"conditions={list(self.conditions)})"
        )


def _flatten_into(circ: ContractCircuit, mapping: tuple[int, ...], out: ContractCircuit) -> None:
    for inst in circ.instructions:
        mapped = tuple(mapping[q] for q in inst.qubits)
        if isinstance(inst, GateInstruction):
            out.append(inst.gate, mapped)
        else:
            _flatten_into(inst.circuit, mapped, out)


def _check_conditions(conditions, pre: StateVector, post: StateVector, path: tuple[int, ...]) -> None:
    for tag, predicate in conditions.items():
        if not predicate(pre, post):
            raise StateConditionError(
                f"Condition Error occurred in {tag!r} (path: {_format_path(path)})",
                tag=tag,
                path=_format_path(path),
            )


def _execute(circ: ContractCircuit, state: StateVector, mapping: tuple[int, ...],
             path: tuple[int, ...]) -> StateVector:
    for idx, inst in enumerate(circ.instructions):
        mapped = tuple(mapping[q] for q in inst.qubits)
        if isinstance(inst, GateInstruction):
            state = apply_gate(state, inst.gate, mapped)
            continue
        sub = inst.circuit
        sub_path = path + (idx,)
        # Snapshots only around contract-bearing blocks.
        snapshot = state if sub.conditions else None
        state = _execute(sub, state, mapped, sub_path)
        if sub.conditions:
            try:
                pre_local = partial_state(snapshot, mapped)
                post_local = partial_state(state, mapped)
            except EntangledSubsetError as exc:
                raise EntangledSubsetError(
                    f"{exc} (path: {_format_path(sub_path)})",
                    purity=exc.purity,
                    path=_format_path(sub_path),
                ) from None
            _check_conditions(sub.conditions, pre_local, post_local, sub_path)
    return state


class MeasuredCircuit:
    """A circuit plus its final measurement and statistical contract."""

    def __init__(self, circuit: ContractCircuit, qubits,
                 postprocess: Callable[[Counts], Any] | None = None):
        qubits = tuple(int(q) for q in qubits)
        if not qubits:
            raise BuildError("measurement qubit list must not be empty")
        _check_indices(qubits, circuit.size, expected=len(qubits))
        self.circuit = circuit
        self.measured_qubits = qubits
        self.postprocess = postprocess
        self.measure_conditions: dict[str, MeasurePredicate] = {}
        # Shot count to use when the caller does not pass one; the text
        # format's measure block overrides this with its declared value.
        self.default_shots = 100_000

    def add_condition(self, tag: str, predicate: MeasurePredicate) -> None:
        """Register a named predicate over (pre_measure_state, counts, value)."""
        if tag in self.measure_conditions:
            raise BuildError(f"duplicate condition tag {tag!r}")
        self.measure_conditions[tag] = predicate

    def run(self, shots: int | None = None, seed: int = 1,
            initial: StateVector | None = None) -> tuple[Any, Counts]:
        """Run, sample, postprocess, and check the measurement conditions.

        Returns (postprocessed value, counts). State conditions of the
        underlying circuit are checked first; measurement never
        collapses the simulator state.
        """
        if shots is None:
            shots = self.default_shots
        if shots < 1:
            raise BuildError(f"shots must be >= 1, got {shots}")
        pre_measure = self.circuit.run(initial)
        probs = marginal_probabilities(pre_measure, self.measured_qubits)
        counts = sample_counts(probs, shots, seed)
        result = RunResult(counts, pre_measure, int(seed))
        if self.postprocess is None:
            value: Any = counts
        else:
            try:
                value = self.postprocess(counts)
            except Exception as exc:
                raise PostprocessError(f"postprocess raised {type(exc).__name__}: {exc}") from exc
        for tag, predicate in self.measure_conditions.items():
            if not predicate(result.pre_measure_state, counts, value):
                raise MeasureConditionError(
                    f"Condition Error occurred in {tag!r} (path: top)",
                    tag=tag,
                    path="top",
                )
        return value, counts

    def __repr__(self) -> str:
        return (
            f"MeasuredCircuit(qubits={list(self.measured_qubits)}, "
            f"conditions={list(self.measure_conditions)})"
        )
