"""Deterministic statevector evolution and seeded measurement sampling.

Gates are applied by contracting the gate tensor against the state
tensor on the targeted axes; the full 2^n x 2^n operator is never
formed. Sampling uses inverse-CDF draws from a pinned PRNG
(xoshiro256** seeded through splitmix64), so counts are bit-identical
for a fixed (probabilities, shots, seed) triple on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import GateSpec
from .numerics import StateVector

_MASK64 = (1 << 64) - 1


def _splitmix64(seed: int):
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


class Xoshiro256StarStar:
    """Reference xoshiro256** generator over Python integers.

    Slow but exactly reproducible; the state is derived from the seed
    with splitmix64 as the algorithm's authors recommend.
    """

    def __init__(self, seed: int):
        sm = _splitmix64(int(seed))
        self._s = [next(sm) for _ in range(4)]

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (s1 * 5) & _MASK64
        result = (((result << 7) | (result >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_uint64() >> 11) * 2.0**-53


def _check_qubits(qubits, num_qubits: int, arity: int) -> tuple[int, ...]:
    qubits = tuple(int(q) for q in qubits)
    if len(qubits) != arity:
        raise ValueError(f"gate arity {arity} does not match {len(qubits)} qubit argument(s)")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"duplicate qubit index in {qubits}")
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit index {q} out of range for {num_qubits} qubits")
    return qubits


def apply_gate(state: StateVector, gate: GateSpec, qubits) -> StateVector:
    """Apply ``gate`` to the listed qubits (first listed = gate's first
    argument) and return the resulting state."""
    qubits = _check_qubits(qubits, state.num_qubits, gate.arity)
    n = state.num_qubits
    k = gate.arity
    tensor = state.amps.reshape([2] * n)
    g = gate.matrix.reshape([2] * (2 * k))
    axes = [n - 1 - q for q in qubits]
    out = np.tensordot(g, tensor, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, range(k), axes)
    return StateVector(out.reshape(-1), copy=False)


def marginal_probabilities(state: StateVector, qubits) -> np.ndarray:
    """Outcome probabilities for the listed qubits.

    The table has size 2^len(qubits); outcome index bit (m-1-j) is the
    j-th listed qubit, so the index written in binary, most significant
    digit first, reads off the qubit list left to right.
    """
    qubits = tuple(int(q) for q in qubits)
    if not qubits:
        raise ValueError("qubit list must not be empty")
    _check_qubits(qubits, state.num_qubits, len(qubits))
    n = state.num_qubits
    m = len(qubits)
    probs = np.abs(state.amps.reshape([2] * n)) ** 2
    src = [n - 1 - q for q in qubits]
    probs = np.moveaxis(probs, src, range(m))
    probs = probs.reshape(1 << m, -1).sum(axis=1)
    return probs


class Counts:
    """Histogram of measurement outcomes.

    Keys are bitstrings; character j (left to right) is the outcome of
    the j-th measured qubit. Lookups of absent outcomes return 0.
    """

    def __init__(self, data: dict[str, int], total_shots: int):
        width = {len(k) for k in data}
        if len(width) > 1:
            raise ValueError("outcome keys must share one width")
        if any(v < 0 for v in data.values()):
            raise ValueError("counts must be nonnegative")
        if sum(data.values()) != total_shots:
            raise ValueError("counts must sum to total_shots")
        self._data = dict(data)
        self.total_shots = int(total_shots)

    def __getitem__(self, key: str) -> int:
        return self._data.get(key, 0)

    def get(self, key: str, default: int = 0) -> int:
        return self._data.get(key, default)

    def items(self):
        return self._data.items()

    def keys(self):
        return self._data.keys()

    def values(self):
        return self._data.values()

    def __iter__(self):
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def num_measured_qubits(self) -> int:
        return len(next(iter(self._data))) if self._data else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Counts):
            return NotImplemented
        return self._data == other._data and self.total_shots == other.total_shots

    def __repr__(self) -> str:
        return f"Counts({self._data!r}, total_shots={self.total_shots})"


@dataclass(frozen=True)
class RunResult:
    """Sampling product: the histogram plus the state it was drawn from."""

    counts: Counts
    pre_measure_state: StateVector
    seed: int


def sample_counts(probs: np.ndarray, shots: int, seed: int) -> Counts:
    """Draw ``shots`` outcomes from a probability table by inverse CDF.

    Deterministic for fixed (probs, shots, seed).
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 1:
        raise ValueError("probability table must be a nonempty vector")
    if np.any(probs < -1e-12):
        raise ValueError("probabilities must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-8:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    if shots < 1:
        raise ValueError("shots must be >= 1")

    rng = Xoshiro256StarStar(seed)
    u = np.array([rng.random() for _ in range(shots)])
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    outcomes = np.searchsorted(cdf, u, side="right")
    outcomes = np.minimum(outcomes, probs.size - 1)
    width = max(int(probs.size - 1).bit_length(), 1)
    hist = np.bincount(outcomes, minlength=probs.size)
    data = {format(idx, f"0{width}b"): int(c) for idx, c in enumerate(hist) if c > 0}
    return Counts(data, int(shots))


def sample_state(state: StateVector, qubits, shots: int, seed: int) -> RunResult:
    """Measure the listed qubits of ``state`` with a fresh seeded stream."""
    probs = marginal_probabilities(state, qubits)
    return RunResult(sample_counts(probs, shots, seed), state, int(seed))
