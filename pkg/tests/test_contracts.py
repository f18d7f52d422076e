import math

import numpy as np
import pytest

from qcontract import gates
from qcontract.contracts import ContractCircuit, MeasuredCircuit
from qcontract.errors import (
    BuildError,
    EntangledSubsetError,
    MeasureConditionError,
    PostprocessError,
    StateConditionError,
)
from qcontract.expressions import eq_state
from qcontract.numerics import StateVector

SQ2 = 1 / math.sqrt(2)


def always_true(pre, post):
    return True


class TestConstruction:
    def test_new_circuit(self):
        circ = ContractCircuit(2)
        assert circ.size == 2
        assert circ.instructions == []
        assert circ.conditions == {}

    def test_size_zero_rejected(self):
        with pytest.raises(BuildError):
            ContractCircuit(0)

    def test_append_gate(self):
        circ = ContractCircuit(2)
        circ.append(gates.h(), [0])
        assert len(circ.instructions) == 1

    def test_append_duplicate_index(self):
        circ = ContractCircuit(2)
        with pytest.raises(BuildError):
            circ.append(gates.cx(), [0, 0])

    def test_append_out_of_range(self):
        circ = ContractCircuit(2)
        with pytest.raises(BuildError):
            circ.append(gates.h(), [5])

    def test_append_arity_mismatch(self):
        circ = ContractCircuit(2)
        with pytest.raises(BuildError):
            circ.append(gates.cx(), [0])

    def test_append_sub_length_mismatch(self):
        sub = ContractCircuit(2)
        parent = ContractCircuit(3)
        with pytest.raises(BuildError):
            parent.append(sub, [0])

    def test_append_sub_duplicate_index(self):
        sub = ContractCircuit(2)
        parent = ContractCircuit(3)
        with pytest.raises(BuildError):
            parent.append(sub, [1, 1])

    def test_duplicate_condition_tag(self):
        circ = ContractCircuit(1)
        circ.add_condition("c", always_true)
        with pytest.raises(BuildError):
            circ.add_condition("c", always_true)


class TestRunState:
    def test_empty_circuit_returns_initial(self):
        circ = ContractCircuit(2)
        initial = StateVector([0.5, 0.5, 0.5, 0.5])
        out = circ.run(initial)
        np.testing.assert_array_equal(out.amps, initial.amps)

    def test_defaults_to_all_zero(self):
        circ = ContractCircuit(2)
        np.testing.assert_array_equal(circ.run().amps, [1, 0, 0, 0])

    def test_initial_size_mismatch(self):
        circ = ContractCircuit(2)
        with pytest.raises(BuildError):
            circ.run(StateVector.zero(3))

    def test_top_level_condition_gets_full_states(self):
        seen = {}

        def capture(pre, post):
            seen["pre"] = pre
            seen["post"] = post
            return True

        circ = ContractCircuit(2)
        circ.append(gates.h(), [0])
        circ.add_condition("cap", capture)
        circ.run()
        np.testing.assert_array_equal(seen["pre"].amps, [1, 0, 0, 0])
        np.testing.assert_allclose(seen["post"].amps, [SQ2, SQ2, 0, 0])

    def test_failing_condition_raises_with_tag(self):
        circ = ContractCircuit(1)
        circ.add_condition("nope", lambda pre, post: False)
        with pytest.raises(StateConditionError) as exc_info:
            circ.run()
        assert exc_info.value.tag == "nope"
        assert "Condition Error occurred in 'nope'" in str(exc_info.value)

    def test_first_failure_stops_evaluation(self):
        calls = []
        circ = ContractCircuit(1)
        circ.add_condition("a", lambda pre, post: calls.append("a") or False)
        circ.add_condition("b", lambda pre, post: calls.append("b") or True)
        with pytest.raises(StateConditionError):
            circ.run()
        assert calls == ["a"]

    def test_conditions_evaluated_in_registration_order(self):
        calls = []
        circ = ContractCircuit(1)
        circ.add_condition("first", lambda pre, post: calls.append("first") or True)
        circ.add_condition("second", lambda pre, post: calls.append("second") or True)
        circ.run()
        assert calls == ["first", "second"]


def make_bell_sub():
    sub = ContractCircuit(2)
    sub.append(gates.h(), [0])
    sub.append(gates.cx(), [0, 1])
    sub.add_condition(
        "bell", lambda pre, post: eq_state(post, StateVector([SQ2, 0, 0, SQ2])))
    return sub


class TestNestedContracts:
    def test_sub_conditions_checked_on_parent_run(self):
        parent = ContractCircuit(2)
        parent.append(make_bell_sub(), [0, 1])
        parent.run()  # bell condition passes

    def test_sub_condition_failure_reports_path(self):
        bad = ContractCircuit(2)
        bad.append(gates.h(), [0])
        bad.add_condition("bell", lambda pre, post: eq_state(
            post, StateVector([SQ2, 0, 0, SQ2])))
        parent = ContractCircuit(2)
        parent.append(gates.x(), [1])
        parent.append(bad, [0, 1])
        with pytest.raises(StateConditionError) as exc_info:
            parent.run()
        assert exc_info.value.tag == "bell"
        assert exc_info.value.path == "top/1"

    def test_sub_sees_partial_states_in_mapped_order(self):
        seen = {}

        def capture(pre, post):
            seen["pre"] = pre
            seen["post"] = post
            return True

        sub = ContractCircuit(1)
        sub.append(gates.x(), [0])
        sub.add_condition("cap", capture)
        parent = ContractCircuit(3)
        parent.append(gates.x(), [2])  # unrelated qubit
        parent.append(sub, [1])
        parent.run()
        np.testing.assert_allclose(seen["pre"].amps, [1, 0])
        np.testing.assert_allclose(seen["post"].amps, [0, 1])

    def test_three_level_nesting_and_paths(self):
        inner = ContractCircuit(1)
        inner.append(gates.x(), [0])
        inner.add_condition("inner_fails", lambda pre, post: False)
        middle = ContractCircuit(2)
        middle.append(gates.h(), [1])
        middle.append(inner, [0])
        outer = ContractCircuit(2)
        outer.append(middle, [0, 1])
        with pytest.raises(StateConditionError) as exc_info:
            outer.run()
        assert exc_info.value.tag == "inner_fails"
        assert exc_info.value.path == "top/0/1"

    def test_entangled_sub_raises(self):
        checked = ContractCircuit(1)
        checked.append(gates.z(), [0])
        checked.add_condition("any", always_true)
        parent = ContractCircuit(2)
        parent.append(gates.h(), [0])
        parent.append(gates.cx(), [0, 1])  # entangles qubits 0 and 1
        parent.append(checked, [0])
        with pytest.raises(EntangledSubsetError) as exc_info:
            parent.run()
        assert exc_info.value.purity == pytest.approx(0.5)
        assert exc_info.value.path == "top/2"

    def test_condition_free_sub_tolerates_entanglement(self):
        plain = ContractCircuit(1)
        plain.append(gates.z(), [0])
        parent = ContractCircuit(2)
        parent.append(gates.h(), [0])
        parent.append(gates.cx(), [0, 1])
        parent.append(plain, [0])
        parent.run()  # no conditions on the sub, so no partial-state extraction

    def test_reentrancy_checks_each_site(self):
        calls = []
        sub = ContractCircuit(1)
        sub.append(gates.x(), [0])
        sub.add_condition("count", lambda pre, post: calls.append(len(calls)) or True)
        parent = ContractCircuit(1)
        parent.append(sub, [0])
        parent.append(sub, [0])
        parent.run()
        assert calls == [0, 1]

    def test_same_sub_at_two_sites_fails_at_second_when_state_differs(self):
        # condition pins the sub's pre-state to |0>; the second invocation sees |1>
        sub = ContractCircuit(1)
        sub.append(gates.x(), [0])
        sub.add_condition("pre_is_zero",
                          lambda pre, post: eq_state(pre, StateVector([1, 0])))
        parent = ContractCircuit(1)
        parent.append(sub, [0])
        parent.append(sub, [0])
        with pytest.raises(StateConditionError) as exc_info:
            parent.run()
        assert exc_info.value.path == "top/1"


class TestFlattening:
    def test_flattened_equals_nested_run(self):
        # conditions disabled for the comparison: condition-free nesting
        rng = np.random.default_rng(33)
        inner = ContractCircuit(2)
        inner.append(gates.h(), [0])
        inner.append(gates.cx(), [0, 1])
        parent = ContractCircuit(3)
        parent.append(gates.rx(0.7), [2])
        parent.append(inner, [2, 0])
        parent.append(gates.t(), [1])
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        initial = StateVector(amps / np.linalg.norm(amps))
        nested = parent.run(initial)
        flat = parent.flattened()
        assert flat.conditions == {}
        assert all(not hasattr(inst, "circuit") for inst in flat.instructions)
        np.testing.assert_allclose(flat.run(initial).amps, nested.amps, atol=1e-12)

    def test_flattened_matches_for_checked_nesting_from_basis_state(self):
        parent = ContractCircuit(2)
        parent.append(make_bell_sub(), [0, 1])
        nested = parent.run()
        np.testing.assert_allclose(parent.flattened().run().amps, nested.amps, atol=1e-12)

    def test_condition_transparency(self):
        base = ContractCircuit(2)
        base.append(gates.h(), [0])
        base.append(gates.cx(), [0, 1])
        with_cond = ContractCircuit(2)
        with_cond.append(gates.h(), [0])
        with_cond.append(gates.cx(), [0, 1])
        with_cond.add_condition("extra", always_true)
        np.testing.assert_array_equal(base.run().amps, with_cond.run().amps)


def fair_coin_circuit():
    circ = ContractCircuit(1)
    circ.append(gates.h(), [0])
    return circ


class TestMeasuredCircuit:
    def test_measure_returns_wrapper_and_leaves_circuit_reusable(self):
        circ = fair_coin_circuit()
        mc = circ.measure([0])
        assert isinstance(mc, MeasuredCircuit)
        assert len(circ.instructions) == 1
        circ.run()

    def test_empty_qubit_list_rejected(self):
        with pytest.raises(BuildError):
            fair_coin_circuit().measure([])

    def test_raw_counts_when_no_postprocess(self):
        mc = fair_coin_circuit().measure([0])
        value, counts = mc.run(shots=1000, seed=3)
        assert value is counts
        assert counts.total_shots == 1000

    def test_postprocess_applied(self):
        mc = fair_coin_circuit().measure([0], postprocess=lambda c: c["0"] - c["1"])
        value, counts = mc.run(shots=1000, seed=3)
        assert value == counts["0"] - counts["1"]

    def test_zero_shots_rejected(self):
        mc = fair_coin_circuit().measure([0])
        with pytest.raises(BuildError):
            mc.run(shots=0)

    def test_measure_condition_receives_pipeline_values(self):
        seen = {}

        def cond(pre_measure_state, counts, value):
            seen["state"] = pre_measure_state
            seen["counts"] = counts
            seen["value"] = value
            return True

        mc = fair_coin_circuit().measure([0], postprocess=lambda c: 42)
        mc.add_condition("c2", cond)
        value, counts = mc.run(shots=100, seed=1)
        assert seen["value"] == 42
        assert seen["counts"] is counts
        np.testing.assert_allclose(seen["state"].amps, [SQ2, SQ2])

    def test_measure_condition_failure(self):
        mc = fair_coin_circuit().measure([0])
        mc.add_condition("never", lambda state, counts, value: False)
        with pytest.raises(MeasureConditionError) as exc_info:
            mc.run(shots=10)
        assert exc_info.value.tag == "never"
        assert "Condition Error occurred in 'never'" in str(exc_info.value)

    def test_duplicate_measure_tag(self):
        mc = fair_coin_circuit().measure([0])
        mc.add_condition("c", lambda s, c, v: True)
        with pytest.raises(BuildError):
            mc.add_condition("c", lambda s, c, v: True)

    def test_postprocess_error_wrapped(self):
        mc = fair_coin_circuit().measure([0], postprocess=lambda c: 1 / 0)
        with pytest.raises(PostprocessError):
            mc.run(shots=10)

    def test_state_violation_propagates(self):
        circ = fair_coin_circuit()
        circ.add_condition("bad", lambda pre, post: False)
        mc = circ.measure([0])
        with pytest.raises(StateConditionError):
            mc.run(shots=10)

    def test_determinism(self):
        mc = fair_coin_circuit().measure([0], postprocess=lambda c: c["0"])
        first = mc.run(shots=5000, seed=11)
        second = mc.run(shots=5000, seed=11)
        assert first[0] == second[0]
        assert first[1] == second[1]

    def test_different_seeds_differ(self):
        mc = fair_coin_circuit().measure([0])
        _, a = mc.run(shots=5000, seed=1)
        _, b = mc.run(shots=5000, seed=2)
        assert a != b

    def test_multi_qubit_counts_key_order(self):
        circ = ContractCircuit(2)
        circ.append(gates.x(), [1])
        mc = circ.measure([1, 0])  # qubit 1 first -> key "10"
        _, counts = mc.run(shots=50, seed=4)
        assert counts["10"] == 50
