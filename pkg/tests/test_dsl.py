import math
import pathlib
import re

import numpy as np
import pytest

from qcontract import gates
from qcontract.algorithms import hadamard_test_circuit
from qcontract.contracts import ContractCircuit, MeasuredCircuit
from qcontract.dsl import (
    DslError,
    elaborate,
    load_file,
    parse_file,
    pretty_print,
    tokenize,
)
from qcontract.errors import MeasureConditionError, StateConditionError
from qcontract.expressions import GateOp
from qcontract.numerics import StateVector, tensor_states

DATA = pathlib.Path(__file__).parent / "data"
CIRCUITS = pathlib.Path(__file__).parent.parent / "circuits"

VALID_FILES = sorted(CIRCUITS.glob("*.qc"))
MALFORMED_FILES = sorted((DATA / "malformed").glob("*.qc"))


class TestTokenize:
    def test_gate_line(self):
        kinds = [(t.kind, t.value) for t in tokenize("h 0")]
        assert kinds == [("IDENT", None), ("INT", 0), ("NEWLINE", None), ("EOF", None)]

    def test_ket(self):
        tok = tokenize("|+0>")[0]
        assert tok.kind == "KET"
        assert tok.value == "+0"

    def test_parameterized_gate(self):
        kinds = [t.kind for t in tokenize("rz(pi/4) 1")]
        assert kinds == ["IDENT", "(", "PI", "/", "INT", ")", "INT", "NEWLINE", "EOF"]

    def test_imaginary_literal(self):
        tok = tokenize("0.5i")[0]
        assert tok.kind == "IMAG"
        assert tok.value == 0.5j

    def test_range_token_after_int(self):
        kinds = [t.kind for t in tokenize("pre[1..3]")]
        assert kinds == ["pre", "[", "INT", "..", "INT", "]", "NEWLINE", "EOF"]

    def test_comments_ignored(self):
        assert [t.kind for t in tokenize("# only a comment")] == ["EOF"]

    def test_spans_are_one_based_inclusive(self):
        tok = tokenize("  h 0")[0]
        assert (tok.span.line, tok.span.col_start, tok.span.col_end) == (1, 3, 3)

    def test_lexical_error_position(self):
        with pytest.raises(DslError) as exc_info:
            tokenize("h 0 $")
        assert exc_info.value.span.col_start == 5


HT_SOURCE = """\
circuit ht 2
h 0
controlled-t 0 1
h 0
assert c1: post == (pre[1] + t @ pre[1]) / 2 ^ |0> + (pre[1] - t @ pre[1]) / 2 ^ |1>

circuit 2
h 1
sub ht 0 1
measure 0 shots 100000 expect real_expectation in [0.8436, 0.8636]
"""


class TestParse:
    def test_hadamard_test_file_shape(self):
        cf = parse_file(HT_SOURCE)
        assert len(cf.definitions) == 1
        assert cf.definitions[0].name == "ht"
        assert cf.definitions[0].size == 2
        assert cf.main.size == 2
        assert cf.measure is not None
        assert cf.measure.qubits == [0]
        assert cf.measure.shots == 100_000
        assert cf.measure.postprocess == "real_expectation"

    def test_precedence_tensor_binds_looser_than_divide(self):
        # (x + y) / 2 ^ |0>  ==  ((x + y, scaled)  tensor  |0>)
        cf = parse_file("circuit 2\nassert a: post == (|0> + |1>) / 2 ^ |0>\n")
        expr = cf.main.statements[0].expr
        assert expr.op == "^"
        assert expr.left.op == "/"
        assert expr.right.labels == "0"

    def test_precedence_plus_binds_loosest(self):
        cf = parse_file("circuit 2\nassert a: post == |0> ^ |0> + |1> ^ |1>\n")
        expr = cf.main.statements[0].expr
        assert expr.op == "+"
        assert expr.left.op == "^"
        assert expr.right.op == "^"

    def test_bra_form_parses(self):
        cf = parse_file("circuit 1\nassert a: post == ~|+> @ t @ |+> * |0>\n")
        assert cf.main.statements[0].expr.op == "*"

    def test_modifier_gate(self):
        cf = parse_file("circuit 2\ncontrolled-t 0 1\n")
        stmt = cf.main.statements[0]
        assert stmt.modifier == "controlled"
        assert stmt.name == "t"
        assert stmt.qubits == [0, 1]

    def test_empty_file_rejected(self):
        with pytest.raises(DslError):
            parse_file("")

    def test_two_main_circuits_rejected(self):
        with pytest.raises(DslError):
            parse_file("circuit 1\nh 0\ncircuit 1\nh 0\n")


class TestValidCorpus:
    def test_corpus_is_large_enough(self):
        assert len(VALID_FILES) >= 3
        assert any(f.name == "hadamard_test.qc" for f in VALID_FILES)
        assert len(MALFORMED_FILES) >= 20

    @pytest.mark.parametrize("path", VALID_FILES, ids=lambda p: p.name)
    def test_parses(self, path):
        cf = parse_file(path.read_text())
        assert cf.main is not None

    @pytest.mark.parametrize("path", VALID_FILES, ids=lambda p: p.name)
    def test_round_trip(self, path):
        cf = parse_file(path.read_text())
        printed = pretty_print(cf)
        cf2 = parse_file(printed)
        assert cf2.definitions == cf.definitions
        assert cf2.main == cf.main
        assert cf2.measure == cf.measure
        # and printing is a fixed point after one normalization
        assert pretty_print(cf2) == printed

    def test_hadamard_test_runs_in_declared_interval(self):
        runnable = load_file(CIRCUITS / "hadamard_test.qc")
        assert isinstance(runnable, MeasuredCircuit)
        value, _ = runnable.run(seed=1)
        assert 0.8436 <= value <= 0.8636

    def test_wrong_gate_variant_fails_condition1(self):
        runnable = load_file(CIRCUITS / "hadamard_test_wrong_gate.qc")
        with pytest.raises(StateConditionError) as exc_info:
            runnable.run(seed=1)
        assert exc_info.value.tag == "c1"

    def test_declared_shots_become_default(self):
        runnable = load_file(CIRCUITS / "bell.qc")
        assert runnable.default_shots == 4096
        _, counts = runnable.run(seed=1)
        assert counts.total_shots == 4096

    def test_qft2_contract_holds_on_random_inputs(self):
        circ = load_file(CIRCUITS / "qft2.qc")
        assert isinstance(circ, ContractCircuit)
        rng = np.random.default_rng(10)
        for _ in range(5):
            amps = rng.normal(size=4) + 1j * rng.normal(size=4)
            circ.run(StateVector(amps / np.linalg.norm(amps)))


class TestMalformedCorpus:
    @pytest.mark.parametrize("path", MALFORMED_FILES, ids=lambda p: p.name)
    def test_error_span_encloses_offending_lexeme(self, path):
        text = path.read_text()
        annotation = re.match(r"# error: (\d+):(\d+)", text)
        assert annotation, f"{path.name} is missing its # error: annotation"
        line, col = int(annotation.group(1)), int(annotation.group(2))
        with pytest.raises(DslError) as exc_info:
            elaborate(parse_file(text))
        span = exc_info.value.span
        assert span.line == line, f"reported {span}, annotated {line}:{col}"
        assert span.col_start <= col <= span.col_end, f"reported {span}, annotated {line}:{col}"
        assert span.col_end >= span.col_start


class TestElaborate:
    def test_gate_params_fold_constants(self):
        circ = elaborate(parse_file("circuit 1\nrz(pi/4) 0\n"))
        gate = circ.instructions[0].gate
        assert gate.name == "rz"
        assert gate.params[0] == pytest.approx(math.pi / 4)

    def test_imaginary_unit_in_matrix_entries(self):
        src = "circuit 1\nassert a: post == [[1, 0], [0, i]] @ pre\n"
        circ = elaborate(parse_file(src))
        circ.append(gates.s(), [0])  # appended after the assert; conditions are circuit-level
        circ2 = elaborate(parse_file(src))
        circ2.append(gates.s(), [0])
        circ2.run()  # S == diag(1, i): contract passes

    def test_bare_i_in_expression_is_identity_gate(self):
        circ = elaborate(parse_file("circuit 1\nassert a: post == i @ pre\n"))
        circ.run()

    def test_no_asserts_runs_unconditionally(self):
        circ = elaborate(parse_file("circuit 1\nh 0\n"))
        assert circ.conditions == {}
        circ.run()

    def test_interval_violation_raises(self):
        src = "circuit 1\nmeasure 0 shots 100 expect real_expectation in [-0.5, 0.5]\n"
        mc = elaborate(parse_file(src))
        with pytest.raises(MeasureConditionError) as exc_info:
            mc.run(seed=1)  # |0> measures all zeros: estimate 1.0
        assert exc_info.value.tag == "expect_real_expectation"

    def test_tolerance_override_loosens_assert(self):
        # post is |1>, contract says |0>: passes only with an absurd tolerance
        src = "circuit 1\nx 0\nassert a: post == |0>\n"
        strict = elaborate(parse_file(src))
        with pytest.raises(StateConditionError):
            strict.run()
        sloppy = elaborate(parse_file(src), eq_tol=1.5)
        sloppy.run()

    def test_phase_postprocess(self):
        src = "circuit 1\nx 0\nmeasure 0 shots 50 expect phase in [0.4, 0.6]\n"
        mc = elaborate(parse_file(src))
        estimate, _ = mc.run(seed=1)
        assert estimate.phase == 0.5


class TestDeclarativeMatchesHostApi:
    """The .qc assert and the host-API predicate must agree on pass/fail
    for matched correct/corrupted circuit pairs."""

    CASES = [
        ("t", "t", True),
        ("s", "t", False),
        ("t", "s", False),
        ("h", "h", True),
        ("z", "z", True),
        ("x", "z", False),
    ]

    @staticmethod
    def _dsl_outcome(gate_name: str, reference: str) -> bool:
        src = (
            "circuit ht 2\n"
            "h 0\n"
            f"controlled-{gate_name} 0 1\n"
            "h 0\n"
            f"assert c1: post == (pre[1] + {reference} @ pre[1]) / 2 ^ |0>"
            f" + (pre[1] - {reference} @ pre[1]) / 2 ^ |1>\n"
            "\n"
            "circuit 2\n"
            "h 1\n"
            "sub ht 0 1\n"
        )
        try:
            elaborate(parse_file(src)).run()
            return True
        except StateConditionError as exc:
            assert exc.tag == "c1"
            return False

    @staticmethod
    def _host_outcome(gate_name: str, reference: str) -> bool:
        circ = hadamard_test_circuit(gates.by_name(gate_name), GateOp(gates.by_name(reference)))
        initial = tensor_states(StateVector.from_labels("+"), StateVector.from_labels("0"))
        try:
            circ.run(initial)
            return True
        except StateConditionError as exc:
            assert exc.tag == "condition1"
            return False

    @pytest.mark.parametrize("gate_name,reference,expected", CASES)
    def test_same_verdict(self, gate_name, reference, expected):
        assert self._dsl_outcome(gate_name, reference) == expected
        assert self._host_outcome(gate_name, reference) == expected
