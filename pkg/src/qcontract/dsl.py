"""Line-oriented text format for circuits with contracts (``.qc`` files).

Grammar (EBNF; ``#`` comments run to end of line, blank lines ignored)::

    file         = { named_circuit } main_circuit ;
    named_circuit= "circuit" IDENT INT NEWLINE { statement } ;
    main_circuit = "circuit" INT NEWLINE { statement } [ measure ] ;
    statement    = gate_stmt | sub_stmt | assert_stmt ;
    gate_stmt    = gate_name [ "(" scalar ")" ] INT { INT } NEWLINE ;
    gate_name    = IDENT | ("controlled" | "adjoint") "-" IDENT ;
    sub_stmt     = "sub" IDENT INT { INT } NEWLINE ;
    assert_stmt  = "assert" IDENT ":" "post" "==" expr NEWLINE ;
    measure      = "measure" INT { "," INT } "shots" INT
                   [ "expect" IDENT "in" "[" scalar "," scalar "]" ] NEWLINE ;

    expr         = tensor { ("+" | "-") tensor } ;
    tensor       = apply { "^" apply } ;              (* right factor = lower qubits *)
    apply        = unary { ("*" | "/" | "@") unary } ;
    unary        = ("~" | "-") unary | atom ;
    atom         = NUMBER | IMAGINARY | "pi" | KET | "pre" [ "[" INT [ ".." INT ] "]" ]
                 | IDENT [ "(" scalar ")" ] | matrix | "(" expr ")" ;
    matrix       = "[" row { "," row } "]" ;  row = "[" scalar { "," scalar } "]" ;
    scalar       = expr restricted to numbers, "pi", "i", + - * / and parentheses ;

Kets look like ``|01+->``; the rightmost label is qubit 0. Imaginary
literals carry an ``i`` suffix (``0.5i``); a bare ``i`` is the
imaginary unit inside scalar positions (gate parameters, matrix
entries, expect intervals) and the identity gate elsewhere. Assertions
bind ``pre`` to the enclosing circuit's pre-state; ``pre[a..b]`` is the
pure partial state of qubits a..b. Builtin postprocess names for
``expect``: ``real_expectation`` and ``phase``; a measure block without
``expect`` returns raw counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algorithms, gates
from .contracts import ContractCircuit, MeasuredCircuit
from .errors import BuildError
from .expressions import DEFAULT_EQ_TOL, eq_state, partial_state
from .numerics import StateVector

KEYWORDS = {"circuit", "sub", "assert", "measure", "shots", "post", "pre", "expect"}
_KET_LABELS = "01+-"


@dataclass(frozen=True)
class SourceSpan:
    """1-based line/column range; end column is inclusive."""

    line: int
    col_start: int
    col_end: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col_start}-{self.col_end}"


class DslError(Exception):
    """Lexical, syntax, or elaboration error with a source span."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str  # NEWLINE INT REAL IMAG PI KET IDENT keyword-name or operator text
    text: str
    span: SourceSpan
    value: object = None


def _describe(tok: Token) -> str:
    if tok.kind == "NEWLINE":
        return "end of line"
    if tok.kind == "EOF":
        return "end of file"
    return repr(tok.text)


def tokenize(src: str) -> list[Token]:
    """Lex a source string; raises :class:`DslError` on bad input."""
    tokens: list[Token] = []
    line_no = 0
    for raw_line in src.splitlines():
        line_no += 1
        pos = 0
        length = len(raw_line)
        emitted = False

        def span(start: int, end: int) -> SourceSpan:
            return SourceSpan(line_no, start + 1, end)  # end is exclusive index

        while pos < length:
            ch = raw_line[pos]
            if ch in " \t":
                pos += 1
                continue
            if ch == "#":
                break
            start = pos
            if ch.isdigit():
                pos += 1
                while pos < length and raw_line[pos].isdigit():
                    pos += 1
                is_real = False
                if pos < length and raw_line[pos] == "." and not raw_line.startswith("..", pos):
                    is_real = True
                    pos += 1
                    if pos >= length or not raw_line[pos].isdigit():
                        raise DslError("digit expected after decimal point", span(start, pos))
                    while pos < length and raw_line[pos].isdigit():
                        pos += 1
                text = raw_line[start:pos]
                if pos < length and raw_line[pos] == "i" and (
                    pos + 1 >= length or not (raw_line[pos + 1].isalnum() or raw_line[pos + 1] == "_")
                ):
                    pos += 1
                    tokens.append(Token("IMAG", raw_line[start:pos], span(start, pos), complex(0, float(text))))
                elif is_real:
                    tokens.append(Token("REAL", text, span(start, pos), float(text)))
                else:
                    tokens.append(Token("INT", text, span(start, pos), int(text)))
            elif ch.isalpha() or ch == "_":
                pos += 1
                while pos < length and (raw_line[pos].isalnum() or raw_line[pos] == "_"):
                    pos += 1
                text = raw_line[start:pos]
                if text == "pi":
                    tokens.append(Token("PI", text, span(start, pos)))
                elif text in KEYWORDS:
                    tokens.append(Token(text, text, span(start, pos)))
                else:
                    tokens.append(Token("IDENT", text, span(start, pos)))
            elif ch == "|":
                pos += 1
                labels_start = pos
                while pos < length and raw_line[pos] in _KET_LABELS:
                    pos += 1
                if pos >= length or raw_line[pos] != ">":
                    bad = span(pos, pos + 1) if pos < length else span(start, length)
                    raise DslError("unterminated or malformed ket (labels are 0 1 + -)", bad)
                labels = raw_line[labels_start:pos]
                if not labels:
                    raise DslError("empty ket", span(start, pos + 1))
                pos += 1
                tokens.append(Token("KET", raw_line[start:pos], span(start, pos), labels))
            elif raw_line.startswith("==", pos):
                pos += 2
                tokens.append(Token("==", "==", span(start, pos)))
            elif raw_line.startswith("..", pos):
                pos += 2
                tokens.append(Token("..", "..", span(start, pos)))
            elif ch in "+-*/@~^()[],:":
                pos += 1
                tokens.append(Token(ch, ch, span(start, pos)))
            else:
                raise DslError(f"unexpected character {ch!r}", span(start, pos + 1))
            emitted = True
        if emitted:
            # Points just past the content, where a missing token belongs.
            end_col = length + 1
            tokens.append(Token("NEWLINE", "", SourceSpan(line_no, end_col, end_col)))
    tokens.append(Token("EOF", "", SourceSpan(line_no + 1, 1, 1)))
    return tokens


def _merge(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    if a.line != b.line:
        return SourceSpan(a.line, a.col_start, max(a.col_end, a.col_start))
    return SourceSpan(a.line, a.col_start, b.col_end)


# --- expression AST ---------------------------------------------------------


@dataclass
class Num:
    value: complex
    span: SourceSpan = field(compare=False)


@dataclass
class PiConst:
    span: SourceSpan = field(compare=False)


@dataclass
class KetE:
    labels: str
    span: SourceSpan = field(compare=False)


@dataclass
class NameE:
    name: str
    span: SourceSpan = field(compare=False)


@dataclass
class CallE:
    name: str
    arg: "ExprNode"
    span: SourceSpan = field(compare=False)


@dataclass
class MatE:
    rows: list[list["ExprNode"]]
    span: SourceSpan = field(compare=False)


@dataclass
class PreE:
    lo: int | None
    hi: int | None
    span: SourceSpan = field(compare=False)


@dataclass
class UnE:
    op: str
    operand: "ExprNode"
    span: SourceSpan = field(compare=False)


@dataclass
class BinE:
    op: str
    left: "ExprNode"
    right: "ExprNode"
    span: SourceSpan = field(compare=False)


ExprNode = Num | PiConst | KetE | NameE | CallE | MatE | PreE | UnE | BinE


# --- statement AST ----------------------------------------------------------


@dataclass
class GateStmt:
    name: str
    modifier: str | None  # "controlled" | "adjoint" | None
    params: list[ExprNode]
    qubits: list[int]
    span: SourceSpan = field(compare=False)


@dataclass
class SubStmt:
    name: str
    qubits: list[int]
    span: SourceSpan = field(compare=False)


@dataclass
class AssertStmt:
    tag: str
    expr: ExprNode
    span: SourceSpan = field(compare=False)


@dataclass
class MeasureStmt:
    qubits: list[int]
    shots: int
    postprocess: str | None  # None = raw counts
    interval: tuple[ExprNode, ExprNode] | None
    span: SourceSpan = field(compare=False)


@dataclass
class CircuitDef:
    name: str | None  # None = the main circuit
    size: int
    statements: list[GateStmt | SubStmt | AssertStmt]
    span: SourceSpan = field(compare=False)


@dataclass
class CircuitFile:
    definitions: list[CircuitDef]  # named definitions, in order
    main: CircuitDef
    measure: MeasureStmt | None


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            want = what or repr(kind)
            raise DslError(f"expected {want}, found {_describe(tok)}", tok.span)
        return self.advance()

    def skip_newlines(self) -> None:
        while self.peek().kind == "NEWLINE":
            self.advance()

    def end_of_line(self) -> None:
        tok = self.peek()
        if tok.kind == "EOF":
            return
        if tok.kind != "NEWLINE":
            raise DslError(f"unexpected {_describe(tok)} at end of statement", tok.span)
        self.advance()

    # --- file structure ---

    def parse_file(self) -> CircuitFile:
        definitions: list[CircuitDef] = []
        main: CircuitDef | None = None
        measure: MeasureStmt | None = None
        self.skip_newlines()
        while self.peek().kind != "EOF":
            header = self.expect("circuit", "'circuit'")
            if self.peek().kind == "IDENT":
                name = self.advance().text
            else:
                name = None
            size_tok = self.expect("INT", "circuit size")
            if size_tok.value < 1:
                raise DslError(f"circuit size must be >= 1, got {size_tok.value}", size_tok.span)
            self.end_of_line()
            statements, block_measure = self.parse_body(allow_measure=name is None)
            circuit = CircuitDef(name, size_tok.value, statements, header.span)
            if name is None:
                if main is not None:
                    raise DslError("only one unnamed (main) circuit is allowed", header.span)
                main = circuit
                measure = block_measure
            else:
                definitions.append(circuit)
            self.skip_newlines()
        if main is None:
            raise DslError("file has no main circuit", self.peek().span)
        return CircuitFile(definitions, main, measure)

    def parse_body(self, allow_measure: bool):
        statements: list[GateStmt | SubStmt | AssertStmt] = []
        measure: MeasureStmt | None = None
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind in ("EOF", "circuit"):
                return statements, measure
            if measure is not None:
                raise DslError("the measure block must be the last statement", tok.span)
            if tok.kind == "measure":
                if not allow_measure:
                    raise DslError("only the main circuit may carry a measure block", tok.span)
                measure = self.parse_measure()
            elif tok.kind == "sub":
                statements.append(self.parse_sub())
            elif tok.kind == "assert":
                statements.append(self.parse_assert(statements))
            elif tok.kind == "IDENT":
                statements.append(self.parse_gate())
            else:
                raise DslError(f"expected a statement, found {_describe(tok)}", tok.span)

    def parse_gate(self) -> GateStmt:
        name_tok = self.expect("IDENT", "gate name")
        modifier = None
        name = name_tok.text
        end_span = name_tok.span
        if name in ("controlled", "adjoint") and self.peek().kind == "-":
            modifier = name
            self.advance()
            base_tok = self.expect("IDENT", "gate name after modifier")
            name = base_tok.text
            end_span = base_tok.span
        params: list[ExprNode] = []
        if self.peek().kind == "(":
            self.advance()
            params.append(self.parse_expr())
            while self.peek().kind == ",":
                self.advance()
                params.append(self.parse_expr())
            self.expect(")")
        qubits = self.parse_qubit_args()
        self.end_of_line()
        return GateStmt(name, modifier, params, qubits, _merge(name_tok.span, end_span))

    def parse_sub(self) -> SubStmt:
        kw = self.expect("sub")
        name_tok = self.expect("IDENT", "sub-circuit name")
        qubits = self.parse_qubit_args()
        self.end_of_line()
        return SubStmt(name_tok.text, qubits, _merge(kw.span, name_tok.span))

    def parse_qubit_args(self) -> list[int]:
        qubits = []
        if self.peek().kind != "INT":
            tok = self.peek()
            raise DslError(f"expected a qubit index, found {_describe(tok)}", tok.span)
        while self.peek().kind == "INT":
            qubits.append(self.advance().value)
        return qubits

    def parse_assert(self, earlier) -> AssertStmt:
        kw = self.expect("assert")
        tag_tok = self.expect("IDENT", "condition tag")
        for stmt in earlier:
            if isinstance(stmt, AssertStmt) and stmt.tag == tag_tok.text:
                raise DslError(f"duplicate condition tag {tag_tok.text!r}", tag_tok.span)
        self.expect(":")
        self.expect("post", "'post'")
        self.expect("==", "'=='")
        expr = self.parse_expr()
        self.end_of_line()
        return AssertStmt(tag_tok.text, expr, _merge(kw.span, tag_tok.span))

    def parse_measure(self) -> MeasureStmt:
        kw = self.expect("measure")
        qubits = [self.expect("INT", "qubit index").value]
        while self.peek().kind == ",":
            self.advance()
            qubits.append(self.expect("INT", "qubit index").value)
        self.expect("shots", "'shots'")
        shots_tok = self.expect("INT", "shot count")
        postprocess = None
        interval = None
        if self.peek().kind == "expect":
            self.advance()
            name_tok = self.expect("IDENT", "postprocess name")
            postprocess = name_tok.text
            in_tok = self.expect("IDENT", "'in'")
            if in_tok.text != "in":
                raise DslError("expected 'in' after the postprocess name", in_tok.span)
            self.expect("[")
            lo = self.parse_expr()
            self.expect(",")
            hi = self.parse_expr()
            self.expect("]")
            interval = (lo, hi)
        self.end_of_line()
        return MeasureStmt(qubits, shots_tok.value, postprocess, interval, kw.span)

    # --- expressions ---
    # precedence, loosest first: + -  |  ^  |  * / @  |  unary ~ -

    def parse_expr(self) -> ExprNode:
        node = self.parse_tensor()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_tensor()
            node = BinE(op.kind, node, right, _merge(node.span, right.span))
        return node

    def parse_tensor(self) -> ExprNode:
        node = self.parse_apply()
        while self.peek().kind == "^":
            self.advance()
            right = self.parse_apply()
            node = BinE("^", node, right, _merge(node.span, right.span))
        return node

    def parse_apply(self) -> ExprNode:
        node = self.parse_unary()
        while self.peek().kind in ("*", "/", "@"):
            op = self.advance()
            right = self.parse_unary()
            node = BinE(op.kind, node, right, _merge(node.span, right.span))
        return node

    def parse_unary(self) -> ExprNode:
        tok = self.peek()
        if tok.kind in ("~", "-"):
            self.advance()
            operand = self.parse_unary()
            return UnE(tok.kind, operand, _merge(tok.span, operand.span))
        return self.parse_atom()

    def parse_atom(self) -> ExprNode:
        tok = self.peek()
        if tok.kind in ("INT", "REAL"):
            self.advance()
            return Num(complex(tok.value), tok.span)
        if tok.kind == "IMAG":
            self.advance()
            return Num(tok.value, tok.span)
        if tok.kind == "PI":
            self.advance()
            return PiConst(tok.span)
        if tok.kind == "KET":
            self.advance()
            return KetE(tok.value, tok.span)
        if tok.kind == "pre":
            self.advance()
            lo = hi = None
            end = tok.span
            if self.peek().kind == "[":
                self.advance()
                lo_tok = self.expect("INT", "qubit index")
                lo = hi = lo_tok.value
                if self.peek().kind == "..":
                    self.advance()
                    hi = self.expect("INT", "qubit index").value
                end = self.expect("]").span
            return PreE(lo, hi, _merge(tok.span, end))
        if tok.kind == "IDENT":
            self.advance()
            if self.peek().kind == "(":
                self.advance()
                arg = self.parse_expr()
                close = self.expect(")")
                return CallE(tok.text, arg, _merge(tok.span, close.span))
            return NameE(tok.text, tok.span)
        if tok.kind == "[":
            return self.parse_matrix()
        if tok.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        raise DslError(f"expected an expression, found {_describe(tok)}", tok.span)

    def parse_matrix(self) -> MatE:
        open_tok = self.expect("[")
        rows: list[list[ExprNode]] = []
        while True:
            self.expect("[", "a matrix row")
            row = [self.parse_expr()]
            while self.peek().kind == ",":
                self.advance()
                row.append(self.parse_expr())
            self.expect("]")
            rows.append(row)
            if self.peek().kind == ",":
                self.advance()
                continue
            break
        close = self.expect("]")
        return MatE(rows, _merge(open_tok.span, close.span))


def parse_file(src: str) -> CircuitFile:
    """Parse source text into a :class:`CircuitFile` AST."""
    return _Parser(tokenize(src)).parse_file()


# --- pretty printing --------------------------------------------------------


def _fmt_scalar(value: complex) -> str:
    def fmt_real(x: float) -> str:
        return str(int(x)) if float(x).is_integer() else repr(x)

    if value.imag == 0:
        return fmt_real(value.real)
    if value.real == 0:
        return f"{fmt_real(value.imag)}i"
    return f"({fmt_real(value.real)} + {fmt_real(value.imag)}i)"


def _print_expr(node: ExprNode) -> str:
    if isinstance(node, Num):
        return _fmt_scalar(node.value)
    if isinstance(node, PiConst):
        return "pi"
    if isinstance(node, KetE):
        return f"|{node.labels}>"
    if isinstance(node, NameE):
        return node.name
    if isinstance(node, CallE):
        return f"{node.name}({_print_expr(node.arg)})"
    if isinstance(node, MatE):
        rows = ", ".join("[" + ", ".join(_print_expr(e) for e in row) + "]" for row in node.rows)
        return f"[{rows}]"
    if isinstance(node, PreE):
        if node.lo is None:
            return "pre"
        if node.lo == node.hi:
            return f"pre[{node.lo}]"
        return f"pre[{node.lo}..{node.hi}]"
    if isinstance(node, UnE):
        return f"{node.op}({_print_expr(node.operand)})"
    if isinstance(node, BinE):
        return f"({_print_expr(node.left)} {node.op} {_print_expr(node.right)})"
    raise TypeError(f"unknown node {type(node).__name__}")


def pretty_print(cf: CircuitFile) -> str:
    """Canonical source text; reparsing yields a structurally equal AST."""
    lines: list[str] = []

    def emit_body(circ: CircuitDef) -> None:
        header = f"circuit {circ.name} {circ.size}" if circ.name else f"circuit {circ.size}"
        lines.append(header)
        for stmt in circ.statements:
            if isinstance(stmt, GateStmt):
                name = f"{stmt.modifier}-{stmt.name}" if stmt.modifier else stmt.name
                params = f"({', '.join(_print_expr(p) for p in stmt.params)})" if stmt.params else ""
                lines.append(f"{name}{params} " + " ".join(str(q) for q in stmt.qubits))
            elif isinstance(stmt, SubStmt):
                lines.append(f"sub {stmt.name} " + " ".join(str(q) for q in stmt.qubits))
            else:
                lines.append(f"assert {stmt.tag}: post == {_print_expr(stmt.expr)}")

    for definition in cf.definitions:
        emit_body(definition)
        lines.append("")
    emit_body(cf.main)
    if cf.measure is not None:
        m = cf.measure
        line = "measure " + ", ".join(str(q) for q in m.qubits) + f" shots {m.shots}"
        if m.postprocess is not None and m.interval is not None:
            lo, hi = m.interval
            line += f" expect {m.postprocess} in [{_print_expr(lo)}, {_print_expr(hi)}]"
        lines.append(line)
    return "\n".join(lines) + "\n"


# --- elaboration ------------------------------------------------------------


class _Elab:
    """Typed, dimension-checked evaluator for one expression node."""

    __slots__ = ("kind", "dim", "fn")

    def __init__(self, kind: str, dim: int, fn):
        self.kind = kind  # "scalar" | "state" | "op" | "bra"
        self.dim = dim  # qubit count for state/op/bra, 0 for scalar
        self.fn = fn  # (pre: StateVector) -> complex | np.ndarray


def _fold_scalar(node: ExprNode) -> complex:
    """Constant-fold a scalar context expression; bare ``i`` is the
    imaginary unit here."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, PiConst):
        return complex(math.pi)
    if isinstance(node, NameE):
        if node.name == "i":
            return 1j
        raise DslError(f"expected a number, found {node.name!r}", node.span)
    if isinstance(node, UnE):
        if node.op == "-":
            return -_fold_scalar(node.operand)
        raise DslError("'~' is not valid in a scalar position", node.span)
    if isinstance(node, BinE):
        if node.op in "+-*/":
            left = _fold_scalar(node.left)
            right = _fold_scalar(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if right == 0:
                raise DslError("division by zero", node.span)
            return left / right
        raise DslError(f"operator {node.op!r} is not valid in a scalar position", node.span)
    raise DslError("expected a number", node.span)


def _fold_angle(node: ExprNode) -> float:
    value = _fold_scalar(node)
    if abs(value.imag) > 1e-12:
        raise DslError("gate angle must be real", node.span)
    return value.real


def _gate_from_stmt(stmt: GateStmt) -> gates.GateSpec:
    params = tuple(_fold_angle(p) for p in stmt.params)
    try:
        base = gates.by_name(stmt.name, params)
    except KeyError:
        raise DslError(f"unknown gate {stmt.name!r}", stmt.span) from None
    except ValueError as exc:
        raise DslError(str(exc), stmt.span) from None
    if stmt.modifier == "controlled":
        return gates.controlled(base)
    if stmt.modifier == "adjoint":
        return gates.adjoint(base)
    return base


def _elab_expr(node: ExprNode, size: int) -> _Elab:
    if isinstance(node, (Num, PiConst)):
        value = complex(math.pi) if isinstance(node, PiConst) else node.value
        return _Elab("scalar", 0, lambda pre, v=value: v)
    if isinstance(node, KetE):
        vec = StateVector.from_labels(node.labels).amps
        return _Elab("state", len(node.labels), lambda pre, v=vec: v)
    if isinstance(node, PreE):
        if node.lo is None:
            return _Elab("state", size, lambda pre: pre.amps)
        lo, hi = node.lo, node.hi
        if lo > hi:
            raise DslError(f"empty qubit range {lo}..{hi}", node.span)
        if hi >= size:
            raise DslError(f"qubit {hi} out of range for a {size}-qubit circuit", node.span)
        qubits = list(range(lo, hi + 1))
        return _Elab("state", len(qubits), lambda pre, q=qubits: partial_state(pre, q).amps)
    if isinstance(node, NameE):
        try:
            gate = gates.by_name(node.name)
        except KeyError:
            raise DslError(f"unknown name {node.name!r} in expression", node.span) from None
        except ValueError as exc:
            raise DslError(str(exc), node.span) from None
        return _Elab("op", gate.arity, lambda pre, m=gate.matrix: m)
    if isinstance(node, CallE):
        angle = _fold_angle(node.arg)
        try:
            gate = gates.by_name(node.name, (angle,))
        except KeyError:
            raise DslError(f"unknown gate {node.name!r}", node.span) from None
        except ValueError as exc:
            raise DslError(str(exc), node.span) from None
        return _Elab("op", gate.arity, lambda pre, m=gate.matrix: m)
    if isinstance(node, MatE):
        width = len(node.rows[0])
        if any(len(row) != width for row in node.rows):
            raise DslError("matrix rows must have equal length", node.span)
        if len(node.rows) != width:
            raise DslError("matrix must be square", node.span)
        if width < 2 or width & (width - 1):
            raise DslError("matrix dimension must be a power of two", node.span)
        matrix = np.array([[_fold_scalar(e) for e in row] for row in node.rows], dtype=np.complex128)
        return _Elab("op", width.bit_length() - 1, lambda pre, m=matrix: m)
    if isinstance(node, UnE):
        operand = _elab_expr(node.operand, size)
        if node.op == "-":
            if operand.kind == "bra":
                raise DslError("cannot negate a bra", node.span)
            return _Elab(operand.kind, operand.dim, lambda pre, f=operand.fn: -f(pre))
        # ~
        if operand.kind == "state":
            return _Elab("bra", operand.dim, lambda pre, f=operand.fn: np.conj(f(pre)))
        if operand.kind == "op":
            return _Elab("op", operand.dim, lambda pre, f=operand.fn: f(pre).conj().T)
        if operand.kind == "scalar":
            return _Elab("scalar", 0, lambda pre, f=operand.fn: np.conj(f(pre)))
        raise DslError("cannot take the adjoint of a bra", node.span)
    if isinstance(node, BinE):
        return _elab_binary(node, size)
    raise DslError("malformed expression", node.span)


def _elab_binary(node: BinE, size: int) -> _Elab:
    left = _elab_expr(node.left, size)
    right = _elab_expr(node.right, size)
    op = node.op
    if op in ("+", "-"):
        if left.kind != right.kind or left.kind not in ("scalar", "state", "op"):
            raise DslError(f"cannot apply {op!r} to {left.kind} and {right.kind}", node.span)
        if left.dim != right.dim:
            raise DslError(
                f"dimension mismatch: {left.dim} vs {right.dim} qubits", node.span)
        sign = 1 if op == "+" else -1
        return _Elab(left.kind, left.dim,
                     lambda pre, f=left.fn, g=right.fn, s=sign: f(pre) + s * g(pre))
    if op == "*":
        if left.kind == "scalar" and right.kind in ("scalar", "state", "op"):
            return _Elab(right.kind, right.dim,
                         lambda pre, f=left.fn, g=right.fn: f(pre) * g(pre))
        if right.kind == "scalar" and left.kind in ("state", "op"):
            return _Elab(left.kind, left.dim,
                         lambda pre, f=left.fn, g=right.fn: g(pre) * f(pre))
        raise DslError(f"cannot multiply {left.kind} by {right.kind}", node.span)
    if op == "/":
        if right.kind != "scalar" or left.kind == "bra":
            raise DslError(f"cannot divide {left.kind} by {right.kind}", node.span)

        def divide(pre, f=left.fn, g=right.fn, span=node.span):
            divisor = g(pre)
            if divisor == 0:
                raise DslError("division by zero", span)
            return f(pre) / divisor

        return _Elab(left.kind, left.dim, divide)
    if op == "@":
        if left.kind == "op" and right.kind == "state":
            if left.dim != right.dim:
                raise DslError(
                    f"operator on {left.dim} qubit(s) cannot act on a {right.dim}-qubit state",
                    node.span)
            return _Elab("state", right.dim,
                         lambda pre, f=left.fn, g=right.fn: f(pre) @ g(pre))
        if left.kind == "op" and right.kind == "op":
            if left.dim != right.dim:
                raise DslError(f"operator dimension mismatch: {left.dim} vs {right.dim}", node.span)
            return _Elab("op", left.dim, lambda pre, f=left.fn, g=right.fn: f(pre) @ g(pre))
        if left.kind == "bra" and right.kind == "op":
            if left.dim != right.dim:
                raise DslError(f"dimension mismatch: {left.dim} vs {right.dim}", node.span)
            return _Elab("bra", left.dim, lambda pre, f=left.fn, g=right.fn: f(pre) @ g(pre))
        if left.kind == "bra" and right.kind == "state":
            if left.dim != right.dim:
                raise DslError(f"dimension mismatch: {left.dim} vs {right.dim}", node.span)
            return _Elab("scalar", 0, lambda pre, f=left.fn, g=right.fn: complex(f(pre) @ g(pre)))
        raise DslError(f"cannot apply {left.kind} to {right.kind} with '@'", node.span)
    if op == "^":
        if left.kind == "state" and right.kind == "state":
            return _Elab("state", left.dim + right.dim,
                         lambda pre, f=left.fn, g=right.fn: np.kron(f(pre), g(pre)))
        if left.kind == "op" and right.kind == "op":
            return _Elab("op", left.dim + right.dim,
                         lambda pre, f=left.fn, g=right.fn: np.kron(f(pre), g(pre)))
        raise DslError(f"cannot tensor {left.kind} with {right.kind}", node.span)
    raise DslError(f"unknown operator {op!r}", node.span)


_POSTPROCESS = {
    "real_expectation": algorithms.estimate_real_expectation,
    "phase": algorithms.decode_phase,
}


def _interval_value(value) -> float:
    if isinstance(value, algorithms.PhaseEstimate):
        return value.phase
    return float(value)


def _elab_circuit(circ_def: CircuitDef, named: dict[str, ContractCircuit],
                  eq_tol: float) -> ContractCircuit:
    circuit = ContractCircuit(circ_def.size)
    for stmt in circ_def.statements:
        if isinstance(stmt, GateStmt):
            gate = _gate_from_stmt(stmt)
            try:
                circuit.append(gate, stmt.qubits)
            except BuildError as exc:
                raise DslError(str(exc), stmt.span) from None
        elif isinstance(stmt, SubStmt):
            if stmt.name not in named:
                raise DslError(f"unknown sub-circuit {stmt.name!r}", stmt.span)
            try:
                circuit.append(named[stmt.name], stmt.qubits)
            except BuildError as exc:
                raise DslError(str(exc), stmt.span) from None
        else:
            elab = _elab_expr(stmt.expr, circ_def.size)
            if elab.kind != "state":
                raise DslError(f"assertion must describe a state, got {elab.kind}", stmt.expr.span)
            if elab.dim != circ_def.size:
                raise DslError(
                    f"assertion describes {elab.dim} qubit(s), circuit has {circ_def.size}",
                    stmt.expr.span)

            def predicate(pre: StateVector, post: StateVector,
                          fn=elab.fn, tol=eq_tol) -> bool:
                return eq_state(post, StateVector(fn(pre), copy=False), tol)

            circuit.add_condition(stmt.tag, predicate)
    return circuit


def elaborate(cf: CircuitFile, eq_tol: float = DEFAULT_EQ_TOL) -> ContractCircuit | MeasuredCircuit:
    """Resolve names and build a runnable circuit from a parsed file.

    Returns a :class:`MeasuredCircuit` when the file has a measure
    block, otherwise the plain :class:`ContractCircuit`.
    """
    named: dict[str, ContractCircuit] = {}
    for definition in cf.definitions:
        if definition.name in named:
            raise DslError(f"duplicate circuit name {definition.name!r}", definition.span)
        named[definition.name] = _elab_circuit(definition, named, eq_tol)
    main = _elab_circuit(cf.main, named, eq_tol)
    if cf.measure is None:
        return main

    m = cf.measure
    if m.shots < 1:
        raise DslError(f"shots must be >= 1, got {m.shots}", m.span)
    postprocess = None
    if m.postprocess is not None:
        if m.postprocess not in _POSTPROCESS:
            raise DslError(
                f"unknown postprocess {m.postprocess!r} (choose from {sorted(_POSTPROCESS)})",
                m.span)
        postprocess = _POSTPROCESS[m.postprocess]
    try:
        measured = main.measure(m.qubits, postprocess)
    except BuildError as exc:
        raise DslError(str(exc), m.span) from None
    measured.default_shots = m.shots
    if m.interval is not None:
        lo = _fold_scalar(m.interval[0])
        hi = _fold_scalar(m.interval[1])
        if abs(lo.imag) > 1e-12 or abs(hi.imag) > 1e-12:
            raise DslError("interval bounds must be real", m.span)

        def in_interval(pre_measure_state, counts, value,
                        lo=lo.real, hi=hi.real) -> bool:
            return lo <= _interval_value(value) <= hi

        measured.add_condition(f"expect_{m.postprocess}", in_interval)
    return measured


def load_file(path, eq_tol: float = DEFAULT_EQ_TOL):
    """Parse and elaborate a ``.qc`` file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return elaborate(parse_file(fh.read()), eq_tol)
