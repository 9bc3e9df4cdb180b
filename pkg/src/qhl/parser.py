"""Lexer and recursive-descent parser for spec files and standalone phrases.

A spec file is a list of declarations (qubits, variables, gates, projectors,
states, interpretations) followed by named programs, triples and proof
scripts. The phrase-level entry points (:func:`parse_command`,
:func:`parse_assertion`, :func:`parse_real`, :func:`parse_formula`) accept an
optional :class:`SpecFile` supplying declarations.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import ast as A
from .errors import ParseError, SpecError
from .gates import BUILTIN_GATES, oracle_gate, user_gate

PROB_SUM_TOL = 1e-9
PROJECTOR_TOL = 1e-9
INT64_MIN, INT64_MAX = -(2 ** 63), 2 ** 63 - 1


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<imag>(?:\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)i(?![A-Za-z0-9_]))
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ket>\|[01]+>)
  | (?P<rvar>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><-\$|<<=|<-|<=|>=|!=|&&|\|\||->|=>|\.\.|[=<>!+\-*()\[\]{},;:.@])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "skip", "if", "then", "else", "while", "do", "true", "false", "forall",
    "bigand", "sum", "mask", "matrix", "Proj",
}


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parsed document


@dataclass
class SpecFile:
    num_qubits: int = 0
    vars: tuple = ()
    logvar_ranges: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)
    projectors: dict = field(default_factory=dict)
    programs: dict = field(default_factory=dict)
    triples: dict = field(default_factory=dict)
    proofs: dict = field(default_factory=dict)
    states: dict = field(default_factory=dict)
    mixed: dict = field(default_factory=dict)
    interps: dict = field(default_factory=dict)
    triple_interps: dict = field(default_factory=dict)

    def gate(self, name: str):
        return self.gates.get(name) or BUILTIN_GATES.get(name)


@dataclass(frozen=True)
class StateDecl:
    """A declared pure state: classical store plus amplitude vector."""

    store: tuple
    amplitudes: tuple


@dataclass(frozen=True)
class InterpDecl:
    logical: tuple
    real: tuple


_QUBIT_RE = re.compile(r"q(\d+)$")


class Parser:
    def __init__(self, text: str, spec: SpecFile | None = None):
        self.toks = tokenize(text)
        self.pos = 0
        self.spec = spec if spec is not None else SpecFile()
        self.bound: list = []
        self._rel_fail: set = set()

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.pos += 1
        return t.text

    def integer(self) -> int:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "int":
            raise self.error(f"expected integer, found {t.text or 'end of input'!r}")
        self.pos += 1
        return -int(t.text) if neg else int(t.text)

    def number(self) -> float:
        neg = self.accept("-")
        t = self.tok
        if t.kind not in ("int", "real"):
            raise self.error(f"expected number, found {t.text or 'end of input'!r}")
        self.pos += 1
        val = float(t.text)
        return -val if neg else val

    def attempt(self, fn):
        saved = self.pos
        try:
            return fn()
        except ParseError:
            self.pos = saved
            return None

    def done(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")

    # -- qubits and gates --------------------------------------------------

    def qubit(self) -> int:
        t = self.tok
        if t.kind == "int":
            self.pos += 1
            q = int(t.text)
        elif t.kind == "ident" and _QUBIT_RE.match(t.text):
            self.pos += 1
            q = int(t.text[1:])
        else:
            raise self.error(f"expected qubit, found {t.text or 'end of input'!r}")
        if q < 1 or (self.spec.num_qubits and q > self.spec.num_qubits):
            raise self.error(f"qubit {q} out of range 1..{self.spec.num_qubits}", t)
        return q

    def gate_app(self):
        t = self.tok
        name = self.ident()
        gate = self.spec.gate(name)
        if gate is None:
            raise self.error(f"unknown gate {name!r}", t)
        self.expect("[")
        qubits = [self.qubit()]
        while self.accept(","):
            qubits.append(self.qubit())
        self.expect("]")
        if len(qubits) != gate.arity:
            raise self.error(f"arity mismatch: gate {name} acts on {gate.arity} qubits, given {len(qubits)}", t)
        if len(set(qubits)) != len(qubits):
            raise self.error(f"repeated qubit in {name}{qubits}", t)
        return gate, tuple(qubits)

    # -- arithmetic --------------------------------------------------------

    def aexp(self):
        left = self.aterm()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.pos += 1
            left = A.ABin(op, left, self.aterm())
        return left

    def aterm(self):
        left = self.afactor()
        while self.at("*"):
            self.pos += 1
            left = A.ABin("*", left, self.afactor())
        return left

    def afactor(self):
        t = self.tok
        if self.at("-"):
            self.pos += 1
            if self.tok.kind == "int":
                return A.Num(self._int_literal(-int(self.toks[self.pos].text), t, advance=True))
            return A.ABin("-", A.Num(0), self.afactor())
        if t.kind == "int":
            self.pos += 1
            return A.Num(self._int_literal(int(t.text), t))
        if self.accept("("):
            e = self.aexp()
            self.expect(")")
            return e
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.pos += 1
            return self.var_ref(t.text)
        raise self.error(f"expected arithmetic expression, found {t.text or 'end of input'!r}")

    def _int_literal(self, value: int, tok: Token, advance: bool = False) -> int:
        if advance:
            self.pos += 1
        if not INT64_MIN <= value <= INT64_MAX:
            raise self.error(f"integer literal {value} outside 64-bit range", tok)
        return value

    def var_ref(self, name: str):
        if name in self.bound or name in self.spec.logvar_ranges:
            return A.LVar(name)
        if name in self.spec.vars:
            return A.PVar(name)
        return A.PVar(name) if name[0].isupper() else A.LVar(name)

    # -- deterministic assertions ------------------------------------------

    def dassert(self):
        left = self.d_or()
        if self.accept("->"):
            return A.Implies(left, self.dassert())
        return left

    def d_or(self):
        left = self.d_and()
        while self.accept("||"):
            left = A.Or(left, self.d_and())
        return left

    def d_and(self):
        left = self.d_unary()
        while self.accept("&&"):
            left = A.And(left, self.d_unary())
        return left

    def d_unary(self):
        if self.accept("!"):
            return A.Not(self.d_unary())
        if self.at("forall"):
            self.pos += 1
            var = self.ident()
            self.expect(".")
            self.bound.append(var)
            try:
                body = self.dassert()
            finally:
                self.bound.pop()
            return A.Forall(var, body)
        if self.at("["):
            self.pos += 1
            if self.accept("Proj"):
                j = self.qubit()
                self.expect(",")
                t = self.tok
                i = self.integer()
                if i not in (0, 1):
                    raise self.error("projection outcome must be 0 or 1", t)
                self.expect("]")
                return A.BoxProj(j, i, self.d_unary())
            gate, qubits = self.gate_app()
            self.expect("]")
            return A.BoxU(gate, qubits, self.d_unary())
        return self.d_atom()

    def d_atom(self):
        t = self.tok
        if self.accept("true"):
            return A.TRUE
        if self.accept("false"):
            return A.FALSE
        if t.kind == "ident" and t.text in ("P0", "P1") and self.peek().text == "(":
            self.pos += 2
            j = self.qubit()
            self.expect(")")
            return A.Proj(j, int(t.text[1]))
        if self.accept("bigand"):
            self.expect("[")
            terms = [self.dassert()]
            while self.accept(","):
                terms.append(self.dassert())
            self.expect("]")
            return A.BigAnd(tuple(terms))
        if self.pos not in self._rel_fail:
            start = self.pos
            rel = self.attempt(self.d_rel)
            if rel is not None:
                return rel
            self._rel_fail.add(start)
        if self.accept("("):
            body = self.dassert()
            self.expect(")")
            return body
        raise self.error(f"expected assertion, found {t.text or 'end of input'!r}")

    def d_rel(self):
        left = self.aexp()
        t = self.tok
        if t.kind != "op" or t.text not in A.REL_OPS:
            raise self.error("expected relational operator")
        self.pos += 1
        return A.Rel(t.text, left, self.aexp())

    # -- real expressions --------------------------------------------------

    def rexp(self):
        left = self.rterm()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.pos += 1
            left = A.RBin(op, left, self.rterm())
        return left

    def rterm(self):
        left = self.rfactor()
        while self.at("*"):
            self.pos += 1
            left = A.RBin("*", left, self.rfactor())
        return left

    def rfactor(self):
        t = self.tok
        if self.at("-") and self.peek().kind in ("int", "real"):
            return A.RConst(self.number())
        if t.kind in ("int", "real"):
            return A.RConst(self.number())
        if t.kind == "rvar":
            self.pos += 1
            return A.RVar(t.text[1:])
        if t.kind == "ident" and t.text == "P" and self.peek().text == "[":
            self.pos += 2
            body = self.dassert()
            self.expect("]")
            return A.Prob(body)
        if self.accept("sum"):
            self.expect("[")
            terms = [self.rexp()]
            while self.accept(","):
                terms.append(self.rexp())
            self.expect("]")
            return A.BoundedSum(tuple(terms))
        if self.at("("):
            cq = self.attempt(self.cq_cond)
            if cq is not None:
                return cq
            self.pos += 1
            r = self.rexp()
            self.expect(")")
            return r
        raise self.error(f"expected real expression, found {t.text or 'end of input'!r}")

    def cq_cond(self):
        self.expect("(")
        cond = self.dassert()
        self.expect("=>")
        proj = self.projector_ref()
        self.expect(")")
        return A.CqCond(cond, proj)

    def projector_ref(self):
        t = self.tok
        if self.accept("mask"):
            return A.MaskProjector(self.mask_patterns())
        if self.accept("matrix"):
            matrix = self.square_matrix()
            return make_dense_projector(None, matrix, self, t)
        name = self.ident()
        if name not in self.spec.projectors:
            raise self.error(f"unknown projector {name!r}", t)
        return self.spec.projectors[name]

    def mask_patterns(self) -> tuple:
        self.expect("[")
        patterns = []
        if not self.at("]"):
            patterns.append(self.mask_pattern())
            while self.accept(","):
                patterns.append(self.mask_pattern())
        self.expect("]")
        lengths = {len(p) for p in patterns}
        if len(lengths) > 1:
            raise self.error("mask patterns have different lengths")
        if patterns and self.spec.num_qubits and len(patterns[0]) != self.spec.num_qubits:
            raise self.error(f"mask pattern length {len(patterns[0])} differs from {self.spec.num_qubits} qubits")
        return tuple(patterns)

    def mask_pattern(self) -> str:
        out = ""
        while self.tok.kind == "int" or self.at("*"):
            out += self.tok.text
            self.pos += 1
        if not out or set(out) - set("01*"):
            raise self.error(f"bad mask pattern {out!r}")
        return out

    def complex_entry(self) -> complex:
        neg = self.accept("-")
        t = self.tok
        if t.kind == "imag":
            self.pos += 1
            val = complex(0, float(t.text[:-1]))
            return -val if neg else val
        if t.kind not in ("int", "real"):
            raise self.error(f"expected complex number, found {t.text or 'end of input'!r}")
        self.pos += 1
        re_part = -float(t.text) if neg else float(t.text)
        if self.tok.text in ("+", "-") and self.peek().kind == "imag":
            sign = -1.0 if self.tok.text == "-" else 1.0
            self.pos += 1
            im = float(self.tok.text[:-1])
            self.pos += 1
            return complex(re_part, sign * im)
        return complex(re_part, 0.0)

    def complex_list(self) -> list:
        self.expect("[")
        vals = [self.complex_entry()]
        while self.accept(","):
            vals.append(self.complex_entry())
        self.expect("]")
        return vals

    def square_matrix(self, dim: int | None = None) -> np.ndarray:
        t = self.tok
        vals = self.complex_list()
        n = dim if dim is not None else math.isqrt(len(vals))
        if n * n != len(vals):
            raise self.error(f"matrix needs {n * n if dim else 'a square number of'} entries, got {len(vals)}", t)
        return np.array(vals, dtype=complex).reshape(n, n)

    # -- probabilistic formulas --------------------------------------------

    def pformula(self):
        left = self.p_or()
        if self.accept("->"):
            right = self.pformula()
            return A.PNot(A.PAnd(left, A.PNot(right)))
        return left

    def p_or(self):
        left = self.p_and()
        while self.accept("||"):
            right = self.p_and()
            left = A.PNot(A.PAnd(A.PNot(left), A.PNot(right)))
        return left

    def p_and(self):
        left = self.p_unary()
        while self.accept("&&"):
            left = A.PAnd(left, self.p_unary())
        return left

    def p_unary(self):
        if self.accept("!"):
            return A.PNot(self.p_unary())
        rel = self.attempt(self.p_rel)
        if rel is not None:
            return rel
        if self.accept("("):
            body = self.pformula()
            self.expect(")")
            return body
        raise self.error(f"expected probabilistic formula, found {self.tok.text or 'end of input'!r}")

    def p_rel(self):
        left = self.rexp()
        t = self.tok
        if t.kind != "op" or t.text not in A.REL_OPS:
            raise self.error("expected relational operator")
        self.pos += 1
        return A.PRel(t.text, left, self.rexp())

    # -- commands ----------------------------------------------------------

    def command(self):
        first = self.stmt()
        if self.accept(";"):
            return A.Seq(first, self.command())
        return first

    def stmt(self):
        t = self.tok
        if self.accept("skip"):
            return A.SKIP
        if self.accept("if"):
            cond = self.guard()
            self.expect("then")
            then = self.stmt()
            self.expect("else")
            return A.If(cond, then, self.stmt())
        if self.accept("while"):
            cond = self.guard()
            self.expect("do")
            return A.While(cond, self.stmt())
        if self.accept("("):
            c = self.command()
            self.expect(")")
            return c
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected command, found {t.text or 'end of input'!r}")
        nxt = self.peek().text
        if nxt == "[":
            gate, qubits = self.gate_app()
            return A.Apply(gate, qubits)
        if nxt in ("<-", "<-$", "<<="):
            var = self.prog_var()
            if self.accept("<-"):
                return A.Assign(var, self.program_aexp())
            if self.accept("<-$"):
                return A.RandAssign(var, self.rand_branches(t))
            self.expect("<<=")
            return A.Measure(var, self.qubit())
        raise self.error(f"expected command, found {t.text!r}")

    def prog_var(self) -> str:
        t = self.tok
        name = self.ident()
        if self.spec.vars and name not in self.spec.vars:
            raise self.error(f"undeclared program variable {name!r}", t)
        return name

    def program_aexp(self):
        t = self.tok
        e = self.aexp()
        if _mentions_logvar(e):
            raise self.error("logical variables cannot appear in programs", t)
        return e

    def guard(self):
        t = self.tok
        g = self.dassert()
        if not A.is_guard(g):
            raise self.error("guard must be a Boolean expression over program variables", t)
        return g

    def rand_branches(self, tok: Token) -> tuple:
        self.expect("{")
        branches = []
        while True:
            p = self.number()
            self.expect(":")
            branches.append((p, self.integer()))
            if not self.accept(","):
                break
        self.expect("}")
        check_branches(branches, self, tok)
        return tuple(branches)


def _mentions_logvar(e) -> bool:
    if isinstance(e, A.LVar):
        return True
    if isinstance(e, A.ABin):
        return _mentions_logvar(e.left) or _mentions_logvar(e.right)
    return False


def check_branches(branches, parser: Parser | None = None, tok: Token | None = None) -> None:
    def fail(msg):
        if parser is not None:
            raise parser.error(msg, tok)
        raise SpecError(msg)

    for p, _ in branches:
        if not 0.0 < p < 1.0:
            fail(f"branch probability {p:g} not strictly between 0 and 1")
    total = math.fsum(p for p, _ in branches)
    if abs(total - 1.0) > PROB_SUM_TOL:
        fail(f"probabilities sum to {total:.12g} ≠ 1")


def make_dense_projector(name, matrix: np.ndarray, parser: Parser | None = None, tok: Token | None = None):
    herm = np.abs(matrix - matrix.conj().T).max()
    idem = np.abs(matrix @ matrix - matrix).max()
    if herm >= PROJECTOR_TOL or idem >= PROJECTOR_TOL:
        msg = f"projector {name or 'matrix'}: not Hermitian idempotent (deviations {herm:.3g}, {idem:.3g})"
        if parser is not None:
            raise parser.error(msg, tok)
        raise SpecError(msg)
    return A.DenseProjector.from_matrix(name, matrix)


# ---------------------------------------------------------------------------
# Spec-file sections


class SpecParser(Parser):
    def parse_file(self) -> SpecFile:
        while self.tok.kind != "eof":
            t = self.tok
            word = self.ident()
            handler = getattr(self, "decl_" + word.replace("-", "_"), None)
            if handler is None:
                raise self.error(f"unknown declaration {word!r}", t)
            handler(t)
        return self.spec

    def _fresh(self, table: dict, name: str, tok: Token, what: str):
        if name in table:
            raise self.error(f"duplicate {what} {name!r}", tok)

    def decl_qubits(self, tok):
        t = self.tok
        n = self.integer()
        if n < 1:
            raise self.error("qubit count must be positive", t)
        self.spec.num_qubits = n

    def decl_vars(self, tok):
        names = [self.ident()]
        while self.accept(","):
            names.append(self.ident())
        self.spec.vars = tuple(dict.fromkeys(self.spec.vars + tuple(names)))

    def decl_logvars(self, tok):
        while True:
            name = self.ident()
            self.expect(":")
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            if hi < lo:
                raise self.error(f"empty range {lo}..{hi} for {name}")
            self.spec.logvar_ranges[name] = (lo, hi)
            if not self.accept(","):
                break

    def decl_gate(self, tok):
        t = self.tok
        name = self.ident()
        if name in BUILTIN_GATES:
            raise self.error(f"cannot redefine builtin gate {name}", t)
        self._fresh(self.spec.gates, name, t, "gate")
        self.expect("dim")
        dim = self.integer()
        self.expect("matrix")
        matrix = self.square_matrix(dim)
        try:
            self.spec.gates[name] = user_gate(name, matrix)
        except SpecError as exc:
            raise self.error(str(exc), t) from None

    def decl_oracle(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.gates, name, t, "gate")
        self.expect("table")
        table = {}
        while True:
            bits_tok = self.tok
            if bits_tok.kind != "int" or set(bits_tok.text) - set("01"):
                raise self.error("expected input bit string")
            self.pos += 1
            self.expect("->")
            table[bits_tok.text] = self.integer()
            if not self.accept(","):
                break
        try:
            self.spec.gates[name] = oracle_gate(name, table)
        except SpecError as exc:
            raise self.error(str(exc), t) from None

    def decl_projector(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.projectors, name, t, "projector")
        if self.accept("mask"):
            pats = []
            if self.at("["):
                pats = list(self.mask_patterns())
            else:
                pats.append(self.mask_pattern())
                while self.accept(","):
                    pats.append(self.mask_pattern())
            self.spec.projectors[name] = A.MaskProjector(tuple(pats), name)
        else:
            self.expect("matrix")
            self.spec.projectors[name] = make_dense_projector(name, self.square_matrix(), self, t)

    def decl_program(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.programs, name, t, "program")
        self.expect("{")
        self.spec.programs[name] = self.command()
        self.expect("}")

    def braced_assertion(self, sort: str):
        """Parse ``{ ... }`` as a deterministic assertion or a probabilistic formula."""
        self.expect("{")
        start = self.pos
        if sort != "prob":
            def det():
                d = self.dassert()
                self.expect("}")
                return d
            d = self.attempt(det)
            if d is not None:
                return d, "det"
            if sort == "det":
                self.pos = start
                det()
        self.pos = start
        f = self.pformula()
        self.expect("}")
        return f, "prob"

    def triple_body(self, sort: str, name: str | None, tok: Token):
        pre, s1 = self.braced_assertion(sort)
        if self.tok.kind == "ident" and self.peek().text == "{" and self.tok.text in self.spec.programs:
            prog = self.spec.programs[self.ident()]
        else:
            prog = self.command()
        post, s2 = self.braced_assertion(sort if sort != "auto" else s1)
        if s1 != s2:
            raise self.error("pre- and postcondition have different sorts", tok)
        return A.Triple(pre, prog, post, s1, name)

    def decl_triple(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.triples, name, t, "triple")
        sort = "auto"
        if self.accept("prob"):
            sort = "prob"
        elif self.accept("det"):
            sort = "det"
        self.spec.triples[name] = self.triple_body(sort, name, t)
        if self.accept("using"):
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            for n in names:
                if n not in self.spec.interps:
                    raise self.error(f"unknown interpretation {n!r}")
            self.spec.triple_interps[name] = tuple(names)

    def decl_proof(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.proofs, name, t, "proof")
        sort = "det"
        if self.accept("prob"):
            sort = "prob"
        else:
            self.accept("det")
        target = None
        if self.accept("for"):
            target = self.ident()
            if target not in self.spec.triples:
                raise self.error(f"unknown triple {target!r}")
        self.expect("{")
        steps = []
        labels = set()
        while not self.at("}"):
            lt = self.tok
            label = self.ident()
            if label in labels:
                raise self.error(f"duplicate step label {label!r}", lt)
            self.expect(":")
            rt = self.tok
            rule = self.ident()
            if rule not in A.DET_RULES:
                raise self.error(f"unknown rule {rule!r}", rt)
            premises = []
            if self.accept("from"):
                while True:
                    pt = self.tok
                    p = self.ident()
                    if p not in labels:
                        raise self.error(f"premise {p!r} is not an earlier step", pt)
                    premises.append(p)
                    if not self.accept(","):
                        break
            triple = self.triple_body(sort, None, lt)
            labels.add(label)
            steps.append(A.ProofStep(label, rule, tuple(premises), triple, lt.line))
        self.expect("}")
        if not steps:
            raise self.error("proof has no steps", t)
        self.spec.proofs[name] = A.ProofScript(name, sort, tuple(steps), target)

    def decl_state(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.states, name, t, "state")
        store = self.store_literal()
        m = self.spec.num_qubits
        kt = self.tok
        if kt.kind == "ket":
            bits = kt.text[1:-1]
            self.pos += 1
            if m and len(bits) != m:
                raise self.error(f"ket has {len(bits)} qubits, expected {m}", kt)
            amps = [0j] * (2 ** len(bits))
            amps[int(bits, 2)] = 1 + 0j
        else:
            self.expect("amps")
            amps = self.complex_list()
            if m and len(amps) != 2 ** m:
                raise self.error(f"expected {2 ** m} amplitudes, got {len(amps)}", kt)
            norm = math.sqrt(sum(abs(a) ** 2 for a in amps))
            if abs(norm - 1) > 1e-9:
                raise self.error(f"amplitude vector has norm {norm:.12g}", kt)
        self.spec.states[name] = StateDecl(store, tuple(amps))

    def store_literal(self) -> tuple:
        self.expect("{")
        items = {}
        while not self.at("}"):
            vt = self.tok
            var = self.ident()
            if self.spec.vars and var not in self.spec.vars:
                raise self.error(f"undeclared program variable {var!r}", vt)
            self.expect("=")
            items[var] = self.integer()
            if not self.accept(","):
                break
        self.expect("}")
        missing = [v for v in self.spec.vars if v not in items]
        for v in missing:
            items[v] = 0
        return tuple(sorted(items.items()))

    def decl_mixed(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.mixed, name, t, "mixed state")
        self.expect("{")
        parts = []
        while True:
            w = self.number()
            self.expect(":")
            st = self.tok
            sname = self.ident()
            if sname not in self.spec.states:
                raise self.error(f"unknown state {sname!r}", st)
            parts.append((w, sname))
            if not self.accept(","):
                break
        self.expect("}")
        if any(w < 0 for w, _ in parts) or math.fsum(w for w, _ in parts) > 1 + PROB_SUM_TOL:
            raise self.error("mixture weights must be nonnegative with total at most 1", t)
        self.spec.mixed[name] = tuple(parts)

    def decl_interp(self, tok):
        t = self.tok
        name = self.ident()
        self._fresh(self.spec.interps, name, t, "interpretation")
        self.expect("{")
        logical, real = {}, {}
        while not self.at("}"):
            vt = self.tok
            if vt.kind == "rvar":
                self.pos += 1
                self.expect("=")
                real[vt.text[1:]] = self.number()
            else:
                var = self.ident()
                self.expect("=")
                logical[var] = self.integer()
            if not self.accept(","):
                break
        self.expect("}")
        self.spec.interps[name] = InterpDecl(tuple(sorted(logical.items())), tuple(sorted(real.items())))


# ---------------------------------------------------------------------------
# Entry points


def parse_spec(text: str) -> SpecFile:
    return SpecParser(text).parse_file()


def _phrase(text: str, spec: SpecFile | None, rule: str):
    p = Parser(text, spec)
    node = getattr(p, rule)()
    p.done()
    return node


def parse_command(text: str, spec: SpecFile | None = None):
    return _phrase(text, spec, "command")


def parse_assertion(text: str, spec: SpecFile | None = None):
    return _phrase(text, spec, "dassert")


def parse_arith(text: str, spec: SpecFile | None = None):
    return _phrase(text, spec, "aexp")


def parse_real(text: str, spec: SpecFile | None = None):
    return _phrase(text, spec, "rexp")


def parse_formula(text: str, spec: SpecFile | None = None):
    return _phrase(text, spec, "pformula")
