"""Abstract syntax for programs, assertions, real expressions and formulas.

All nodes are frozen dataclasses, so trees are immutable and may share
subtrees freely. The transformers in :mod:`qhl.wpcalc` rely on that sharing to
keep loop preconditions from blowing up.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Union

import numpy as np

ARITH_OPS = ("+", "-", "*")
REL_OPS = ("=", "!=", "<", "<=", ">", ">=")


# ---------------------------------------------------------------------------
# Gates and projectors


@dataclass(frozen=True)
class Gate:
    """A named unitary acting on ``arity`` qubits.

    The matrix is stored row-major as a tuple of complex numbers so the gate
    can live inside hashable syntax trees.
    """

    name: str
    arity: int
    data: tuple = field(repr=False)
    kind: str = "builtin"

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        dim = 2 ** self.arity
        return np.array(self.data, dtype=complex).reshape(dim, dim)

    @classmethod
    def from_matrix(cls, name: str, matrix, kind: str = "matrix") -> "Gate":
        matrix = np.asarray(matrix, dtype=complex)
        dim = matrix.shape[0]
        arity = int(round(np.log2(dim)))
        if matrix.shape != (dim, dim) or 2 ** arity != dim:
            raise ValueError(f"gate {name}: matrix must be square with power-of-two size")
        return cls(name, arity, tuple(complex(z) for z in matrix.ravel()), kind)


@dataclass(frozen=True)
class MaskProjector:
    """Diagonal projector onto basis states matching any of ``patterns``.

    Each pattern is a string over ``0``, ``1`` and ``*`` with one character per
    qubit, qubit 1 first. An empty pattern set is the zero projector.
    """

    patterns: tuple
    name: str | None = None

    @property
    def num_qubits(self) -> int | None:
        return len(self.patterns[0]) if self.patterns else None


@dataclass(frozen=True)
class DenseProjector:
    """Dense Hermitian idempotent matrix; ``name`` is None for computed ones."""

    name: str | None
    dim: int
    data: tuple = field(repr=False)

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.data, dtype=complex).reshape(self.dim, self.dim)

    @classmethod
    def from_matrix(cls, name: str | None, matrix) -> "DenseProjector":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(name, matrix.shape[0], tuple(complex(z) for z in matrix.ravel()))


Projector = Union[MaskProjector, DenseProjector]


# ---------------------------------------------------------------------------
# Arithmetic expressions


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class PVar:
    """Program variable."""

    name: str


@dataclass(frozen=True)
class LVar:
    """Logical variable, only meaningful inside assertions."""

    name: str


@dataclass(frozen=True)
class ABin:
    op: str
    left: "Arith"
    right: "Arith"


Arith = Union[Num, PVar, LVar, ABin]


# ---------------------------------------------------------------------------
# Deterministic assertions. Program guards use the Top/Bot/Rel/Not/And subset.


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Proj:
    """Atomic assertion that qubit ``qubit`` is in basis state ``bit``."""

    qubit: int
    bit: int


@dataclass(frozen=True)
class Rel:
    op: str
    left: Arith
    right: Arith


@dataclass(frozen=True)
class Not:
    body: "Assertion"


@dataclass(frozen=True)
class And:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Assertion"


@dataclass(frozen=True)
class BoxU:
    """``[U_q] body``: body holds after applying ``gate`` to ``qubits``."""

    gate: Gate
    qubits: tuple
    body: "Assertion"


@dataclass(frozen=True)
class BoxProj:
    """``[Proj j,i] body``: body holds after projecting qubit j onto |i>."""

    qubit: int
    bit: int
    body: "Assertion"


@dataclass(frozen=True)
class BigAnd:
    """Finite prefix of an infinitary conjunction; ``bound`` is its last index."""

    terms: tuple

    @property
    def bound(self) -> int:
        return len(self.terms) - 1


Assertion = Union[Top, Bot, Proj, Rel, Not, And, Forall, BoxU, BoxProj, BigAnd]

TRUE = Top()
FALSE = Bot()


def Or(left: Assertion, right: Assertion) -> Not:
    return Not(And(Not(left), Not(right)))


def Implies(left: Assertion, right: Assertion) -> Not:
    return Not(And(left, Not(right)))


def conj(items) -> Assertion:
    """Left-nested conjunction of a non-empty sequence."""
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for item in items[1:]:
        out = And(out, item)
    return out


# ---------------------------------------------------------------------------
# Real expressions and probabilistic formulas


@dataclass(frozen=True)
class RConst:
    value: float


@dataclass(frozen=True)
class RVar:
    name: str


@dataclass(frozen=True)
class Prob:
    """Probability mass of the supports satisfying ``body``."""

    body: Assertion


@dataclass(frozen=True)
class RBin:
    op: str
    left: "Real"
    right: "Real"


@dataclass(frozen=True)
class CqCond:
    """``(cond => proj)``: expectation of ``proj`` over supports satisfying ``cond``."""

    cond: Assertion
    proj: Projector


@dataclass(frozen=True)
class BoundedSum:
    terms: tuple

    @property
    def bound(self) -> int:
        return len(self.terms) - 1


Real = Union[RConst, RVar, Prob, RBin, CqCond, BoundedSum]


def rsum(items) -> Real:
    items = list(items)
    if not items:
        return RConst(0.0)
    out = items[0]
    for item in items[1:]:
        out = RBin("+", out, item)
    return out


@dataclass(frozen=True)
class PRel:
    op: str
    left: Real
    right: Real


@dataclass(frozen=True)
class PNot:
    body: "Formula"


@dataclass(frozen=True)
class PAnd:
    left: "Formula"
    right: "Formula"


Formula = Union[PRel, PNot, PAnd]


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Arith


@dataclass(frozen=True)
class RandAssign:
    """``var <-$ {p1: v1, ...}``; ``branches`` is a tuple of (probability, value)."""

    var: str
    branches: tuple


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class If:
    cond: Assertion
    then: "Command"
    orelse: "Command"


@dataclass(frozen=True)
class While:
    cond: Assertion
    body: "Command"


@dataclass(frozen=True)
class Apply:
    gate: Gate
    qubits: tuple


@dataclass(frozen=True)
class Measure:
    var: str
    qubit: int


Command = Union[Skip, Assign, RandAssign, Seq, If, While, Apply, Measure]

SKIP = Skip()


def seq(commands) -> Command:
    """Right-nested sequence, matching how the parser reads ``a; b; c``."""
    commands = list(commands)
    if not commands:
        return SKIP
    out = commands[-1]
    for cmd in reversed(commands[:-1]):
        out = Seq(cmd, out)
    return out


def flatten_seq(cmd: Command) -> list:
    if isinstance(cmd, Seq):
        return flatten_seq(cmd.first) + flatten_seq(cmd.second)
    return [cmd]


# ---------------------------------------------------------------------------
# Triples and proof scripts


@dataclass(frozen=True)
class Triple:
    pre: object
    prog: Command
    post: object
    sort: str = "det"
    name: str | None = None


@dataclass(frozen=True)
class ProofStep:
    label: str
    rule: str
    premises: tuple
    conclusion: Triple
    line: int = 0


@dataclass(frozen=True)
class ProofScript:
    name: str
    sort: str
    steps: tuple
    target: str | None = None

    @property
    def root(self) -> ProofStep:
        return self.steps[-1]


DET_RULES = ("SKIP", "AS", "PAS", "SEQ", "IF", "WHILE", "UNITARY", "MEASURE", "CONS")
PROB_RULES = DET_RULES


# ---------------------------------------------------------------------------
# Queries


def is_guard(node) -> bool:
    """True when ``node`` is a program-level Boolean expression."""
    if isinstance(node, (Top, Bot)):
        return True
    if isinstance(node, Rel):
        return not (_has_logvar(node.left) or _has_logvar(node.right))
    if isinstance(node, Not):
        return is_guard(node.body)
    if isinstance(node, And):
        return is_guard(node.left) and is_guard(node.right)
    return False


def _has_logvar(e: Arith) -> bool:
    if isinstance(e, LVar):
        return True
    if isinstance(e, ABin):
        return _has_logvar(e.left) or _has_logvar(e.right)
    return False


def node_kinds(node) -> set:
    """Names of all node classes reachable from ``node`` (DAG-aware)."""
    seen: set = set()
    kinds: set = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        kinds.add(type(n).__name__)
        stack.extend(_children(n))
    return kinds


def _children(n):
    if isinstance(n, (ABin, And, RBin, PAnd)):
        return (n.left, n.right)
    if isinstance(n, (Rel, PRel)):
        return (n.left, n.right)
    if isinstance(n, (Not, Forall, BoxU, BoxProj, PNot)):
        return (n.body,)
    if isinstance(n, (BigAnd, BoundedSum)):
        return n.terms
    if isinstance(n, Prob):
        return (n.body,)
    if isinstance(n, CqCond):
        return (n.cond,)
    if isinstance(n, Seq):
        return (n.first, n.second)
    if isinstance(n, If):
        return (n.cond, n.then, n.orelse)
    if isinstance(n, While):
        return (n.cond, n.body)
    if isinstance(n, Assign):
        return (n.expr,)
    if isinstance(n, Triple):
        return (n.pre, n.prog, n.post)
    return ()


def tree_size(node, limit: int | None = None) -> int:
    """Number of nodes in the fully unshared tree, computed on the DAG."""
    memo: dict = {}

    def go(n):
        key = id(n)
        if key in memo:
            return memo[key][1]
        size = 1 + sum(go(c) for c in _children(n))
        memo[key] = (n, size)
        return size

    return go(node)


def free_prog_vars(node, _memo=None) -> frozenset:
    """Program variables occurring anywhere in ``node``."""
    memo = {} if _memo is None else _memo
    key = id(node)
    if key in memo:
        return memo[key][1]
    if isinstance(node, PVar):
        out = frozenset((node.name,))
    else:
        out = frozenset()
        for c in _children(node):
            out |= free_prog_vars(c, memo)
    memo[key] = (node, out)
    return out
