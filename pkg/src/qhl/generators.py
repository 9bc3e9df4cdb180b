"""Random syntax trees and states for property tests.

Every generator draws from a ``numpy.random.Generator`` so a single integer
seed reproduces a case. Programs are loop-free unless ``loops`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ast as A
from .checker import haar_vector, structured_vector
from .cqstate import Distribution, PureState
from .gates import BUILTIN_GATES

ONE_QUBIT = ("H", "X", "Y", "Z", "S", "T")
TWO_QUBIT = ("CX", "CZ", "SWAP")

# branch tables for random assignment; all probabilities exact in binary or short decimals
_BRANCH_TABLES = ((0.5, 0.5), (0.25, 0.75), (0.3, 0.7), (0.2, 0.3, 0.5), (0.125, 0.375, 0.5))


@dataclass(frozen=True)
class GenConfig:
    num_qubits: int = 2
    vars: tuple = ("X", "Y")
    values: tuple = (-2, 2)
    max_commands: int = 5
    max_depth: int = 3
    loops: bool = False


class AstGen:
    """Random programs, assertions, real expressions and formulas."""

    def __init__(self, rng: np.random.Generator, cfg: GenConfig = GenConfig()):
        self.rng = rng
        self.cfg = cfg

    def _pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def _value(self) -> int:
        lo, hi = self.cfg.values
        return int(self.rng.integers(lo, hi + 1))

    def _qubit(self) -> int:
        return int(self.rng.integers(1, self.cfg.num_qubits + 1))

    # -- expressions --------------------------------------------------------

    def arith(self, depth: int = 2):
        if depth <= 0 or self.rng.random() < 0.5:
            if self.cfg.vars and self.rng.random() < 0.6:
                return A.PVar(self._pick(self.cfg.vars))
            return A.Num(self._value())
        return A.ABin(self._pick(A.ARITH_OPS), self.arith(depth - 1), self.arith(depth - 1))

    def rel(self):
        return A.Rel(self._pick(A.REL_OPS), self.arith(1), self.arith(1))

    def guard(self, depth: int = 2):
        roll = self.rng.random()
        if depth <= 0 or roll < 0.5:
            if roll < 0.05:
                return A.Top()
            if roll < 0.08:
                return A.Bot()
            return self.rel()
        if roll < 0.7:
            return A.Not(self.guard(depth - 1))
        return A.And(self.guard(depth - 1), self.guard(depth - 1))

    def gate_call(self):
        m = self.cfg.num_qubits
        if m >= 2 and self.rng.random() < 0.35:
            q1, q2 = (int(q) + 1 for q in self.rng.permutation(m)[:2])
            return BUILTIN_GATES[self._pick(TWO_QUBIT)], (q1, q2)
        return BUILTIN_GATES[self._pick(ONE_QUBIT)], (self._qubit(),)

    def assertion(self, depth: int | None = None):
        depth = self.cfg.max_depth if depth is None else depth
        roll = self.rng.random()
        if depth <= 0 or roll < 0.35:
            if roll < 0.04:
                return A.Top()
            if roll < 0.07:
                return A.Bot()
            if roll < 0.2:
                return A.Proj(self._qubit(), int(self.rng.integers(2)))
            return self.rel()
        if roll < 0.5:
            return A.Not(self.assertion(depth - 1))
        if roll < 0.7:
            return A.And(self.assertion(depth - 1), self.assertion(depth - 1))
        if roll < 0.85:
            gate, qubits = self.gate_call()
            return A.BoxU(gate, qubits, self.assertion(depth - 1))
        return A.BoxProj(self._qubit(), int(self.rng.integers(2)), self.assertion(depth - 1))

    def mask(self):
        """Random diagonal projector given by a non-empty set of basis patterns."""
        m = self.cfg.num_qubits
        k = int(self.rng.integers(1, 2 ** m + 1))
        chosen = sorted(int(i) for i in self.rng.choice(2 ** m, size=k, replace=False))
        return A.MaskProjector(tuple(format(i, f"0{m}b") for i in chosen))

    def real_atom(self, cq: bool = True):
        if cq and self.rng.random() < 0.4:
            return A.CqCond(self.assertion(1), self.mask())
        return A.Prob(self.assertion(2))

    def real(self, depth: int = 2, cq: bool = True):
        roll = self.rng.random()
        if depth <= 0 or roll < 0.45:
            if roll < 0.1:
                return A.RConst(round(float(self.rng.uniform(-1, 1)), 3))
            return self.real_atom(cq)
        if roll < 0.9:
            return A.RBin(self._pick(("+", "-", "*")), self.real(depth - 1, cq), self.real(depth - 1, cq))
        return A.BoundedSum(tuple(self.real(depth - 1, cq) for _ in range(int(self.rng.integers(1, 4)))))

    def formula(self, depth: int = 2, cq: bool = True):
        roll = self.rng.random()
        if depth <= 0 or roll < 0.5:
            rhs = A.RConst(round(float(self.rng.uniform(0, 1)), 6)) if roll < 0.35 else self.real(1, cq)
            return A.PRel(self._pick(A.REL_OPS), self.real(1, cq), rhs)
        if roll < 0.7:
            return A.PNot(self.formula(depth - 1, cq))
        return A.PAnd(self.formula(depth - 1, cq), self.formula(depth - 1, cq))

    # -- commands -----------------------------------------------------------

    def command(self, budget: int | None = None):
        """Random program with at most ``budget`` atomic commands."""
        budget = self.cfg.max_commands if budget is None else budget
        n = int(self.rng.integers(1, budget + 1))
        parts = []
        while n > 0:
            c, used = self._stmt(n)
            parts.append(c)
            n -= used
        return A.seq(parts)

    def _stmt(self, budget: int):
        roll = self.rng.random()
        vars_ = self.cfg.vars
        if budget >= 3 and roll < 0.12:
            left = int(self.rng.integers(1, budget - 1))
            then = self.command(left)
            orelse = self.command(budget - 1 - left)
            return A.If(self.guard(), then, orelse), budget
        if self.cfg.loops and budget >= 2 and roll < 0.18:
            var = self._pick(vars_)
            body = A.seq([A.Assign(var, A.ABin("-", A.PVar(var), A.Num(1))), self.command(budget - 1)])
            return A.While(A.Rel(">", A.PVar(var), A.Num(0)), body), budget
        roll = self.rng.random()
        if roll < 0.08 or not vars_ and roll < 0.3:
            return A.Skip(), 1
        if vars_ and roll < 0.3:
            return A.Assign(self._pick(vars_), self.arith(1)), 1
        if vars_ and roll < 0.45:
            table = self._pick(_BRANCH_TABLES)
            return A.RandAssign(self._pick(vars_), tuple((p, self._value()) for p in table)), 1
        if vars_ and roll < 0.65:
            return A.Measure(self._pick(vars_), self._qubit()), 1
        gate, qubits = self.gate_call()
        return A.Apply(gate, qubits), 1


class StateGen:
    """Random cq-states mixing basis, structured and Haar vectors."""

    def __init__(self, rng: np.random.Generator, cfg: GenConfig = GenConfig()):
        self.rng = rng
        self.cfg = cfg

    def vector(self) -> np.ndarray:
        m = self.cfg.num_qubits
        roll = self.rng.random()
        if roll < 0.25:
            vec = np.zeros(2 ** m, dtype=complex)
            vec[int(self.rng.integers(2 ** m))] = 1
            return vec
        if roll < 0.65:
            return structured_vector(self.rng, m)
        return haar_vector(self.rng, m)

    def pure(self) -> PureState:
        lo, hi = self.cfg.values
        store = {v: int(self.rng.integers(lo, hi + 1)) for v in self.cfg.vars}
        return PureState.make(store, self.vector())

    def mixed(self, max_parts: int = 4, sub: bool = False) -> Distribution:
        """Random distribution; with ``sub`` the total mass may be below one."""
        k = int(self.rng.integers(1, max_parts + 1))
        weights = self.rng.dirichlet(np.ones(k))
        if sub:
            weights = weights * float(self.rng.uniform(0.3, 1.0))
        return Distribution((self.pure(), float(w)) for w in weights)
