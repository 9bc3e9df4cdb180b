"""Satisfaction of deterministic assertions, values of real expressions, and
truth of probabilistic formulas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ast as A
from .cqstate import Distribution, Interpretation, PureState, apply_gate, expect_projector, project, point_dist
from .errors import EvaluationError
from .semantics import compare, eval_arith


@dataclass(frozen=True)
class SatConfig:
    atol: float = 1e-9

    def __post_init__(self):
        if self.atol <= 0:
            raise ValueError("atol must be positive")


DEFAULT_SAT = SatConfig()
EMPTY_INTERP = Interpretation()

RANGE_BOUNDED = "range-bounded"
VACUOUS_PROJECTION = "vacuous-projection"


class Evaluator:
    """Evaluates assertions and terms under one interpretation.

    Results are memoized by node identity and state, so a DAG with heavy
    sharing (loop preconditions) is evaluated once per distinct subterm.
    ``flags`` collects report labels such as ``range-bounded``.
    """

    def __init__(self, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT):
        self.interp = interp if interp is not None else EMPTY_INTERP
        self.cfg = cfg
        self.flags: set = set()
        self._sat_memo: dict = {}
        self._real_memo: dict = {}

    # -- deterministic assertions -------------------------------------------

    def sat(self, phi, state: PureState) -> bool:
        logical = self.interp.logical
        return self._sat(phi, state, logical, tuple(sorted(logical.items())))

    def _sat(self, phi, state: PureState, logical: dict, lkey: tuple) -> bool:
        key = (id(phi), state.key, lkey)
        hit = self._sat_memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._sat_uncached(phi, state, logical, lkey)
        self._sat_memo[key] = (phi, out)
        return out

    def _sat_uncached(self, phi, state, logical, lkey) -> bool:
        if isinstance(phi, A.Top):
            return True
        if isinstance(phi, A.Bot):
            return False
        if isinstance(phi, A.Proj):
            if phi.qubit > state.num_qubits:
                raise EvaluationError(f"qubit {phi.qubit} out of range")
            p, _ = project(state.vector, phi.qubit, phi.bit)
            return p >= 1 - self.cfg.atol
        if isinstance(phi, A.Rel):
            env = state.env
            return compare(phi.op, eval_arith(phi.left, env, logical), eval_arith(phi.right, env, logical))
        if isinstance(phi, A.Not):
            return not self._sat(phi.body, state, logical, lkey)
        if isinstance(phi, A.And):
            return self._sat(phi.left, state, logical, lkey) and self._sat(phi.right, state, logical, lkey)
        if isinstance(phi, A.BigAnd):
            return all(self._sat(t, state, logical, lkey) for t in phi.terms)
        if isinstance(phi, A.BoxU):
            if max(phi.qubits) > state.num_qubits:
                raise EvaluationError(f"gate {phi.gate.name} on qubits {phi.qubits} out of range")
            moved = state.with_vector(apply_gate(state.vector, phi.gate, phi.qubits))
            return self._sat(phi.body, moved, logical, lkey)
        if isinstance(phi, A.BoxProj):
            if phi.qubit > state.num_qubits:
                raise EvaluationError(f"qubit {phi.qubit} out of range")
            p, vec = project(state.vector, phi.qubit, phi.bit)
            if p <= self.cfg.atol:
                self.flags.add(VACUOUS_PROJECTION)
                return True
            return self._sat(phi.body, state.with_vector(vec / np.sqrt(p)), logical, lkey)
        if isinstance(phi, A.Forall):
            rng = self.interp.ranges.get(phi.var)
            if rng is None:
                raise EvaluationError(f"no range declared for quantified variable {phi.var}")
            self.flags.add(RANGE_BOUNDED)
            lo, hi = rng
            for n in range(lo, hi + 1):
                inner = dict(logical)
                inner[phi.var] = n
                if not self._sat(phi.body, state, inner, tuple(sorted(inner.items()))):
                    return False
            return True
        raise EvaluationError(f"not a deterministic assertion: {type(phi).__name__}")

    def sat_mixed(self, phi, dist: Distribution) -> bool:
        """Possibility semantics: ``phi`` holds on every support."""
        return all(self.sat(phi, s) for s in dist.supports())

    # -- real expressions ---------------------------------------------------

    def real(self, r, dist: Distribution) -> float:
        self._real_memo = {}
        return self._real(r, dist)

    def _real(self, r, dist: Distribution) -> float:
        key = id(r)
        hit = self._real_memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._real_uncached(r, dist)
        self._real_memo[key] = (r, out)
        return out

    def _real_uncached(self, r, dist: Distribution) -> float:
        if isinstance(r, A.RConst):
            return float(r.value)
        if isinstance(r, A.RVar):
            try:
                return float(self.interp.real[r.name])
            except KeyError:
                raise EvaluationError(f"unbound real variable ${r.name}") from None
        if isinstance(r, A.Prob):
            return float(sum(m for s, m in dist.items() if self.sat(r.body, s)))
        if isinstance(r, A.CqCond):
            return float(sum(m * expect_projector(s.vector, r.proj) for s, m in dist.items() if self.sat(r.cond, s)))
        if isinstance(r, A.RBin):
            a = self._real(r.left, dist)
            b = self._real(r.right, dist)
            if r.op == "+":
                return a + b
            if r.op == "-":
                return a - b
            if r.op == "*":
                return a * b
            raise EvaluationError(f"unknown real operator {r.op}")
        if isinstance(r, A.BoundedSum):
            return float(sum(self._real(t, dist) for t in r.terms))
        raise EvaluationError(f"not a real expression: {type(r).__name__}")

    # -- probabilistic formulas ---------------------------------------------

    def sat_prob(self, f, dist: Distribution) -> bool:
        self._real_memo = {}
        return self._sat_prob(f, dist)

    def _sat_prob(self, f, dist: Distribution) -> bool:
        if isinstance(f, A.PRel):
            return real_compare(f.op, self._real(f.left, dist), self._real(f.right, dist), self.cfg.atol)
        if isinstance(f, A.PNot):
            return not self._sat_prob(f.body, dist)
        if isinstance(f, A.PAnd):
            return self._sat_prob(f.left, dist) and self._sat_prob(f.right, dist)
        raise EvaluationError(f"not a probabilistic formula: {type(f).__name__}")


def real_compare(op: str, a: float, b: float, atol: float) -> bool:
    """Compare reals treating values within ``atol`` as equal.

    ``<`` and ``>`` are the complements of ``>=`` and ``<=``, so exactly one
    of ``<``, ``=``, ``>`` holds for any pair.
    """
    close = abs(a - b) <= atol
    if op == "=":
        return close
    if op == "!=":
        return not close
    if op == "<=":
        return a < b or close
    if op == ">=":
        return a > b or close
    if op == "<":
        return a < b and not close
    if op == ">":
        return a > b and not close
    raise EvaluationError(f"unknown relation {op}")


def sat_pure(phi, state: PureState, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT) -> bool:
    return Evaluator(interp, cfg).sat(phi, state)


def sat_mixed(phi, dist: Distribution, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT) -> bool:
    return Evaluator(interp, cfg).sat_mixed(phi, dist)


def eval_real(r, dist: Distribution, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT) -> float:
    return Evaluator(interp, cfg).real(r, dist)


def sat_prob(f, dist: Distribution, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT) -> bool:
    return Evaluator(interp, cfg).sat_prob(f, dist)


def holds(node, state_or_dist, interp: Interpretation | None = None, cfg: SatConfig = DEFAULT_SAT) -> bool:
    """Dispatch on sort: deterministic assertions use possibility semantics."""
    dist = point_dist(state_or_dist) if isinstance(state_or_dist, PureState) else state_or_dist
    if isinstance(node, (A.PRel, A.PNot, A.PAnd)):
        return sat_prob(node, dist, interp, cfg)
    return sat_mixed(node, dist, interp, cfg)
