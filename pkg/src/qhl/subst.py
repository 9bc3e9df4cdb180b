"""Substitution of program variables inside expressions, assertions and terms.

Program variables are never bound (``forall`` binds only logical variables),
so substitution needs no capture avoidance. Subtrees in which the variable
does not occur are returned unchanged, which preserves sharing in the DAGs
produced by the loop transformers.
"""

from __future__ import annotations

from .ast import (
    ABin, And, BigAnd, BoundedSum, BoxProj, BoxU, CqCond, Forall, LVar, Not, Num,
    PAnd, PNot, PRel, Prob, PVar, RBin, RConst, Rel, RVar, free_prog_vars,
)


class Substituter:
    """Replace program variable ``var`` by the expression ``expr``.

    One instance memoizes by node identity, so applying it repeatedly to
    parts of the same DAG does each shared node once.
    """

    def __init__(self, var: str, expr):
        self.var = var
        self.expr = expr
        self._memo: dict = {}
        self._free: dict = {}

    def __call__(self, node):
        key = id(node)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        if self.var not in free_prog_vars(node, self._free):
            out = node
        else:
            out = self._rewrite(node)
        self._memo[key] = (node, out)
        return out

    def _rewrite(self, n):
        if isinstance(n, PVar):
            return self.expr if n.name == self.var else n
        if isinstance(n, (Num, LVar, RConst, RVar)):
            return n
        if isinstance(n, ABin):
            return ABin(n.op, self(n.left), self(n.right))
        if isinstance(n, Rel):
            return Rel(n.op, self(n.left), self(n.right))
        if isinstance(n, Not):
            return Not(self(n.body))
        if isinstance(n, And):
            return And(self(n.left), self(n.right))
        if isinstance(n, Forall):
            return Forall(n.var, self(n.body))
        if isinstance(n, BoxU):
            return BoxU(n.gate, n.qubits, self(n.body))
        if isinstance(n, BoxProj):
            return BoxProj(n.qubit, n.bit, self(n.body))
        if isinstance(n, BigAnd):
            return BigAnd(tuple(self(t) for t in n.terms))
        if isinstance(n, Prob):
            return Prob(self(n.body))
        if isinstance(n, CqCond):
            return CqCond(self(n.cond), n.proj)
        if isinstance(n, RBin):
            return RBin(n.op, self(n.left), self(n.right))
        if isinstance(n, BoundedSum):
            return BoundedSum(tuple(self(t) for t in n.terms))
        if isinstance(n, PRel):
            return PRel(n.op, self(n.left), self(n.right))
        if isinstance(n, PNot):
            return PNot(self(n.body))
        if isinstance(n, PAnd):
            return PAnd(self(n.left), self(n.right))
        raise TypeError(f"cannot substitute into {type(n).__name__}")


def subst_prog_var(node, var: str, expr):
    """``node[var/expr]`` for any expression, assertion, real term or formula."""
    return Substituter(var, expr)(node)
