"""Semantics-preserving simplification with hash-consing.

Folds closed arithmetic and relations, propagates ``true``/``false`` through
the connectives and the modalities that allow it, and drops zero terms from
real sums. Every result is interned, so two structurally equal subterms
become the same object; identity-keyed memo tables downstream then see them
as one. This keeps loop transformers from growing exponentially once a
random assignment has substituted constants into the guard.
"""

from __future__ import annotations

from . import ast as A

_INT64 = (-(2 ** 63), 2 ** 63 - 1)
_TOP, _BOT = A.Top(), A.Bot()
_ZERO = A.RConst(0.0)


def _fold_arith(op: str, a: int, b: int):
    out = a + b if op == "+" else a - b if op == "-" else a * b
    return out if _INT64[0] <= out <= _INT64[1] else None


def _fold_rel(op: str, a: int, b: int) -> bool:
    return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _is_zero(r) -> bool:
    return isinstance(r, A.RConst) and r.value == 0.0


class Simplifier:
    """Memoized by node identity; one instance shares one intern table."""

    def __init__(self):
        self._memo: dict = {}
        self._table: dict = {}

    def intern(self, node):
        key = (type(node),) + tuple(self._field_key(v) for v in vars(node).values())
        hit = self._table.get(key)
        if hit is None:
            self._table[key] = hit = node
        return hit

    @staticmethod
    def _field_key(v):
        if isinstance(v, tuple):
            return tuple(Simplifier._field_key(x) for x in v)
        if isinstance(v, (A.MaskProjector, A.DenseProjector, str, int, float)):
            return v
        return id(v)

    def __call__(self, node):
        key = id(node)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        out = self.intern(self._simplify(node))
        self._memo[key] = (node, out)
        # keep ``out`` alive and map it to itself so repeated calls are free
        self._memo.setdefault(id(out), (out, out))
        return out

    def _simplify(self, n):
        s = self
        if isinstance(n, (A.Num, A.PVar, A.LVar, A.Top, A.Bot, A.Proj, A.RConst, A.RVar)):
            return n
        if isinstance(n, A.ABin):
            left, right = s(n.left), s(n.right)
            if isinstance(left, A.Num) and isinstance(right, A.Num):
                val = _fold_arith(n.op, left.value, right.value)
                if val is not None:
                    return A.Num(val)
            # (e +- a) +- b  becomes  e +- c, so repeated decrements stay shallow
            if (n.op in "+-" and isinstance(right, A.Num) and isinstance(left, A.ABin)
                    and left.op in "+-" and isinstance(left.right, A.Num)):
                a = left.right.value if left.op == "+" else -left.right.value
                b = right.value if n.op == "+" else -right.value
                total = _fold_arith("+", a, b)
                if total is not None and total != _INT64[0]:
                    return s.intern(A.ABin("+" if total >= 0 else "-", left.left, A.Num(abs(total))))
            return A.ABin(n.op, left, right)
        if isinstance(n, A.Rel):
            left, right = s(n.left), s(n.right)
            if isinstance(left, A.Num) and isinstance(right, A.Num):
                return _TOP if _fold_rel(n.op, left.value, right.value) else _BOT
            return A.Rel(n.op, left, right)
        if isinstance(n, A.Not):
            body = s(n.body)
            if isinstance(body, A.Top):
                return _BOT
            if isinstance(body, A.Bot):
                return _TOP
            if isinstance(body, A.Not):
                return body.body
            return A.Not(body)
        if isinstance(n, A.And):
            left = s(n.left)
            if isinstance(left, A.Bot):
                return _BOT
            right = s(n.right)
            if isinstance(right, A.Bot):
                return _BOT
            if isinstance(left, A.Top) or left is right:
                return right
            if (isinstance(left, A.Not) and left.body is right) or (isinstance(right, A.Not) and right.body is left):
                return _BOT
            if isinstance(right, A.Top):
                return left
            return A.And(left, right)
        if isinstance(n, A.BigAnd):
            terms = []
            for t in n.terms:
                t = s(t)
                if isinstance(t, A.Bot):
                    return _BOT
                if not isinstance(t, A.Top) and all(t is not u for u in terms):
                    terms.append(t)
            if not terms:
                return _TOP
            return terms[0] if len(terms) == 1 else A.BigAnd(tuple(terms))
        if isinstance(n, A.Forall):
            body = s(n.body)
            return body if isinstance(body, A.Top) else A.Forall(n.var, body)
        if isinstance(n, A.BoxU):
            body = s(n.body)
            return body if isinstance(body, (A.Top, A.Bot)) else A.BoxU(n.gate, n.qubits, body)
        if isinstance(n, A.BoxProj):
            # [Proj] false is vacuously true on states the projection annihilates
            body = s(n.body)
            return body if isinstance(body, A.Top) else A.BoxProj(n.qubit, n.bit, body)
        if isinstance(n, A.Prob):
            body = s(n.body)
            return _ZERO if isinstance(body, A.Bot) else A.Prob(body)
        if isinstance(n, A.CqCond):
            cond = s(n.cond)
            if isinstance(cond, A.Bot) or (isinstance(n.proj, A.MaskProjector) and not n.proj.patterns):
                return _ZERO
            return A.CqCond(cond, n.proj)
        if isinstance(n, A.RBin):
            left, right = s(n.left), s(n.right)
            if isinstance(left, A.RConst) and isinstance(right, A.RConst):
                a, b = left.value, right.value
                return A.RConst(a + b if n.op == "+" else a - b if n.op == "-" else a * b)
            if n.op == "*" and (_is_zero(left) or _is_zero(right)):
                return _ZERO
            if n.op in "+-" and _is_zero(right):
                return left
            if n.op == "+" and _is_zero(left):
                return right
            if n.op == "*" and isinstance(left, A.RConst) and left.value == 1.0:
                return right
            if n.op == "*" and isinstance(right, A.RConst) and right.value == 1.0:
                return left
            return A.RBin(n.op, left, right)
        if isinstance(n, A.BoundedSum):
            terms = tuple(t for t in (s(t) for t in n.terms) if not _is_zero(t))
            if not terms:
                return _ZERO
            return terms[0] if len(terms) == 1 else A.BoundedSum(terms)
        if isinstance(n, A.PRel):
            return A.PRel(n.op, s(n.left), s(n.right))
        if isinstance(n, A.PNot):
            body = s(n.body)
            return body.body if isinstance(body, A.PNot) else A.PNot(body)
        if isinstance(n, A.PAnd):
            return A.PAnd(s(n.left), s(n.right))
        raise TypeError(f"cannot simplify {type(n).__name__}")


def simplify(node):
    return Simplifier()(node)


def equivalent_syntax(a, b) -> bool:
    """Equal after simplification; used to match rule instances."""
    simp = Simplifier()
    return simp(a) is simp(b)
