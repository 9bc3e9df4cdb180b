"""Concrete-syntax printer; the output parses back to the same tree.

Negations of the shapes produced by ``Or`` and ``Implies`` are printed with
the ``||`` and ``->`` sugar.
"""

from __future__ import annotations

from . import ast as A

# precedence of assertion / formula operators
_FORALL, _IMPL, _OR, _AND, _UNARY, _ATOM = range(6)


def fmt_float(x: float) -> str:
    return repr(float(x))


def fmt_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return fmt_float(z.real)
    if z.real == 0:
        return f"{fmt_float(z.imag)}i"
    sign = "-" if z.imag < 0 or (z.imag == 0 and str(z.imag)[0] == "-") else "+"
    return f"{fmt_float(z.real)}{sign}{fmt_float(abs(z.imag))}i"


def fmt_qubits(qubits) -> str:
    return ", ".join(f"q{q}" for q in qubits)


def arith(e, top: bool = True) -> str:
    if isinstance(e, A.Num):
        return str(e.value)
    if isinstance(e, (A.PVar, A.LVar)):
        return e.name
    if isinstance(e, A.ABin):
        s = f"{arith(e.left, False)} {e.op} {arith(e.right, False)}"
        return s if top else f"({s})"
    raise TypeError(f"not an arithmetic expression: {e!r}")


def _split_neg(n):
    """Recognize the ``Or``/``Implies`` encodings under a negation."""
    body = n.body
    if isinstance(body, (A.And, A.PAnd)):
        neg = A.Not if isinstance(body, A.And) else A.PNot
        if isinstance(body.left, neg) and isinstance(body.right, neg):
            return "||", body.left.body, body.right.body
        if isinstance(body.right, neg):
            return "->", body.left, body.right.body
    return None


def _wrap(s: str, prec: int, need: int) -> str:
    return s if prec >= need else f"({s})"


def assertion(d, need: int = _FORALL) -> str:
    s, prec = _assertion(d)
    return _wrap(s, prec, need)


def _binary(n, child):
    sugar = _split_neg(n)
    if sugar is None:
        return None
    op, left, right = sugar
    if op == "||":
        return f"{child(left, _OR)} || {child(right, _AND)}", _OR
    return f"{child(left, _OR)} -> {child(right, _IMPL)}", _IMPL


def _assertion(d):
    if isinstance(d, A.Top):
        return "true", _ATOM
    if isinstance(d, A.Bot):
        return "false", _ATOM
    if isinstance(d, A.Proj):
        return f"P{d.bit}({d.qubit})", _ATOM
    if isinstance(d, A.Rel):
        return f"{arith(d.left)} {d.op} {arith(d.right)}", _ATOM
    if isinstance(d, A.Not):
        out = _binary(d, assertion)
        if out is not None:
            return out
        inner = f"({assertion(d.body)})" if isinstance(d.body, A.Rel) else assertion(d.body, _UNARY)
        return "!" + inner, _UNARY
    if isinstance(d, A.And):
        return f"{assertion(d.left, _AND)} && {assertion(d.right, _UNARY)}", _AND
    if isinstance(d, A.Forall):
        return f"forall {d.var} . {assertion(d.body)}", _FORALL
    if isinstance(d, A.BoxU):
        return f"[{d.gate.name}[{fmt_qubits(d.qubits)}]] {assertion(d.body, _UNARY)}", _UNARY
    if isinstance(d, A.BoxProj):
        return f"[Proj {d.qubit},{d.bit}] {assertion(d.body, _UNARY)}", _UNARY
    if isinstance(d, A.BigAnd):
        return "bigand[ " + ", ".join(assertion(t) for t in d.terms) + " ]", _ATOM
    raise TypeError(f"not an assertion: {d!r}")


def projector(q) -> str:
    if q.name is not None:
        return q.name
    if isinstance(q, A.MaskProjector):
        return "mask[" + ", ".join(q.patterns) + "]"
    return "matrix[" + ", ".join(fmt_complex(z) for z in q.data) + "]"


def real(r, top: bool = True) -> str:
    if isinstance(r, A.RConst):
        return fmt_float(r.value)
    if isinstance(r, A.RVar):
        return f"${r.name}"
    if isinstance(r, A.Prob):
        return f"P[ {assertion(r.body)} ]"
    if isinstance(r, A.CqCond):
        return f"({assertion(r.cond)} => {projector(r.proj)})"
    if isinstance(r, A.BoundedSum):
        return "sum[ " + ", ".join(real(t) for t in r.terms) + " ]"
    if isinstance(r, A.RBin):
        s = f"{real(r.left, False)} {r.op} {real(r.right, False)}"
        return s if top else f"({s})"
    raise TypeError(f"not a real expression: {r!r}")


def formula(f, need: int = _FORALL) -> str:
    s, prec = _formula(f)
    return _wrap(s, prec, need)


def _formula(f):
    if isinstance(f, A.PRel):
        return f"{real(f.left)} {f.op} {real(f.right)}", _ATOM
    if isinstance(f, A.PNot):
        out = _binary(f, formula)
        if out is not None:
            return out
        inner = f"({formula(f.body)})" if isinstance(f.body, A.PRel) else formula(f.body, _UNARY)
        return "!" + inner, _UNARY
    if isinstance(f, A.PAnd):
        return f"{formula(f.left, _AND)} && {formula(f.right, _UNARY)}", _AND
    raise TypeError(f"not a probabilistic formula: {f!r}")


def command(c, stmt: bool = False) -> str:
    if isinstance(c, A.Skip):
        return "skip"
    if isinstance(c, A.Assign):
        return f"{c.var} <- {arith(c.expr)}"
    if isinstance(c, A.RandAssign):
        body = ", ".join(f"{fmt_float(p)}: {v}" for p, v in c.branches)
        return f"{c.var} <-$ {{{body}}}"
    if isinstance(c, A.Seq):
        s = f"{command(c.first, True)}; {command(c.second)}"
        return f"({s})" if stmt else s
    if isinstance(c, A.If):
        return f"if {assertion(c.cond)} then {command(c.then, True)} else {command(c.orelse, True)}"
    if isinstance(c, A.While):
        return f"while {assertion(c.cond)} do {command(c.body, True)}"
    if isinstance(c, A.Apply):
        return f"{c.gate.name}[{fmt_qubits(c.qubits)}]"
    if isinstance(c, A.Measure):
        return f"{c.var} <<= q{c.qubit}"
    raise TypeError(f"not a command: {c!r}")


def triple(t: A.Triple) -> str:
    side = assertion if t.sort == "det" else formula
    return f"{{ {side(t.pre)} }} {command(t.prog)} {{ {side(t.post)} }}"


def pretty(node) -> str:
    """Print any syntax node."""
    if isinstance(node, A.Triple):
        return triple(node)
    if isinstance(node, (A.Num, A.PVar, A.LVar, A.ABin)):
        return arith(node)
    if isinstance(node, (A.Top, A.Bot, A.Proj, A.Rel, A.Not, A.And, A.Forall, A.BoxU, A.BoxProj, A.BigAnd)):
        return assertion(node)
    if isinstance(node, (A.RConst, A.RVar, A.Prob, A.CqCond, A.BoundedSum, A.RBin)):
        return real(node)
    if isinstance(node, (A.PRel, A.PNot, A.PAnd)):
        return formula(node)
    if isinstance(node, (A.MaskProjector, A.DenseProjector)):
        return projector(node)
    return command(node)
