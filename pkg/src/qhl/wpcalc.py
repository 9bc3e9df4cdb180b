"""Predicate and term transformers: wp for deterministic assertions, conditional
terms, weakest preterms, and WP for probabilistic formulas.

Loops are handled with explicit bounds. ``wp`` of a loop is a ``BigAnd`` over
the first K+1 approximants; ``pt`` of a loop is a ``BoundedSum`` of N+1 terms.
A :class:`Transformer` remembers whether it produced such a node so callers
can label verdicts that depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import ast as A
from .cqstate import apply_matrix, check_projector, mask_diagonal, projector_matrix, single_qubit_mask
from .deep import on_deep_stack
from .errors import EvaluationError
from .simplify import Simplifier
from .subst import Substituter

MEASURE_FORMS = ("conditional", "product")
WHILE_FORMS = ("unrolled", "series")
SPECTRAL_EPS = 1e-12


@dataclass(frozen=True)
class DepthConfig:
    """Bounds for the infinitary loop constructs and the choice of loop/measurement clause.

    ``measure_form="product"`` selects the clause that multiplies the outcome
    probability by the post-measurement event; it is wrong once the measured
    qubit is entangled with the qubits the event looks at.
    ``while_form="series"`` selects the exit-time series, exact on point
    distributions only. The defaults are exact on every subdistribution.
    ``simplify`` folds constants and shares equal subterms in the output.
    """

    wp_while_depth: int = 64
    pt_while_terms: int = 64
    measure_form: str = "conditional"
    while_form: str = "unrolled"
    simplify: bool = True

    def __post_init__(self):
        if self.wp_while_depth < 1 or self.pt_while_terms < 1:
            raise ValueError("depth bounds must be at least 1")
        if self.measure_form not in MEASURE_FORMS:
            raise ValueError(f"measure_form must be one of {MEASURE_FORMS}")
        if self.while_form not in WHILE_FORMS:
            raise ValueError(f"while_form must be one of {WHILE_FORMS}")


DEFAULT_DEPTH = DepthConfig()


def max_qubit(node) -> int:
    """Largest qubit index mentioned anywhere in ``node`` (0 if none)."""
    best = 0
    seen: set = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, (A.Apply, A.BoxU)):
            best = max(best, *n.qubits)
        elif isinstance(n, (A.Measure, A.Proj, A.BoxProj)):
            best = max(best, n.qubit)
        elif isinstance(n, A.CqCond):
            q = n.proj
            k = q.num_qubits if isinstance(q, A.MaskProjector) else int(q.dim).bit_length() - 1
            best = max(best, k or 0)
        stack.extend(A._children(n))
    return best


# ---------------------------------------------------------------------------
# Projector algebra used by the cq-conditional clauses


def _projector_qubits(q) -> int | None:
    if isinstance(q, A.MaskProjector):
        return q.num_qubits
    return int(q.dim).bit_length() - 1


def _as_projector(matrix: np.ndarray):
    """Wrap a computed projector, returning a mask when it is diagonal 0/1."""
    check_projector(matrix, "computed projector")
    diag = np.real(np.diag(matrix))
    off = matrix - np.diag(np.diag(matrix))
    if np.abs(off).max(initial=0.0) < 1e-12 and np.all((np.abs(diag) < 1e-12) | (np.abs(diag - 1) < 1e-12)):
        m = matrix.shape[0].bit_length() - 1
        pats = tuple(format(k, f"0{m}b") for k in np.flatnonzero(np.abs(diag - 1) < 1e-12))
        if not pats:
            return A.MaskProjector(())
        return A.MaskProjector(pats)
    return A.DenseProjector.from_matrix(None, matrix)


def embedded_unitary(gate: A.Gate, qubits, m: int) -> np.ndarray:
    eye = np.eye(2 ** m, dtype=complex)
    return np.stack([apply_matrix(eye[:, k], gate.matrix, qubits) for k in range(2 ** m)], axis=1)


def conjugate(q, gate: A.Gate, qubits):
    """``U^dagger Q U`` for the gate embedded on ``qubits``."""
    m = _projector_qubits(q)
    if m is None:
        return q
    if max(qubits) > m:
        raise EvaluationError(f"gate on qubits {qubits} exceeds the {m}-qubit projector")
    u = embedded_unitary(gate, qubits, m)
    return _as_projector(u.conj().T @ projector_matrix(q, m) @ u)


def sandwich(q, qubit: int, bit: int) -> list:
    """``P Q P`` as a weighted sum of projectors, P projecting ``qubit`` onto ``|bit>``.

    For a mask the result is a single mask. A dense Q that does not commute
    with P gives a positive operator that is not a projector; it is returned
    through its spectral decomposition as ``[(eigenvalue, eigenprojector)]``.
    """
    m = _projector_qubits(q)
    if m is None:
        return [(1.0, q)]
    if isinstance(q, A.MaskProjector):
        pats = []
        for p in q.patterns:
            c = p[qubit - 1]
            if c == "*" or c == str(bit):
                pats.append(p[: qubit - 1] + str(bit) + p[qubit:])
        return [(1.0, A.MaskProjector(tuple(dict.fromkeys(pats))))]
    p = np.diag(mask_diagonal(single_qubit_mask(m, qubit, bit).patterns, m).astype(complex))
    op = p @ q.matrix @ p
    vals, vecs = np.linalg.eigh((op + op.conj().T) / 2)
    groups: dict = {}
    for lam, k in zip(vals, range(len(vals))):
        if lam > SPECTRAL_EPS:
            key = 1.0 if abs(lam - 1) <= SPECTRAL_EPS else round(float(lam), 9)
            groups.setdefault(key, []).append(k)
    out = []
    for lam, idx in sorted(groups.items(), reverse=True):
        basis = vecs[:, idx]
        out.append((lam, _as_projector(basis @ basis.conj().T)))
    return out


# ---------------------------------------------------------------------------
# Transformer


class Transformer:
    """One transformer instance per top-level request; memo tables live here."""

    def __init__(self, depth: DepthConfig = DEFAULT_DEPTH, num_qubits: int | None = None):
        self.depth = depth
        self.num_qubits = num_qubits
        self.bounded = False
        self._wp_memo: dict = {}
        self._pt_memo: dict = {}
        self._cond_memo: dict = {}
        self._subs: dict = {}
        self._simp = Simplifier() if depth.simplify else None

    def _done(self, node):
        return self._simp(node) if self._simp is not None else node

    def _subst(self, var: str, expr, node):
        key = (var, expr)
        sub = self._subs.get(key)
        if sub is None:
            sub = self._subs[key] = Substituter(var, expr)
        return sub(node)

    # -- wp for deterministic assertions -----------------------------------

    def wp(self, c, phi):
        key = (id(c), id(phi))
        hit = self._wp_memo.get(key)
        if hit is not None:
            return hit[2]
        out = self._done(self._wp(c, phi))
        self._wp_memo[key] = (c, phi, out)
        return out

    def _wp(self, c, phi):
        if isinstance(c, A.Skip):
            return phi
        if isinstance(c, A.Assign):
            return self._subst(c.var, c.expr, phi)
        if isinstance(c, A.RandAssign):
            return A.conj(self._subst(c.var, A.Num(v), phi) for _, v in c.branches)
        if isinstance(c, A.Seq):
            return self.wp(c.first, self.wp(c.second, phi))
        if isinstance(c, A.If):
            return A.Or(A.And(c.cond, self.wp(c.then, phi)), A.And(A.Not(c.cond), self.wp(c.orelse, phi)))
        if isinstance(c, A.While):
            self.bounded = True
            exit_branch = A.And(A.Not(c.cond), phi)
            psis = [A.TRUE]
            for _ in range(self.depth.wp_while_depth):
                psis.append(A.Or(A.And(c.cond, self.wp(c.body, psis[-1])), exit_branch))
            return A.BigAnd(tuple(psis))
        if isinstance(c, A.Apply):
            return A.BoxU(c.gate, c.qubits, phi)
        if isinstance(c, A.Measure):
            j = c.qubit
            zero = A.BoxProj(j, 0, self._subst(c.var, A.Num(0), phi))
            one = A.BoxProj(j, 1, self._subst(c.var, A.Num(1), phi))
            return A.And(A.Or(zero, A.Proj(j, 1)), A.Or(one, A.Proj(j, 0)))
        raise TypeError(f"not a command: {c!r}")

    # -- conditional terms --------------------------------------------------

    def cond(self, r, b):
        key = (id(r), id(b))
        hit = self._cond_memo.get(key)
        if hit is not None:
            return hit[2]
        if isinstance(r, (A.RConst, A.RVar)):
            out = r
        elif isinstance(r, A.Prob):
            out = A.Prob(A.And(r.body, b))
        elif isinstance(r, A.CqCond):
            out = A.CqCond(A.And(r.cond, b), r.proj)
        elif isinstance(r, A.RBin):
            out = A.RBin(r.op, self.cond(r.left, b), self.cond(r.right, b))
        elif isinstance(r, A.BoundedSum):
            out = A.BoundedSum(tuple(self.cond(t, b) for t in r.terms))
        else:
            raise TypeError(f"not a real expression: {r!r}")
        out = self._done(out)
        self._cond_memo[key] = (r, b, out)
        return out

    # -- weakest preterms ---------------------------------------------------

    def pt(self, c, r):
        key = (id(c), id(r))
        hit = self._pt_memo.get(key)
        if hit is not None:
            return hit[2]
        if isinstance(r, (A.RConst, A.RVar)):
            out = r
        elif isinstance(r, A.RBin):
            out = A.RBin(r.op, self.pt(c, r.left), self.pt(c, r.right))
        elif isinstance(r, A.BoundedSum):
            out = A.BoundedSum(tuple(self.pt(c, t) for t in r.terms))
        elif isinstance(r, (A.Prob, A.CqCond)):
            out = self._pt_atom(c, r)
        else:
            raise TypeError(f"not a real expression: {r!r}")
        out = self._done(out)
        self._pt_memo[key] = (c, r, out)
        return out

    def _qubits(self) -> int:
        if not self.num_qubits:
            raise EvaluationError("the number of qubits is needed for the measurement preterm")
        return self.num_qubits

    def _pt_atom(self, c, a):
        prob = isinstance(a, A.Prob)
        body = a.body if prob else a.cond

        def rebuild(phi, proj=None):
            return A.Prob(phi) if prob else A.CqCond(phi, proj if proj is not None else a.proj)

        if isinstance(c, A.Skip):
            return a
        if isinstance(c, A.Assign):
            return rebuild(self._subst(c.var, c.expr, body))
        if isinstance(c, A.RandAssign):
            branches = [(p, self._subst(c.var, A.Num(v), body)) for p, v in c.branches]
            if prob:
                return self._pas_prob(branches)
            return A.rsum(A.RBin("*", A.RConst(p), rebuild(phi)) for p, phi in branches)
        if isinstance(c, A.Seq):
            return self.pt(c.first, self.pt(c.second, a))
        if isinstance(c, A.If):
            return A.RBin("+", self.cond(self.pt(c.then, a), c.cond), self.cond(self.pt(c.orelse, a), A.Not(c.cond)))
        if isinstance(c, A.While):
            self.bounded = True
            if prob and self.depth.while_form == "series":
                return self._while_series(c, a)
            return self._while_unrolled(c, a)
        if isinstance(c, A.Apply):
            phi = A.BoxU(c.gate, c.qubits, body)
            return rebuild(phi, None if prob else conjugate(a.proj, c.gate, c.qubits))
        if isinstance(c, A.Measure):
            return self._pt_measure(c, a, prob, body)
        raise TypeError(f"not a command: {c!r}")

    def _pas_prob(self, branches):
        """Sum over nonempty subsets S of the outcomes of (sum of a_i, i in S) * P(exactly S hold).

        Branches whose substituted assertions coincide are merged first; a
        single remaining branch has total weight one.
        """
        merged: dict = {}
        for p, phi in branches:
            phi = self._done(phi)
            weight, _ = merged.get(id(phi), (0.0, phi))
            merged[id(phi)] = (weight + p, phi)
        branches = list(merged.values())
        if len(branches) == 1:
            return A.Prob(branches[0][1])
        n = len(branches)
        terms = []
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                weight = sum(branches[i][0] for i in subset)
                parts = [branches[i][1] if i in subset else A.Not(branches[i][1]) for i in range(n)]
                terms.append(A.RBin("*", A.RConst(weight), A.Prob(A.conj(parts))))
        return A.rsum(terms)

    def _pt_measure(self, c: A.Measure, a, prob: bool, body):
        j = c.qubit
        terms = []
        for bit in (0, 1):
            phi_b = self._subst(c.var, A.Num(bit), body)
            boxed = A.BoxProj(j, bit, phi_b)
            if prob:
                mask = single_qubit_mask(self._qubits(), j, bit)
                if self.depth.measure_form == "product":
                    terms.append(A.RBin("*", A.CqCond(A.TRUE, mask), A.Prob(boxed)))
                else:
                    terms.append(A.CqCond(boxed, mask))
            else:
                cond = phi_b if self.depth.measure_form == "product" else boxed
                parts = [A.CqCond(cond, proj) if lam == 1.0 else A.RBin("*", A.RConst(lam), A.CqCond(cond, proj))
                         for lam, proj in sandwich(a.proj, j, bit)]
                terms.append(A.rsum(parts))
        return A.RBin("+", terms[0], terms[1])

    def _while_unrolled(self, c: A.While, a):
        """Sum over i of h^i(a / not B) with h(s) = pt(body, s) / B."""
        term = self.cond(a, A.Not(c.cond))
        terms = [term]
        for _ in range(self.depth.pt_while_terms):
            term = self.cond(self.pt(c.body, term), c.cond)
            terms.append(term)
        return A.BoundedSum(tuple(terms))

    def _while_series(self, c: A.While, a):
        """The exit-time series: SUM, then T_i = f^i(SUM) * prod_{j<i} f^j(P(wp_inf))."""
        n_terms = self.depth.pt_while_terms
        not_b = A.Not(c.cond)
        exits = [not_b]
        for _ in range(max(n_terms, self.depth.wp_while_depth)):
            exits.append(self.wp(c.body, exits[-1]))
        stay = [A.Not(w) for w in exits]
        exact = [A.conj(stay[:i] + [exits[i]]) for i in range(n_terms + 1)]
        never = A.BigAnd(tuple(stay[: self.depth.wp_while_depth + 1]))
        if_cmd = A.If(c.cond, c.body, A.SKIP)
        iterated = [a]
        for _ in range(n_terms):
            iterated.append(self.pt(if_cmd, iterated[-1]))
        total = A.BoundedSum(tuple(
            A.RBin("*", A.Prob(exact[i]), self.cond(iterated[i], exact[i])) for i in range(n_terms + 1)
        ))

        def f(r):
            return self.cond(self.pt(c.body, r), never)

        terms = [total]
        f_sum, f_never, product = total, A.Prob(never), None
        for _ in range(n_terms):
            product = f_never if product is None else A.RBin("*", product, f_never)
            f_sum = f(f_sum)
            f_never = f(f_never)
            terms.append(A.RBin("*", f_sum, product))
        return A.BoundedSum(tuple(terms))

    # -- WP for probabilistic formulas ------------------------------------

    def wp_prob(self, c, f):
        return self._done(self._wp_prob(c, f))

    def _wp_prob(self, c, f):
        if isinstance(f, A.PRel):
            return A.PRel(f.op, self.pt(c, f.left), self.pt(c, f.right))
        if isinstance(f, A.PNot):
            return A.PNot(self._wp_prob(c, f.body))
        if isinstance(f, A.PAnd):
            return A.PAnd(self._wp_prob(c, f.left), self._wp_prob(c, f.right))
        raise TypeError(f"not a probabilistic formula: {f!r}")


def _qubit_count(num_qubits, *nodes) -> int:
    return num_qubits if num_qubits else max(max_qubit(n) for n in nodes)


@on_deep_stack
def wp_det(c, phi, depth: DepthConfig = DEFAULT_DEPTH):
    return Transformer(depth).wp(c, phi)


@on_deep_stack
def cond_term(r, b):
    return Transformer().cond(r, b)


@on_deep_stack
def preterm(c, r, depth: DepthConfig = DEFAULT_DEPTH, num_qubits: int | None = None):
    """Weakest preterm. ``num_qubits`` defaults to the largest qubit mentioned."""
    return Transformer(depth, _qubit_count(num_qubits, c, r)).pt(c, r)


@on_deep_stack
def wp_prob(c, f, depth: DepthConfig = DEFAULT_DEPTH, num_qubits: int | None = None):
    return Transformer(depth, _qubit_count(num_qubits, c, f)).wp_prob(c, f)
