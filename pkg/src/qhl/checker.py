"""Hoare-triple verdicts over state suites and structural proof-script checking.

Validity is always relative to a finite suite of test states: a reported
counterexample is real, while VALID_ON_SUITE is evidence rather than proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ast as A
from .assertions import DEFAULT_SAT, Evaluator, SatConfig
from .cqstate import Distribution, Interpretation, PureState, apply_matrix, point_dist
from .errors import RuleMismatch
from .pretty import pretty
from .semantics import DEFAULT_EXEC, ExecConfig, exec_cmd
from .deep import on_deep_stack
from .simplify import equivalent_syntax
from .subst import subst_prog_var
from .wpcalc import DEFAULT_DEPTH, DepthConfig, Transformer, max_qubit

VALID = "VALID_ON_SUITE"
INVALID = "INVALID"
DEPTH_BOUNDED = "DEPTH_BOUNDED"

LABEL_DEPTH = "depth-bounded"
LABEL_SUITE = "checked-on-suite"

RESIDUAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Reports


def describe_state(s) -> dict:
    """JSON-friendly view of a pure state or a distribution."""
    if isinstance(s, Distribution):
        return {"supports": [dict(describe_state(t), mass=round(m, 12)) for t, m in s.items()]}
    amps = [[round(float(z.real), 12) + 0.0, round(float(z.imag), 12) + 0.0] for z in s.vector]
    return {"store": dict(s.store), "amplitudes": amps}


@dataclass
class Verdict:
    status: str
    method: str = "semantic"
    counterexample: dict | None = None
    counterexample_state: object = field(default=None, repr=False)
    log: list = field(default_factory=list)
    labels: set = field(default_factory=set)
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == VALID

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "labels": sorted(self.labels),
            "counterexample": self.counterexample,
            "disagreements": self.disagreements,
            "states": self.log,
        }


def combine(verdicts, method: str) -> Verdict:
    """Aggregate: any INVALID wins, then DEPTH_BOUNDED, else VALID_ON_SUITE."""
    verdicts = list(verdicts)
    out = Verdict(VALID, method)
    for v in verdicts:
        out.labels |= v.labels
        out.disagreements.extend(v.disagreements)
    for v in verdicts:
        if v.status == INVALID:
            out.status = INVALID
            out.counterexample = v.counterexample
            out.counterexample_state = v.counterexample_state
            break
    else:
        if any(v.status == DEPTH_BOUNDED for v in verdicts):
            out.status = DEPTH_BOUNDED
    return out


# ---------------------------------------------------------------------------
# State suites


@dataclass(frozen=True)
class SuiteParams:
    count: int = 50
    seed: int = 0
    num_qubits: int = 1
    vars: tuple = ()
    value_range: tuple = (-3, 3)
    mixed: bool = False
    structured: bool = False

    def __post_init__(self):
        if self.count < 1 or self.num_qubits < 1:
            raise ValueError("suite needs count >= 1 and at least one qubit")
        if self.value_range[0] > self.value_range[1]:
            raise ValueError("empty classical value range")


def haar_vector(rng: np.random.Generator, m: int) -> np.ndarray:
    z = rng.normal(size=2 ** m) + 1j * rng.normal(size=2 ** m)
    return z / np.linalg.norm(z)


def structured_vector(rng: np.random.Generator, m: int) -> np.ndarray:
    """Product of single-qubit basis, |+>-type, or random states.

    These make the single-qubit projection atoms true with positive
    probability, which Haar samples almost never do.
    """
    vec = np.ones(1, dtype=complex)
    for _ in range(m):
        kind = rng.integers(4)
        if kind == 0:
            q = np.array([1, 0], dtype=complex)
        elif kind == 1:
            q = np.array([0, 1], dtype=complex)
        elif kind == 2:
            q = np.array([1, (-1) ** rng.integers(2)], dtype=complex) / np.sqrt(2)
        else:
            q = haar_vector(rng, 1)
        vec = np.kron(vec, q)
    return vec


def random_pure(rng: np.random.Generator, params: SuiteParams) -> PureState:
    lo, hi = params.value_range
    store = {v: int(rng.integers(lo, hi + 1)) for v in params.vars}
    if params.structured and rng.random() < 0.5:
        vec = structured_vector(rng, params.num_qubits)
    else:
        vec = haar_vector(rng, params.num_qubits)
    return PureState.make(store, vec)


def random_mixture(rng: np.random.Generator, params: SuiteParams) -> Distribution:
    k = int(rng.integers(1, 5))
    weights = rng.dirichlet(np.ones(k))
    return Distribution((random_pure(rng, params), float(w)) for w in weights)


def sample_states(params: SuiteParams) -> list:
    """Deterministic list of random pure states, or mixtures when ``params.mixed``."""
    rng = np.random.default_rng(params.seed)
    draw = random_mixture if params.mixed else random_pure
    return [draw(rng, params) for _ in range(params.count)]


def _projection_constraints(pre) -> list:
    """Top-level conjuncts of the form P_j^i, used to steer sampling."""
    if isinstance(pre, A.And):
        return _projection_constraints(pre.left) + _projection_constraints(pre.right)
    if isinstance(pre, A.Proj):
        return [(pre.qubit, pre.bit)]
    return []


def _value_constraints(pre) -> dict:
    if isinstance(pre, A.And):
        out = _value_constraints(pre.left)
        out.update(_value_constraints(pre.right))
        return out
    if isinstance(pre, A.Rel) and pre.op == "=" and isinstance(pre.left, A.PVar) and isinstance(pre.right, A.Num):
        return {pre.left.name: pre.right.value}
    return {}


def _certain_events(f) -> list:
    """Assertions phi with a top-level conjunct ``P[phi] = 1`` in a formula."""
    if isinstance(f, A.PAnd):
        return _certain_events(f.left) + _certain_events(f.right)
    if isinstance(f, A.PRel) and f.op == "=" and isinstance(f.left, A.Prob) and isinstance(f.right, A.RConst):
        if f.right.value == 1:
            return [f.left.body]
    return []


def _steered_pure(rng, params: SuiteParams, projections, values) -> PureState | None:
    st = random_pure(rng, params)
    vec = np.array(st.vector)
    for q, bit in projections:
        if q <= params.num_qubits:
            p = np.zeros((2, 2), dtype=complex)
            p[bit, bit] = 1
            vec = apply_matrix(vec, p, [q])
    norm = np.linalg.norm(vec)
    if norm < 1e-9:
        return None
    env = dict(st.store)
    env.update({k: v for k, v in values.items() if k in env})
    return PureState.make(env, vec / norm)


def sample_satisfying(pre, params: SuiteParams, interp: Interpretation | None = None,
                      sat_cfg: SatConfig = DEFAULT_SAT, max_tries: int | None = None) -> list:
    """Random states (or mixtures, for formulas) satisfying ``pre``.

    Candidates are projected onto the top-level P_j^i conjuncts and classical
    equalities of ``pre`` (for a formula, of the assertions it requires with
    probability 1) and then filtered by ``pre`` itself.
    """
    rng = np.random.default_rng(params.seed)
    ev = Evaluator(interp, sat_cfg)
    prob = _is_formula(pre)
    steer = A.conj(_certain_events(pre)) if prob else pre
    projections = _projection_constraints(steer)
    values = _value_constraints(steer)
    out = []
    for _ in range(max_tries or params.count * 200):
        if len(out) >= params.count:
            break
        if params.mixed or prob:
            parts = [_steered_pure(rng, params, projections, values) for _ in range(int(rng.integers(1, 5)))]
            parts = [s for s in parts if s is not None]
            if not parts:
                continue
            weights = rng.dirichlet(np.ones(len(parts)))
            cand = Distribution(zip(parts, (float(w) for w in weights)))
            if _holds(ev, pre, cand):
                out.append(cand)
            continue
        st = _steered_pure(rng, params, projections, values)
        if st is not None and ev.sat(pre, st):
            out.append(st)
    return out


# ---------------------------------------------------------------------------
# Triple checking


def _is_formula(node) -> bool:
    return isinstance(node, (A.PRel, A.PNot, A.PAnd))


def _as_dist(s) -> Distribution:
    return point_dist(s) if isinstance(s, PureState) else s


def _holds(ev: Evaluator, node, dist: Distribution) -> bool:
    if _is_formula(node):
        return ev.sat_prob(node, dist)
    return ev.sat_mixed(node, dist)


def _counterexample(idx: int, state, out: Distribution | None, post, ev: Evaluator) -> dict:
    cex = {"index": idx, "state": describe_state(state)}
    if out is not None:
        cex["post_state"] = describe_state(out)
        if isinstance(post, (A.PRel, A.PNot, A.PAnd)):
            sides = []
            _collect_sides(post, sides)
            cex["observed"] = {pretty(r): round(ev.real(r, out), 12) for r in sides}
        else:
            cex["violating_supports"] = [
                dict(describe_state(s), mass=round(m, 12)) for s, m in out.items() if not ev.sat(post, s)
            ]
    return cex


def _collect_sides(f, acc: list) -> None:
    if isinstance(f, A.PRel):
        acc.extend((f.left, f.right))
    elif isinstance(f, A.PNot):
        _collect_sides(f.body, acc)
    elif isinstance(f, A.PAnd):
        _collect_sides(f.left, acc)
        _collect_sides(f.right, acc)


@on_deep_stack
def check_semantic(t: A.Triple, states, interp: Interpretation | None = None,
                   exec_cfg: ExecConfig = DEFAULT_EXEC, sat_cfg: SatConfig = DEFAULT_SAT) -> Verdict:
    """Execute from every suite state satisfying the precondition and test the postcondition."""
    ev = Evaluator(interp, sat_cfg)
    verdict = Verdict(VALID, "semantic")
    for idx, state in enumerate(states):
        dist = _as_dist(state)
        if not _holds(ev, t.pre, dist):
            verdict.log.append({"index": idx, "pre": False})
            continue
        res = exec_cmd(t.prog, dist, exec_cfg)
        good = _holds(ev, t.post, res.out)
        truncated = res.residual_mass > RESIDUAL_TOL
        verdict.log.append({
            "index": idx, "pre": True, "post": good,
            "residual_mass": round(res.residual_mass, 12), "iterations": res.iterations_used,
        })
        definitive_failure = not good and (not truncated or t.sort == "det")
        if definitive_failure:
            verdict.status = INVALID
            verdict.counterexample = _counterexample(idx, state, res.out, t.post, ev)
            verdict.counterexample_state = state
            break
        if truncated:
            verdict.status = DEPTH_BOUNDED
            verdict.labels.add(LABEL_DEPTH)
    verdict.labels |= ev.flags
    return verdict


@on_deep_stack
def transform_post(t: A.Triple, depth: DepthConfig = DEFAULT_DEPTH, num_qubits: int | None = None):
    """wp or WP of the postcondition, plus whether loop bounds were involved."""
    m = num_qubits or max(max_qubit(t.prog), max_qubit(t.post))
    tr = Transformer(depth, m)
    pre = tr.wp(t.prog, t.post) if t.sort == "det" else tr.wp_prob(t.prog, t.post)
    return pre, tr.bounded


@on_deep_stack
def check_wp(t: A.Triple, states, depth: DepthConfig = DEFAULT_DEPTH, interp: Interpretation | None = None,
             exec_cfg: ExecConfig = DEFAULT_EXEC, sat_cfg: SatConfig = DEFAULT_SAT,
             num_qubits: int | None = None) -> Verdict:
    """Require the transformed postcondition on every suite state satisfying the precondition.

    Each state is cross-checked against execution; disagreements are recorded.
    When loop bounds were used the verdict is DEPTH_BOUNDED unless execution
    converged and agreed on every state.
    """
    weakest, bounded = transform_post(t, depth, num_qubits)
    ev = Evaluator(interp, sat_cfg)
    verdict = Verdict(VALID, "wp")
    all_confirmed = True
    for idx, state in enumerate(states):
        dist = _as_dist(state)
        if not _holds(ev, t.pre, dist):
            verdict.log.append({"index": idx, "pre": False})
            continue
        wp_ok = _holds(ev, weakest, dist)
        res = exec_cmd(t.prog, dist, exec_cfg)
        sem_ok = _holds(ev, t.post, res.out)
        converged = res.residual_mass <= RESIDUAL_TOL
        verdict.log.append({"index": idx, "pre": True, "wp": wp_ok, "semantic": sem_ok})
        if wp_ok != sem_ok and converged:
            verdict.disagreements.append({"index": idx, "wp": wp_ok, "semantic": sem_ok})
        if not (converged and wp_ok == sem_ok):
            all_confirmed = False
        definitive = not bounded or t.sort == "det"
        if not wp_ok and definitive:
            verdict.status = INVALID
            verdict.counterexample = _counterexample(idx, state, res.out, t.post, ev)
            verdict.counterexample["transformed_holds"] = False
            verdict.counterexample_state = state
            break
        if not wp_ok:
            verdict.status = DEPTH_BOUNDED
    if bounded and verdict.status == VALID and not all_confirmed:
        verdict.status = DEPTH_BOUNDED
    if bounded:
        verdict.labels.add(LABEL_DEPTH)
    verdict.labels |= ev.flags
    return verdict


# ---------------------------------------------------------------------------
# Proof scripts

def _same_prog(a, b) -> bool:
    return A.flatten_seq(a) == A.flatten_seq(b)


class ProofChecker:
    def __init__(self, script: A.ProofScript, states, interp: Interpretation | None = None,
                 depth: DepthConfig = DEFAULT_DEPTH, exec_cfg: ExecConfig = DEFAULT_EXEC,
                 sat_cfg: SatConfig = DEFAULT_SAT, num_qubits: int | None = None, target: A.Triple | None = None):
        self.script = script
        self.states = [_as_dist(s) for s in states]
        self.ev = Evaluator(interp, sat_cfg)
        self.depth = depth
        self.exec_cfg = exec_cfg
        self.num_qubits = num_qubits
        self.target = target
        self.steps = {s.label: s for s in script.steps}
        self.verdict = Verdict(VALID, "proof")

    def mismatch(self, step, what: str, expected, given):
        raise RuleMismatch(f"{step.rule}: {what}", step.label, pretty(expected), pretty(given))

    def require(self, step, cond: bool, message: str):
        if not cond:
            raise RuleMismatch(f"{step.rule}: {message}", step.label)

    def premises(self, step, n: int):
        self.require(step, len(step.premises) == n, f"expects {n} premise(s), got {len(step.premises)}")
        return [self.steps[p].conclusion for p in step.premises]

    def run(self) -> Verdict:
        for step in self.script.steps:
            c = step.conclusion
            if self.script.sort == "det":
                self.require(step, not _is_formula(c.pre) and not _is_formula(c.post),
                             "deterministic proof with probabilistic assertions")
            else:
                self.require(step, _is_formula(c.pre) and _is_formula(c.post),
                             "probabilistic proof needs probabilistic formulas")
            getattr(self, "rule_" + step.rule)(step, c)
            if self.verdict.status == INVALID:
                return self.verdict
        if self.target is not None:
            root = self.script.root.conclusion
            t = self.target
            if not _same_prog(root.prog, t.prog):
                self.mismatch(self.script.root, "root program differs from the target triple", t.prog, root.prog)
            if root.pre != t.pre:
                self.mismatch(self.script.root, "root precondition differs from the target triple", t.pre, root.pre)
            if root.post != t.post:
                self.mismatch(self.script.root, "root postcondition differs from the target triple", t.post, root.post)
        self.verdict.labels |= self.ev.flags
        return self.verdict

    # -- axioms ----------------------------------------------------------

    def _axiom(self, step, c, kind, expected_pre):
        self.premises(step, 0)
        self.require(step, isinstance(c.prog, kind), f"program must be a {kind.__name__} command")
        pre = expected_pre()
        if not equivalent_syntax(c.pre, pre):
            self.mismatch(step, "precondition does not match the rule schema", pre, c.pre)

    def _prob_axiom(self, step, c, kind):
        def expected():
            tr = Transformer(self.depth, self.num_qubits or max(max_qubit(c.prog), max_qubit(c.post)))
            out = tr.wp_prob(c.prog, c.post)
            if tr.bounded:
                self.verdict.labels.add(LABEL_DEPTH)
                if self.verdict.status == VALID:
                    self.verdict.status = DEPTH_BOUNDED
            return out
        self._axiom(step, c, kind, expected)

    def rule_SKIP(self, step, c):
        self._axiom(step, c, A.Skip, lambda: c.post)

    def rule_AS(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.Assign)
        self._axiom(step, c, A.Assign, lambda: subst_prog_var(c.post, c.prog.var, c.prog.expr))

    def rule_PAS(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.RandAssign)
        self._axiom(step, c, A.RandAssign, lambda: A.conj(
            subst_prog_var(c.post, c.prog.var, A.Num(v)) for _, v in c.prog.branches))

    def rule_UNITARY(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.Apply)
        self._axiom(step, c, A.Apply, lambda: A.BoxU(c.prog.gate, c.prog.qubits, c.post))

    def rule_MEASURE(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.Measure)
        self._axiom(step, c, A.Measure, lambda: Transformer(self.depth).wp(c.prog, c.post))

    # -- compound rules ----------------------------------------------------

    def rule_SEQ(self, step, c):
        p1, p2 = self.premises(step, 2)
        given = A.flatten_seq(c.prog)
        want = A.flatten_seq(p1.prog) + A.flatten_seq(p2.prog)
        if given != want:
            self.mismatch(step, "program is not the composition of the premises", A.seq(want), c.prog)
        if p1.post != p2.pre:
            self.mismatch(step, "middle assertions of the premises differ", p1.post, p2.pre)
        if c.pre != p1.pre:
            self.mismatch(step, "precondition differs from the first premise", p1.pre, c.pre)
        if c.post != p2.post:
            self.mismatch(step, "postcondition differs from the second premise", p2.post, c.post)

    def rule_IF(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.If)
        self.require(step, isinstance(c.prog, A.If), "program must be an if command")
        p1, p2 = self.premises(step, 2)
        b = c.prog.cond
        for prem, branch, guard in ((p1, c.prog.then, b), (p2, c.prog.orelse, A.Not(b))):
            if not _same_prog(prem.prog, branch):
                self.mismatch(step, "premise program differs from the branch", branch, prem.prog)
            want_pre = A.And(c.pre, guard)
            if prem.pre != want_pre:
                self.mismatch(step, "premise precondition must be the conjunction with the guard", want_pre, prem.pre)
            if prem.post != c.post:
                self.mismatch(step, "premise postcondition differs", c.post, prem.post)

    def rule_WHILE(self, step, c):
        if self.script.sort == "prob":
            return self._prob_axiom(step, c, A.While)
        self.require(step, isinstance(c.prog, A.While), "program must be a while loop")
        (p,) = self.premises(step, 1)
        b = c.prog.cond
        if not _same_prog(p.prog, c.prog.body):
            self.mismatch(step, "premise program differs from the loop body", c.prog.body, p.prog)
        if p.pre != A.And(c.pre, b):
            self.mismatch(step, "premise precondition must be invariant and guard", A.And(c.pre, b), p.pre)
        if p.post != c.pre:
            self.mismatch(step, "premise postcondition must be the invariant", c.pre, p.post)
        want_post = A.And(c.pre, A.Not(b))
        if c.post != want_post:
            self.mismatch(step, "postcondition must be invariant and negated guard", want_post, c.post)

    def rule_CONS(self, step, c):
        (p,) = self.premises(step, 1)
        if not _same_prog(p.prog, c.prog):
            self.mismatch(step, "premise program differs", c.prog, p.prog)
        self.verdict.labels.add(LABEL_SUITE)
        if c.pre != p.pre:
            for idx, dist in enumerate(self.states):
                if _holds(self.ev, c.pre, dist) and not _holds(self.ev, p.pre, dist):
                    return self._cons_failure(step, "strengthened precondition", idx, dist, c.pre, p.pre)
        if c.post != p.post:
            candidates = list(self.states)
            for dist in self.states:
                if _holds(self.ev, p.pre, dist):
                    res = exec_cmd(p.prog, dist, self.exec_cfg)
                    if self.script.sort == "det":
                        candidates.extend(point_dist(s) for s in res.out.supports())
                    else:
                        candidates.append(res.out)
            for idx, dist in enumerate(candidates):
                if _holds(self.ev, p.post, dist) and not _holds(self.ev, c.post, dist):
                    return self._cons_failure(step, "weakened postcondition", idx, dist, p.post, c.post)

    def _cons_failure(self, step, which, idx, dist, antecedent, consequent):
        self.verdict.status = INVALID
        self.verdict.counterexample = {
            "step": step.label,
            "side_condition": which,
            "implication": f"{pretty(antecedent)}  ->  {pretty(consequent)}",
            "state": describe_state(dist),
            "index": idx,
        }
        self.verdict.counterexample_state = dist


@on_deep_stack
def check_proof(script: A.ProofScript, states, interp: Interpretation | None = None,
                depth: DepthConfig = DEFAULT_DEPTH, exec_cfg: ExecConfig = DEFAULT_EXEC,
                sat_cfg: SatConfig = DEFAULT_SAT, num_qubits: int | None = None,
                target: A.Triple | None = None) -> Verdict:
    """Check every step; raises :class:`RuleMismatch` on a schema violation."""
    return ProofChecker(script, states, interp, depth, exec_cfg, sat_cfg, num_qubits, target).run()
