"""Denotational interpreter: commands map subdistributions of cq-states to subdistributions."""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A
from .cqstate import Distribution, PureState, apply_gate, measure_qubit, point_dist
from .errors import EvaluationError

INT64_MIN, INT64_MAX = -(2 ** 63), 2 ** 63 - 1


@dataclass(frozen=True)
class ExecConfig:
    max_while_iters: int = 10_000
    mass_epsilon: float = 1e-12
    prune_epsilon: float = 1e-12

    def __post_init__(self):
        if self.max_while_iters < 0:
            raise ValueError("max_while_iters must be non-negative")
        if self.mass_epsilon <= 0 or self.prune_epsilon <= 0:
            raise ValueError("mass and prune thresholds must be positive")


@dataclass(frozen=True)
class ExecResult:
    out: Distribution
    residual_mass: float = 0.0
    iterations_used: int = 0

    @property
    def converged(self) -> bool:
        return self.residual_mass <= 1e-9


DEFAULT_EXEC = ExecConfig()


# ---------------------------------------------------------------------------
# Expressions


def eval_arith(e, env: dict, logical: dict | None = None) -> int:
    if isinstance(e, A.Num):
        return e.value
    if isinstance(e, A.PVar):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"unbound program variable {e.name}") from None
    if isinstance(e, A.LVar):
        if logical is None or e.name not in logical:
            raise EvaluationError(f"unbound logical variable {e.name}")
        return logical[e.name]
    if isinstance(e, A.ABin):
        a = eval_arith(e.left, env, logical)
        b = eval_arith(e.right, env, logical)
        if e.op == "+":
            v = a + b
        elif e.op == "-":
            v = a - b
        elif e.op == "*":
            v = a * b
        else:
            raise EvaluationError(f"unknown arithmetic operator {e.op}")
        if not INT64_MIN <= v <= INT64_MAX:
            raise EvaluationError(f"integer overflow evaluating {a} {e.op} {b}")
        return v
    raise EvaluationError(f"not an arithmetic expression: {e!r}")


def compare(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvaluationError(f"unknown relation {op}")


def eval_guard(b, env: dict) -> bool:
    """Truth value of a program-level Boolean expression in a classical store."""
    if isinstance(b, A.Top):
        return True
    if isinstance(b, A.Bot):
        return False
    if isinstance(b, A.Rel):
        return compare(b.op, eval_arith(b.left, env), eval_arith(b.right, env))
    if isinstance(b, A.Not):
        return not eval_guard(b.body, env)
    if isinstance(b, A.And):
        return eval_guard(b.left, env) and eval_guard(b.right, env)
    raise EvaluationError(f"not a program guard: {type(b).__name__}")


def restrict_guard(dist: Distribution, b) -> Distribution:
    """The restriction operator: keep supports whose store satisfies ``b``."""
    return dist.filter(lambda s: eval_guard(b, s.env))


# ---------------------------------------------------------------------------
# Commands


def _assign(state: PureState, var: str, value: int) -> PureState:
    env = dict(state.store)
    env[var] = value
    return PureState(tuple(env.items()), state.vector)


def _check_qubits(state: PureState, qubits) -> None:
    m = state.num_qubits
    for q in qubits:
        if q < 1 or q > m:
            raise EvaluationError(f"qubit {q} out of range for a {m}-qubit state")


class _Interp:
    def __init__(self, cfg: ExecConfig):
        self.cfg = cfg

    def run(self, c, dist: Distribution):
        """Returns (output, residual mass, while iterations)."""
        if isinstance(c, A.Skip):
            return dist, 0.0, 0
        if isinstance(c, A.Assign):
            return Distribution(
                (_assign(s, c.var, eval_arith(c.expr, s.env)), m) for s, m in dist
            ), 0.0, 0
        if isinstance(c, A.RandAssign):
            return Distribution(
                (_assign(s, c.var, v), m * p) for s, m in dist for p, v in c.branches
            ), 0.0, 0
        if isinstance(c, A.Seq):
            mid, r1, i1 = self.run(c.first, dist)
            out, r2, i2 = self.run(c.second, mid)
            return out, r1 + r2, i1 + i2
        if isinstance(c, A.If):
            yes, r1, i1 = self.run(c.then, restrict_guard(dist, c.cond))
            no, r2, i2 = self.run(c.orelse, restrict_guard(dist, A.Not(c.cond)))
            return yes + no, r1 + r2, i1 + i2
        if isinstance(c, A.While):
            return self.run_while(c, dist)
        if isinstance(c, A.Apply):
            pairs = []
            for s, m in dist:
                _check_qubits(s, c.qubits)
                pairs.append((s.with_vector(apply_gate(s.vector, c.gate, c.qubits)), m))
            return Distribution(pairs), 0.0, 0
        if isinstance(c, A.Measure):
            pairs = []
            for s, m in dist:
                _check_qubits(s, (c.qubit,))
                for bit, (p, vec) in enumerate(measure_qubit(s.vector, c.qubit)):
                    if vec is not None and p > self.cfg.prune_epsilon:
                        pairs.append((_assign(s, c.var, bit).with_vector(vec), m * p))
            return Distribution(pairs), 0.0, 0
        raise EvaluationError(f"not a command: {c!r}")

    def run_while(self, c: A.While, dist: Distribution):
        exited = Distribution.empty()
        current = dist
        residual = 0.0
        iters = 0
        not_b = A.Not(c.cond)
        while True:
            exited = exited + restrict_guard(current, not_b)
            inside = restrict_guard(current, c.cond)
            left = inside.mass()
            if left <= self.cfg.mass_epsilon or iters >= self.cfg.max_while_iters:
                residual += left
                break
            current, r, inner = self.run(c.body, inside)
            residual += r
            iters += 1 + inner
        return exited, residual, iters


def exec_cmd(c, dist: Distribution, cfg: ExecConfig = DEFAULT_EXEC) -> ExecResult:
    out, residual, iters = _Interp(cfg).run(c, dist)
    return ExecResult(out, residual, iters)


def exec_pure(c, state: PureState, cfg: ExecConfig = DEFAULT_EXEC) -> ExecResult:
    return exec_cmd(c, point_dist(state), cfg)


def power(c, n: int):
    """``c; c; ...; c`` with ``n`` copies (``skip`` for n = 0)."""
    return A.seq([c] * n)
