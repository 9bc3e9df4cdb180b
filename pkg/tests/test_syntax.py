import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhl import ast as A
from qhl.assertions import eval_real, sat_pure
from qhl.cqstate import PureState
from qhl.errors import ParseError, SpecError
from qhl.gates import BUILTIN_GATES
from qhl.generators import AstGen, GenConfig, StateGen
from qhl.parser import parse_arith, parse_assertion, parse_command, parse_formula, parse_real, parse_spec
from qhl.pretty import pretty
from qhl.semantics import eval_arith
from qhl.simplify import equivalent_syntax, simplify
from qhl.subst import subst_prog_var
from qhl.wpcalc import preterm, wp_det

seeds = st.integers(0, 2 ** 32 - 1)
X, Y = A.PVar("X"), A.PVar("Y")


def gen(seed, **kw):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 3))
    return AstGen(rng, GenConfig(num_qubits=m, **kw))


# -- parsing --------------------------------------------------------------


def test_sequence_is_right_nested():
    c = parse_command("H[q1]; X <<= q1; skip")
    assert isinstance(c, A.Seq) and isinstance(c.second, A.Seq)
    assert c.first == A.Apply(BUILTIN_GATES["H"], (1,))


def test_while_body_extends_over_parenthesized_sequence():
    c = parse_command("while X > 0 do (X <- X - 1; H[q1])")
    assert isinstance(c, A.While) and isinstance(c.body, A.Seq)


def test_random_assignment_branches():
    c = parse_command("X <-$ {0.25: 1, 0.75: -2}")
    assert c == A.RandAssign("X", ((0.25, 1), (0.75, -2)))


def test_probabilities_must_sum_to_one():
    with pytest.raises(ParseError, match="probabilities sum to 1.1"):
        parse_command("X <-$ {0.5: 0, 0.6: 1}")


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_command("X <- ")
    assert (info.value.line, info.value.col) == (1, 6)


def test_unknown_gate_is_rejected():
    with pytest.raises(ParseError, match="unknown gate"):
        parse_spec("qubits 1\nprogram p { Q[q1] }")


def test_arithmetic_precedence():
    assert parse_arith("1 + 2 * X") == A.ABin("+", A.Num(1), A.ABin("*", A.Num(2), X))
    assert parse_arith("-3") == A.Num(-3)


def test_logical_variables_are_lowercase():
    phi = parse_assertion("forall n . X + n >= n")
    assert phi == A.Forall("n", A.Rel(">=", A.ABin("+", X, A.LVar("n")), A.LVar("n")))


def test_connective_sugar():
    a, b = A.Proj(1, 0), A.Rel("=", X, A.Num(1))
    assert parse_assertion("P0(1) || X = 1") == A.Or(a, b)
    assert parse_assertion("P0(1) -> X = 1") == A.Implies(a, b)
    assert parse_assertion("P0(1) && X = 1 || true") == A.Or(A.And(a, b), A.Top())


def test_modalities():
    phi = parse_assertion("[H[q1]] [Proj 1,0] P1(1)")
    assert phi == A.BoxU(BUILTIN_GATES["H"], (1,), A.BoxProj(1, 0, A.Proj(1, 1)))


def test_real_terms():
    r = parse_real("0.5 * P[ X = 0 ] + (P0(1) => mask[1*])")
    assert isinstance(r, A.RBin) and r.op == "+"
    assert r.right == A.CqCond(A.Proj(1, 0), A.MaskProjector(("1*",)))


def test_formula_connectives():
    f = parse_formula("P[ X = 0 ] >= 0.5 && !(P[ true ] = 1)")
    assert isinstance(f, A.PAnd) and isinstance(f.right, A.PNot)


def test_spec_file_declarations():
    spec = parse_spec(
        "qubits 2\nvars X\nlogvars n : 0..3\n"
        "gate G dim 2 matrix [0, 1, 1, 0]\n"
        "oracle U table 0->1, 1->0\n"
        "projector Q mask [1*]\n"
        "state s { X = 1 } |10>\n"
        "program p { G[q1]; U[q1, q2]; X <<= q2 }\n"
        "triple t { X = 1 } p { true }\n"
    )
    assert spec.num_qubits == 2 and spec.vars == ("X",)
    assert spec.logvar_ranges["n"] == (0, 3)
    assert spec.triples["t"].sort == "det"
    assert spec.projectors["Q"].patterns == ("1*",)


def test_non_unitary_gate_is_rejected():
    with pytest.raises((SpecError, ParseError), match="unitary"):
        parse_spec("qubits 1\ngate G dim 2 matrix [1, 1, 0, 1]\n")


def test_non_projector_matrix_is_rejected():
    with pytest.raises((SpecError, ParseError), match="projector"):
        parse_spec("qubits 1\nprojector Q matrix [0.5, 0, 0, 1]\n")


def test_triple_sort_detection():
    spec = parse_spec("qubits 1\nvars X\ntriple a { true } skip { X = 0 }\n"
                      "triple b { P[ true ] = 1 } skip { P[ X = 0 ] >= 0.5 }\n")
    assert spec.triples["a"].sort == "det" and spec.triples["b"].sort == "prob"


# -- substitution -----------------------------------------------------------


def test_substitution_replaces_program_variable_only():
    phi = parse_assertion("forall n . X + n >= Y")
    out = subst_prog_var(phi, "X", A.ABin("-", X, A.Num(1)))
    assert pretty(out) == "forall n . (X - 1) + n >= Y"


def test_substitution_preserves_untouched_subtrees():
    shared = parse_assertion("[H[q1]] P0(1) && Y = 2")
    phi = A.And(shared, A.Rel("=", X, A.Num(0)))
    out = subst_prog_var(phi, "X", A.Num(3))
    assert out.left is shared


def test_substitution_reaches_real_terms():
    r = parse_real("P[ X = 1 ] + (X = 1 => mask[1])")
    out = subst_prog_var(r, "X", A.Num(1))
    assert pretty(out) == "P[ 1 = 1 ] + (1 = 1 => mask[1])"


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_substitution_agrees_with_assignment(seed):
    g = gen(seed, vars=("X", "Y"))
    phi, e = g.assertion(), g.arith(1)
    rng = np.random.default_rng(seed + 1)
    vec = np.zeros(2 ** g.cfg.num_qubits, dtype=complex)
    vec[0] = 1
    s = PureState.make({"X": int(rng.integers(-2, 3)), "Y": int(rng.integers(-2, 3))}, vec)
    moved = s.with_store(X=eval_arith(e, s.env))
    assert sat_pure(subst_prog_var(phi, "X", e), s) == sat_pure(phi, moved)


# -- printing and round trip ----------------------------------------------


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_commands_round_trip(seed):
    c = gen(seed, vars=("X", "Y"), max_commands=6).command()
    assert parse_command(pretty(c)) == c


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_assertions_round_trip(seed):
    phi = gen(seed).assertion(4)
    assert parse_assertion(pretty(phi)) == phi


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_reals_and_formulas_round_trip(seed):
    g = gen(seed)
    r, f = g.real(3), g.formula(3)
    assert parse_real(pretty(r)) == r
    assert parse_formula(pretty(f)) == f


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_transformer_output_round_trips(seed):
    g = gen(seed)
    c = g.command()
    phi, r = g.assertion(), g.real()
    w = wp_det(c, phi)
    p = preterm(c, r, num_qubits=g.cfg.num_qubits)
    assert parse_assertion(pretty(w)) == w
    assert parse_real(pretty(p)) == p


# -- simplification ---------------------------------------------------------


def test_simplifier_folds_constants():
    assert simplify(parse_assertion("1 + 1 = 2 && X = 0")) == A.Rel("=", X, A.Num(0))
    assert simplify(parse_assertion("[H[q1]] (2 < 1)")) == A.Bot()
    assert simplify(parse_real("P[ 1 = 2 ] + 0.5 * P[ X = 0 ]")) == parse_real("0.5 * P[ X = 0 ]")


def test_simplifier_keeps_vacuous_projection():
    phi = parse_assertion("[Proj 1,0] false")
    assert simplify(phi) == phi


def test_equivalent_syntax_ignores_folding():
    assert equivalent_syntax(parse_assertion("X = 0 && true"), parse_assertion("X = 0"))
    assert not equivalent_syntax(parse_assertion("X = 0"), parse_assertion("X = 1"))


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_simplification_preserves_meaning(seed):
    g = gen(seed, vars=("X", "Y"))
    states = StateGen(np.random.default_rng(seed + 7), g.cfg)
    phi, r = g.assertion(), g.real()
    s, d = states.pure(), states.mixed()
    assert sat_pure(simplify(phi), s) == sat_pure(phi, s)
    assert eval_real(simplify(r), d) == pytest.approx(eval_real(r, d), abs=1e-12)
