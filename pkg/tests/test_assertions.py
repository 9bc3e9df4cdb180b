import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhl import ast as A
from qhl.assertions import Evaluator, VACUOUS_PROJECTION, eval_real, real_compare, sat_mixed, sat_prob, sat_pure
from qhl.cqstate import Distribution, Interpretation, PureState, basis_state
from qhl.errors import EvaluationError
from qhl.generators import AstGen, GenConfig, StateGen
from qhl.parser import parse_assertion, parse_formula, parse_real

PLUS = np.array([1, 1]) / np.sqrt(2)
seeds = st.integers(0, 2 ** 32 - 1)


def ket(vec, **store) -> PureState:
    return PureState.make(store, vec)


def test_projection_atoms():
    assert sat_pure(parse_assertion("P0(1)"), ket(basis_state(1, "0")))
    assert not sat_pure(parse_assertion("P0(1)"), ket(PLUS))
    assert sat_pure(parse_assertion("P1(2) && P0(1)"), ket(basis_state(2, "01")))


def test_projection_atom_tolerance():
    eps = 1e-11
    vec = np.array([np.sqrt(1 - eps), np.sqrt(eps)])
    assert sat_pure(parse_assertion("P0(1)"), ket(vec))


def test_unitary_modality():
    assert sat_pure(parse_assertion("[H[q1]] P0(1)"), ket(PLUS))
    assert not sat_pure(parse_assertion("[H[q1]] P1(1)"), ket(PLUS))


def test_projection_modality_conditions_on_outcome():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert sat_pure(parse_assertion("[Proj 1,1] P1(2)"), ket(bell))
    assert not sat_pure(parse_assertion("[Proj 1,1] P0(2)"), ket(bell))


def test_projection_modality_is_vacuous_on_impossible_outcome():
    ev = Evaluator()
    assert ev.sat(parse_assertion("[Proj 1,1] false"), ket(basis_state(1, "0")))
    assert VACUOUS_PROJECTION in ev.flags


def test_classical_relations_and_connectives():
    s = ket(basis_state(1, "0"), X=2, Y=-1)
    assert sat_pure(parse_assertion("X + Y = 1 && !(X < Y) && (X = 0 || Y = -1)"), s)
    assert sat_pure(parse_assertion("X = 0 -> false"), s)


def test_forall_ranges_over_declared_values():
    phi = parse_assertion("forall n . X + n >= n")
    s = ket(basis_state(1, "0"), X=0)
    assert sat_pure(phi, s, Interpretation(ranges={"n": (0, 5)}))
    assert not sat_pure(phi, ket(basis_state(1, "0"), X=-1), Interpretation(ranges={"n": (0, 5)}))
    with pytest.raises(EvaluationError, match="no range"):
        sat_pure(phi, s)


def test_possibility_semantics_needs_every_support():
    d = Distribution([(ket(basis_state(1, "0"), X=0), 0.5), (ket(basis_state(1, "0"), X=1), 0.5)])
    assert sat_mixed(parse_assertion("X >= 0"), d)
    assert not sat_mixed(parse_assertion("X = 0"), d)
    assert sat_mixed(parse_assertion("false"), Distribution.empty())


def test_probability_and_cq_conditional_values():
    d = Distribution([(ket(basis_state(1, "0"), X=0), 0.25), (ket(PLUS, X=1), 0.75)])
    assert eval_real(parse_real("P[ X = 1 ]"), d) == pytest.approx(0.75)
    assert eval_real(parse_real("(true => mask[1])"), d) == pytest.approx(0.375)
    assert eval_real(parse_real("(X = 0 => mask[0])"), d) == pytest.approx(0.25)
    assert eval_real(parse_real("sum[ P[ X = 0 ], 2 * P[ X = 1 ] ]"), d) == pytest.approx(1.75)


def test_dense_cq_conditional():
    d = Distribution.point(ket(PLUS))
    r = parse_real("(true => matrix[0.5, 0.5, 0.5, 0.5])")
    assert eval_real(r, d) == pytest.approx(1.0)


def test_real_variables_need_a_binding():
    d = Distribution.point(ket(basis_state(1, "0")))
    assert eval_real(parse_real("$p * 2"), d, Interpretation(real={"p": 0.25})) == 0.5
    with pytest.raises(EvaluationError, match="unbound"):
        eval_real(parse_real("$p"), d)


def test_formulas():
    d = Distribution([(ket(basis_state(1, "0"), X=0), 0.5), (ket(basis_state(1, "1"), X=1), 0.5)])
    assert sat_prob(parse_formula("P[ X = 0 ] = 0.5 && P[ true ] >= 1"), d)
    assert sat_prob(parse_formula("!(P[ X = 0 ] > 0.5)"), d)
    assert not sat_prob(parse_formula("P[ X = 0 ] < 0.5"), d)


def test_equality_uses_tolerance_and_strict_order_respects_it():
    assert real_compare("=", 0.5, 0.5 + 1e-12, 1e-9)
    assert not real_compare("<", 0.5, 0.5 + 1e-12, 1e-9)
    assert real_compare("<", 0.5, 0.6, 1e-9)
    assert real_compare("<=", 0.5 + 1e-12, 0.5, 1e-9)


@settings(max_examples=500, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_comparisons_are_trichotomous(a, b):
    outcomes = [real_compare(op, a, b, 1e-9) for op in ("<", "=", ">")]
    assert sum(outcomes) == 1
    assert real_compare("<=", a, b, 1e-9) == (outcomes[0] or outcomes[1])
    assert real_compare("!=", a, b, 1e-9) == (not outcomes[1])


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_probabilities_lie_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    cfg = GenConfig(num_qubits=int(rng.integers(1, 3)))
    g, s = AstGen(rng, cfg), StateGen(rng, cfg)
    d = s.mixed(sub=True)
    for _ in range(5):
        v = eval_real(g.real_atom(), d)
        assert -1e-12 <= v <= d.mass() + 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_negation_and_conjunction_are_boolean(seed):
    rng = np.random.default_rng(seed)
    cfg = GenConfig(num_qubits=int(rng.integers(1, 3)))
    g, s = AstGen(rng, cfg), StateGen(rng, cfg).pure()
    a, b = g.assertion(), g.assertion()
    assert sat_pure(A.Not(a), s) == (not sat_pure(a, s))
    assert sat_pure(A.And(a, b), s) == (sat_pure(a, s) and sat_pure(b, s))
