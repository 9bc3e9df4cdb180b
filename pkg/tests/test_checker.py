from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhl.assertions import Evaluator
from qhl.checker import (DEPTH_BOUNDED, INVALID, VALID, SuiteParams, check_proof, check_semantic, check_wp,
                         sample_satisfying, sample_states)
from qhl.cqstate import Distribution, PureState, basis_state
from qhl.errors import ParseError, RuleMismatch
from qhl.loader import interpretations, proof_suite, triple_suite
from qhl.parser import parse_assertion, parse_formula, parse_spec
from qhl.semantics import ExecConfig
from qhl.wpcalc import DepthConfig

SPECS = Path(__file__).resolve().parent.parent / "specs"


def load(name: str):
    return parse_spec((SPECS / name).read_text())


def both(spec, name, count=20, seed=0):
    t = spec.triples[name]
    interp = interpretations(spec, name)[0]
    suite = triple_suite(spec, t, count, seed, interp)
    return check_semantic(t, suite, interp), check_wp(t, suite, interp=interp, num_qubits=spec.num_qubits)


@pytest.mark.parametrize("name", ["const0", "const1", "balanced_id", "balanced_neg", "const0_prob"])
def test_deutsch_triples_hold(name):
    sem, wp = both(load("deutsch.qhl"), name)
    assert sem.status == VALID and wp.status == VALID
    assert not wp.disagreements


def test_wrong_postcondition_yields_counterexample():
    sem, wp = both(load("deutsch.qhl"), "const0_wrong")
    assert sem.status == INVALID and wp.status == INVALID
    cex = sem.counterexample
    assert cex["violating_supports"] and cex["violating_supports"][0]["store"]["X"] == 0


@pytest.mark.parametrize("name", ["tele_zero", "tele_one"])
def test_teleport_triples_hold(name):
    sem, wp = both(load("teleport.qhl"), name, count=10)
    assert sem.ok and wp.ok


@pytest.mark.parametrize("name", ["countdown_ends", "coin_fair", "ranged"])
def test_loop_and_coin_triples_hold(name):
    sem, wp = both(load("loops.qhl"), name, count=10)
    assert sem.ok and wp.ok


def test_divergent_loop_is_depth_bounded():
    spec = parse_spec("qubits 1\nvars X\nprogram spin { while true do skip }\ntriple t { true } spin { false }\n")
    t = spec.triples["t"]
    suite = triple_suite(spec, t, 3, 0)
    # the vanished output satisfies false, but only up to the iteration cap
    sem = check_semantic(t, suite, exec_cfg=ExecConfig(max_while_iters=20))
    assert sem.status == DEPTH_BOUNDED
    prob = parse_spec("qubits 1\nvars X\nprogram spin { while true do skip }\n"
                      "triple t prob { P[ true ] = 1 } spin { P[ true ] = 0 }\n").triples["t"]
    sem = check_semantic(prob, triple_suite(spec, prob, 3, 0), exec_cfg=ExecConfig(max_while_iters=20))
    assert sem.status == DEPTH_BOUNDED
    wp = check_wp(prob, triple_suite(spec, prob, 3, 0), DepthConfig(6, 6), exec_cfg=ExecConfig(max_while_iters=20))
    assert wp.status == DEPTH_BOUNDED


def test_suites_are_deterministic():
    params = SuiteParams(count=5, seed=11, num_qubits=2, vars=("X",))
    a, b = sample_states(params), sample_states(params)
    assert a == b


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["P0(1) && X = 2", "P1(2) && P0(1)", "X >= 1 && P1(1)"]))
def test_sampled_states_satisfy_the_precondition(seed, text):
    pre = parse_assertion(text)
    params = SuiteParams(count=5, seed=seed, num_qubits=2, vars=("X",), structured=True)
    ev = Evaluator()
    states = sample_satisfying(pre, params)
    assert len(states) == 5
    assert all(ev.sat(pre, s) for s in states)


def test_sampled_mixtures_satisfy_a_formula():
    pre = parse_formula("P[ P0(1) ] = 1 && P[ X = 1 ] >= 0.25")
    params = SuiteParams(count=5, seed=3, num_qubits=1, vars=("X",), structured=True)
    ev = Evaluator()
    assert all(ev.sat_prob(pre, d) for d in sample_satisfying(pre, params))


# -- proofs ---------------------------------------------------------------


def deutsch_proof():
    spec = load("deutsch.qhl")
    script = spec.proofs["deutsch_const0_proof"]
    interp = interpretations(spec, script.target)[0]
    suite = proof_suite(spec, script, 20, 0, interp)
    return spec, script, suite


def test_deutsch_proof_is_accepted():
    spec, script, suite = deutsch_proof()
    v = check_proof(script, suite, num_qubits=2, target=spec.triples["const0"])
    assert v.status == VALID


def test_swapping_an_axiom_triple_is_a_rule_mismatch():
    spec, script, suite = deutsch_proof()
    first = script.steps[0]
    c = first.conclusion
    bad = replace(script, steps=(replace(first, conclusion=replace(c, pre=c.post, post=c.pre)),) + script.steps[1:])
    with pytest.raises(RuleMismatch) as info:
        check_proof(bad, suite, num_qubits=2)
    assert info.value.step == "c1u"


def test_wrong_root_is_rejected_against_target():
    spec, script, suite = deutsch_proof()
    with pytest.raises(RuleMismatch, match="root postcondition"):
        check_proof(script, suite, num_qubits=2, target=replace(spec.triples["const0"], post=parse_assertion("X = 1")))


def proof_spec(body: str, sort="det"):
    text = "qubits 1\nvars X\n" + f"proof p {sort} {{\n{body}\n}}\n"
    return parse_spec(text).proofs["p"]


def states_x(values):
    return [PureState.make({"X": x}, basis_state(1, b)) for x in values for b in "01"]


def test_while_rule_with_invariant():
    script = proof_spec(
        "a: AS { X - 1 >= 0 } X <- X - 1 { X >= 0 }\n"
        "b: CONS from a { X >= 0 && X > 0 } X <- X - 1 { X >= 0 }\n"
        "w: WHILE from b { X >= 0 } while X > 0 do X <- X - 1 { X >= 0 && !(X > 0) }\n"
        "c: CONS from w { X >= 0 } while X > 0 do X <- X - 1 { X = 0 }"
    )
    assert check_proof(script, states_x(range(-3, 4))).status == VALID


def test_while_rule_rejects_wrong_postcondition_shape():
    script = proof_spec(
        "a: AS { X - 1 >= 0 } X <- X - 1 { X >= 0 }\n"
        "b: CONS from a { X >= 0 && X > 0 } X <- X - 1 { X >= 0 }\n"
        "w: WHILE from b { X >= 0 } while X > 0 do X <- X - 1 { X = 0 }"
    )
    with pytest.raises(RuleMismatch, match="negated guard"):
        check_proof(script, states_x(range(3)))


IF_STEPS = (
    "t: UNITARY { [X[q1]] P1(1) } X[q1] { P1(1) }\n"
    "t2: CONS from t { P0(1) && X = 1 } X[q1] { P1(1) }\n"
    "e: SKIP { P1(1) } skip { P1(1) }\n"
    "e2: CONS from e { P1(1) && !(X = 1) } skip { P1(1) }\n"
)


def test_if_rule():
    script = proof_spec(IF_STEPS + "i: IF from t2, e2 { P0(1) } if X = 1 then X[q1] else skip { P1(1) }")
    # the else premise needs P1(1), which P0(1) never gives
    with pytest.raises(RuleMismatch, match="conjunction with the guard"):
        check_proof(script, states_x(range(3)))
    script = proof_spec(IF_STEPS.replace("{ P1(1) && !(X = 1) }", "{ P0(1) && !(X = 1) }")
                        + "i: IF from t2, e2 { P0(1) } if X = 1 then X[q1] else skip { P1(1) }")
    v = check_proof(script, states_x(range(3)))
    # e2 claims skip turns P0(1) into P1(1), so the consequence check finds a state
    assert v.status == INVALID and v.counterexample["step"] == "e2"


def test_if_rule_rejects_swapped_branches():
    script = proof_spec(IF_STEPS + "i: IF from e2, t2 { P0(1) } if X = 1 then X[q1] else skip { P1(1) }")
    with pytest.raises(RuleMismatch, match="differs from the branch"):
        check_proof(script, states_x(range(3)))


def test_unsound_consequence_gives_counterexample():
    script = proof_spec(
        "a: AS { X + 1 = 1 } X <- X + 1 { X = 1 }\n"
        "b: CONS from a { X >= 0 } X <- X + 1 { X = 1 }"
    )
    v = check_proof(script, states_x(range(3)))
    assert v.status == INVALID
    assert v.counterexample["step"] == "b" and v.counterexample["side_condition"] == "strengthened precondition"


def test_measurement_axiom_uses_the_transformer():
    script = proof_spec("m: MEASURE { ([Proj 1,0] 0 = 0 || P1(1)) && ([Proj 1,1] 1 = 0 || P0(1)) } X <<= q1 { X = 0 }")
    assert check_proof(script, states_x([0])).status == VALID


def test_probabilistic_proof():
    script = proof_spec(
        "u: UNITARY { P[ [H[q1]] P0(1) ] = 1 } H[q1] { P[ P0(1) ] = 1 }\n"
        "c: CONS from u { P[ [H[q1]] P0(1) ] = 1 } H[q1] { P[ P0(1) ] >= 0.5 }",
        sort="prob",
    )
    plus = PureState.make({"X": 0}, np.array([1, 1]) / np.sqrt(2))
    suite = [Distribution.point(plus)] + [Distribution.point(s) for s in states_x(range(2))]
    assert check_proof(script, suite).status == VALID


def test_probabilistic_proof_rejects_deterministic_assertions():
    with pytest.raises(ParseError):
        proof_spec("s: SKIP { X = 0 } skip { X = 0 }", sort="prob")
