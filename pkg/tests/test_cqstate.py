import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhl import ast as A
from qhl.cqstate import (
    Distribution, PureState, apply_gate, basis_state, canonicalize, check_projector, distributions_close,
    expect_projector, measure_qubit, mix, project, projector_matrix, qubit_mask, restrict,
)
from qhl.errors import EvaluationError
from qhl.gates import BUILTIN_GATES, oracle_gate
from qhl.generators import GenConfig, StateGen

H, X, CX = BUILTIN_GATES["H"], BUILTIN_GATES["X"], BUILTIN_GATES["CX"]
seeds = st.integers(0, 2 ** 32 - 1)


def state(bits: str, **store) -> PureState:
    return PureState.make(store, basis_state(len(bits), bits))


def full_operator(gate, qubits, m):
    """Brute-force Kronecker embedding, used as an oracle for index striding."""
    cols = []
    for k in range(2 ** m):
        bits = [(k >> (m - 1 - i)) & 1 for i in range(m)]
        sub = int("".join(str(bits[q - 1]) for q in qubits), 2)
        col = np.zeros(2 ** m, dtype=complex)
        for out_sub in range(2 ** len(qubits)):
            amp = gate.matrix[out_sub, sub]
            if amp == 0:
                continue
            nb = list(bits)
            for i, q in enumerate(qubits):
                nb[q - 1] = (out_sub >> (len(qubits) - 1 - i)) & 1
            col[int("".join(map(str, nb)), 2)] += amp
        cols.append(col)
    return np.stack(cols, axis=1)


def test_qubit_one_is_most_significant():
    vec = apply_gate(basis_state(2, "00"), X, (1,))
    assert np.allclose(vec, basis_state(2, "10"))


def test_cx_control_is_first_listed_qubit():
    assert np.allclose(apply_gate(basis_state(2, "10"), CX, (1, 2)), basis_state(2, "11"))
    assert np.allclose(apply_gate(basis_state(2, "01"), CX, (2, 1)), basis_state(2, "11"))
    assert np.allclose(apply_gate(basis_state(2, "01"), CX, (1, 2)), basis_state(2, "01"))


def test_global_phase_is_ignored_by_equality():
    v = np.array([1, 1j]) / np.sqrt(2)
    a = PureState.make({"X": 1}, v)
    b = PureState.make({"X": 1}, np.exp(0.7j) * v)
    assert a == b and hash(a) == hash(b)
    assert a != PureState.make({"X": 2}, v)


def test_canonical_first_amplitude_real_positive():
    s = canonicalize(PureState.make({}, np.array([0, -1j, 0, 0])))
    assert s.vector[1] == pytest.approx(1.0)


def test_norm_is_validated():
    with pytest.raises(EvaluationError):
        PureState.make({}, np.array([1.0, 1.0]))
    with pytest.raises(EvaluationError):
        PureState.make({}, np.array([1.0, 0.0, 0.0]))


def test_measurement_of_plus_state():
    (p0, v0), (p1, v1) = measure_qubit(np.array([1, 1]) / np.sqrt(2), 1)
    assert p0 == pytest.approx(0.5) and p1 == pytest.approx(0.5)
    assert np.allclose(v0, [1, 0]) and np.allclose(v1, [0, 1])


def test_measurement_drops_impossible_branch():
    (p0, v0), (p1, v1) = measure_qubit(basis_state(1, "1"), 1)
    assert p0 == 0 and v0 is None and p1 == 1


def test_distribution_merges_equal_states_and_prunes():
    s = state("0", X=0)
    d = Distribution([(s, 0.25), (s.with_vector(-s.vector), 0.25), (state("1", X=0), 1e-15)])
    assert len(d) == 1 and d[s] == pytest.approx(0.5)


def test_mix_and_restrict():
    a, b = state("0", X=0), state("1", X=1)
    d = mix([(0.5, Distribution.point(a)), (0.5, Distribution.point(b))])
    kept = restrict(d, lambda s: s.env["X"] == 1)
    assert kept.mass() == pytest.approx(0.5) and kept.supports() == [b]


def test_mask_projector_matches_patterns():
    q = A.MaskProjector(("1*",))
    assert np.allclose(np.diag(projector_matrix(q, 2)), [0, 0, 1, 1])
    assert expect_projector(np.array([0.6, 0, 0.8, 0]), q) == pytest.approx(0.64)


def test_projector_validation_rejects_non_idempotent():
    with pytest.raises(EvaluationError):
        check_projector(np.diag([0.5, 1.0]))


def test_oracle_gate_is_permutation():
    uf = oracle_gate("Uf", {"0": 1, "1": 0})
    assert np.allclose(apply_gate(basis_state(2, "01"), uf, (1, 2)), basis_state(2, "00"))
    assert np.allclose(apply_gate(basis_state(2, "11"), uf, (1, 2)), basis_state(2, "11"))


def test_distributions_close_matches_by_fidelity():
    a = state("0", X=0)
    d1 = Distribution.point(a)
    d2 = Distribution.point(a.with_vector(np.exp(0.3j) * a.vector))
    assert distributions_close(d1, d2)
    assert not distributions_close(d1, d1.scaled(0.5))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_gate_striding_matches_kronecker_oracle(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    names = [n for n, g in BUILTIN_GATES.items() if g.arity <= m]
    gate = BUILTIN_GATES[names[int(rng.integers(len(names)))]]
    qubits = tuple(int(q) + 1 for q in rng.permutation(m)[: gate.arity])
    vec = StateGen(rng, GenConfig(num_qubits=m)).vector()
    assert np.allclose(apply_gate(vec, gate, qubits), full_operator(gate, qubits, m) @ vec, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_canonicalize_is_idempotent_and_phase_invariant(seed):
    rng = np.random.default_rng(seed)
    s = StateGen(rng, GenConfig(num_qubits=int(rng.integers(1, 4)))).pure()
    c = canonicalize(s)
    assert canonicalize(c).key == c.key
    rotated = s.with_vector(np.exp(1j * rng.uniform(0, 2 * np.pi)) * s.vector)
    # rounded keys can split at a rounding boundary, so compare the vectors
    assert canonicalize(rotated).store == c.store
    assert np.allclose(canonicalize(rotated).vector, c.vector, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_measurement_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    vec = StateGen(rng, GenConfig(num_qubits=m)).vector()
    q = int(rng.integers(1, m + 1))
    (p0, _), (p1, _) = measure_qubit(vec, q)
    assert p0 + p1 == pytest.approx(1.0, abs=1e-12)
    assert project(vec, q, 0)[0] == pytest.approx(np.sum(np.abs(vec[qubit_mask(m, q, 0)]) ** 2))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_restriction_splits_mass(seed):
    rng = np.random.default_rng(seed)
    d = StateGen(rng, GenConfig(num_qubits=1, vars=("X",))).mixed(sub=True)
    yes = restrict(d, lambda s: s.env["X"] > 0)
    no = restrict(d, lambda s: not s.env["X"] > 0)
    assert yes.mass() + no.mass() == pytest.approx(d.mass(), abs=1e-12)
