"""Pure and probabilistic cq-states plus the state-vector linear algebra.

Qubits are numbered from 1 and qubit 1 is the most significant bit of the
basis index, so ``|q1 q2 ... qm>`` is basis vector ``int("q1q2...qm", 2)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .ast import DenseProjector, Gate, MaskProjector, Projector
from .errors import EvaluationError

NORM_TOL = 1e-9
PHASE_TOL = 1e-9
KEY_DIGITS = 12
PRUNE_EPS = 1e-12
PROJECTOR_TOL = 1e-9


def _key_vector(vec: np.ndarray) -> tuple:
    r = np.round(vec.real, KEY_DIGITS) + 0.0
    i = np.round(vec.imag, KEY_DIGITS) + 0.0
    return (r.tobytes(), i.tobytes())


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm < PHASE_TOL:
        raise EvaluationError("cannot canonicalize the zero vector")
    nz = np.flatnonzero(np.abs(vec) > PHASE_TOL)
    lead = vec[nz[0]]
    out = vec * (np.conj(lead) / abs(lead))
    if abs(norm - 1.0) > 1e-15:
        out = out / norm
    # an exactly real lead makes a second pass the identity
    out[nz[0]] = abs(out[nz[0]])
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """A classical store paired with a unit amplitude vector.

    Equality and hashing identify states that differ only by a global phase.
    """

    store: tuple
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex).ravel()
        if vec.size == 0 or vec.size & (vec.size - 1):
            raise EvaluationError(f"state vector length {vec.size} is not a power of two")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            raise EvaluationError(f"state vector has norm {norm:.12g}, expected 1")
        vec = vec.copy()
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "store", tuple(sorted(tuple(self.store))))

    @classmethod
    def make(cls, store: Mapping[str, int] | Iterable, vector) -> "PureState":
        items = store.items() if isinstance(store, Mapping) else store
        return cls(tuple((str(k), int(v)) for k, v in items), np.asarray(vector, dtype=complex))

    @property
    def num_qubits(self) -> int:
        return int(self.vector.size).bit_length() - 1

    @functools.cached_property
    def env(self) -> dict:
        return dict(self.store)

    @functools.cached_property
    def key(self) -> tuple:
        return (self.store, _key_vector(_fix_phase(self.vector)))

    def __eq__(self, other):
        return isinstance(other, PureState) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def with_store(self, **updates) -> "PureState":
        env = dict(self.store)
        env.update(updates)
        return PureState.make(env, self.vector)

    def with_vector(self, vector) -> "PureState":
        return PureState(self.store, vector)

    def __repr__(self):
        return f"PureState({self.env}, {np.round(self.vector, 6).tolist()})"


def canonicalize(state: PureState) -> PureState:
    """Fix the global phase: the first non-negligible amplitude becomes real positive."""
    return PureState(state.store, _fix_phase(state.vector))


def basis_state(num_qubits: int, bits: str | int = 0) -> np.ndarray:
    idx = int(bits, 2) if isinstance(bits, str) else int(bits)
    vec = np.zeros(2 ** num_qubits, dtype=complex)
    vec[idx] = 1.0
    return vec


class Distribution:
    """Finite-support subdistribution over canonicalized pure states."""

    __slots__ = ("_entries",)

    def __init__(self, pairs: Iterable = ()):
        entries: dict = {}
        for state, mass in pairs:
            _accumulate(entries, state, float(mass))
        self._entries = {k: v for k, v in entries.items() if v[1] >= PRUNE_EPS}

    @classmethod
    def point(cls, state: PureState) -> "Distribution":
        return cls([(state, 1.0)])

    @classmethod
    def empty(cls) -> "Distribution":
        return cls()

    def __iter__(self):
        return iter(self._entries.values())

    def items(self) -> list:
        """Entries as (state, mass) pairs in a deterministic order."""
        return [self._entries[k] for k in sorted(self._entries)]

    def __len__(self):
        return len(self._entries)

    def __contains__(self, state: PureState) -> bool:
        return state.key in self._entries

    def __getitem__(self, state: PureState) -> float:
        hit = self._entries.get(state.key)
        return hit[1] if hit else 0.0

    def mass(self) -> float:
        return float(sum(m for _, m in self._entries.values()))

    def supports(self) -> list:
        return [s for s, _ in self.items()]

    def scaled(self, factor: float) -> "Distribution":
        return Distribution((s, m * factor) for s, m in self._entries.values())

    def __add__(self, other: "Distribution") -> "Distribution":
        return Distribution(list(self._entries.values()) + list(other._entries.values()))

    def filter(self, keep: Callable[[PureState], bool]) -> "Distribution":
        return Distribution((s, m) for s, m in self._entries.values() if keep(s))

    def map(self, fn: Callable[[PureState], "Distribution"]) -> "Distribution":
        """Push every support through ``fn`` and mix the results by mass."""
        pairs = []
        for s, m in self._entries.values():
            for s2, m2 in fn(s)._entries.values():
                pairs.append((s2, m * m2))
        return Distribution(pairs)

    def __repr__(self):
        body = ", ".join(f"{s!r}: {m:.6g}" for s, m in self.items())
        return f"Distribution({{{body}}})"


def _accumulate(entries: dict, state: PureState, mass: float) -> None:
    if mass < 0:
        raise EvaluationError(f"negative probability mass {mass}")
    if mass == 0.0:
        return
    state = canonicalize(state)
    hit = entries.get(state.key)
    entries[state.key] = (hit[0] if hit else state, (hit[1] if hit else 0.0) + mass)


def point_dist(state: PureState) -> Distribution:
    return Distribution.point(state)


def mix(weighted: Iterable) -> Distribution:
    """Sum of ``weight * dist`` over (weight, Distribution) pairs."""
    pairs = []
    for w, d in weighted:
        pairs.extend((s, w * m) for s, m in d)
    return Distribution(pairs)


def distributions_close(a: Distribution, b: Distribution, atol: float = 1e-9) -> bool:
    """Pointwise comparison of two distributions up to ``atol``.

    Supports are matched by classical store and state fidelity rather than by
    exact key, so rounding boundaries in the hash key cannot cause a mismatch.
    """
    left = [(s, m) for s, m in a.items() if m > atol]
    right = [(s, m) for s, m in b.items() if m > atol]
    used = [False] * len(right)
    for s, m in left:
        total = 0.0
        for idx, (t, n) in enumerate(right):
            if not used[idx] and t.store == s.store and abs(np.vdot(s.vector, t.vector)) >= 1 - 1e-9:
                used[idx] = True
                total += n
        if abs(total - m) > atol:
            return False
    return all(used)


# ---------------------------------------------------------------------------
# Linear algebra on amplitude vectors


def num_qubits_of(vec: np.ndarray) -> int:
    return int(vec.size).bit_length() - 1


def apply_matrix(vec: np.ndarray, matrix: np.ndarray, qubits) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the listed qubits without building the full operator.

    The first listed qubit is the most significant bit of the gate's own index.
    """
    m = num_qubits_of(vec)
    qubits = [int(q) for q in qubits]
    k = len(qubits)
    if matrix.shape != (2 ** k, 2 ** k):
        raise EvaluationError(f"matrix of shape {matrix.shape} does not act on {k} qubits")
    if len(set(qubits)) != k or any(q < 1 or q > m for q in qubits):
        raise EvaluationError(f"invalid qubit list {qubits} for {m} qubits")
    axes = [q - 1 for q in qubits]
    tensor = vec.reshape((2,) * m)
    tensor = np.moveaxis(tensor, axes, range(k))
    shape = tensor.shape
    tensor = (matrix @ tensor.reshape(2 ** k, -1)).reshape(shape)
    return np.moveaxis(tensor, range(k), axes).reshape(-1)


def apply_gate(vec: np.ndarray, gate: Gate, qubits) -> np.ndarray:
    if len(qubits) != gate.arity:
        raise EvaluationError(f"gate {gate.name} expects {gate.arity} qubits, got {len(qubits)}")
    return apply_matrix(vec, gate.matrix, qubits)


@functools.lru_cache(maxsize=64)
def _bit_table(m: int) -> np.ndarray:
    idx = np.arange(2 ** m)
    shifts = np.arange(m - 1, -1, -1)
    return (idx[:, None] >> shifts) & 1


def qubit_mask(m: int, qubit: int, bit: int) -> np.ndarray:
    """Boolean vector selecting basis states whose ``qubit`` equals ``bit``."""
    if qubit < 1 or qubit > m:
        raise EvaluationError(f"qubit {qubit} out of range 1..{m}")
    return _bit_table(m)[:, qubit - 1] == bit


def project(vec: np.ndarray, qubit: int, bit: int) -> tuple:
    """Unnormalized projection of ``qubit`` onto ``|bit>`` and its probability."""
    mask = qubit_mask(num_qubits_of(vec), qubit, bit)
    out = np.where(mask, vec, 0)
    return float(np.sum(np.abs(out) ** 2)), out


def measure_qubit(vec: np.ndarray, qubit: int) -> tuple:
    """Born-rule split of ``vec`` on ``qubit``.

    Returns ``((p0, v0), (p1, v1))`` with normalized post-measurement vectors;
    a branch whose probability is at most 1e-12 has ``None`` as its vector.
    """
    branches = []
    for bit in (0, 1):
        p, out = project(vec, qubit, bit)
        branches.append((p, out / np.sqrt(p) if p > PRUNE_EPS else None))
    return tuple(branches)


def reduced_proj_prob(vec: np.ndarray, qubit: int, bit: int) -> float:
    """Tr(P^bit Tr_{-qubit}(|v><v|)), the weight of ``|bit>`` on ``qubit``."""
    return project(vec, qubit, bit)[0]


@functools.lru_cache(maxsize=1024)
def mask_diagonal(patterns: tuple, m: int) -> np.ndarray:
    table = _bit_table(m)
    keep = np.zeros(2 ** m, dtype=bool)
    for pat in patterns:
        if len(pat) != m:
            raise EvaluationError(f"mask pattern {pat!r} has length {len(pat)}, expected {m}")
        hit = np.ones(2 ** m, dtype=bool)
        for col, ch in enumerate(pat):
            if ch == "*":
                continue
            hit &= table[:, col] == int(ch)
        keep |= hit
    keep.flags.writeable = False
    return keep


def projector_matrix(q: Projector, m: int) -> np.ndarray:
    if isinstance(q, MaskProjector):
        return np.diag(mask_diagonal(q.patterns, m).astype(complex))
    if q.dim != 2 ** m:
        raise EvaluationError(f"projector {q.name} has dimension {q.dim}, state space is {2 ** m}")
    return q.matrix


def expect_projector(vec: np.ndarray, q: Projector) -> float:
    """<v|Q|v>, clamped into [0, 1]."""
    m = num_qubits_of(vec)
    if isinstance(q, MaskProjector):
        val = float(np.sum(np.abs(vec[mask_diagonal(q.patterns, m)]) ** 2))
    else:
        if q.dim != vec.size:
            raise EvaluationError(f"projector {q.name} has dimension {q.dim}, state has {vec.size}")
        val = float(np.real(np.vdot(vec, q.matrix @ vec)))
    return min(1.0, max(0.0, val))


def check_projector(matrix: np.ndarray, name: str = "projector") -> None:
    herm = np.abs(matrix - matrix.conj().T).max()
    idem = np.abs(matrix @ matrix - matrix).max()
    if herm >= PROJECTOR_TOL or idem >= PROJECTOR_TOL:
        raise EvaluationError(
            f"{name}: not a projector (hermitian dev {herm:.3g}, idempotent dev {idem:.3g})"
        )


def single_qubit_mask(m: int, qubit: int, bit: int, name: str | None = None) -> MaskProjector:
    pat = ["*"] * m
    pat[qubit - 1] = str(bit)
    return MaskProjector(("".join(pat),), name)


# ---------------------------------------------------------------------------
# Restriction


def restrict(dist: Distribution, keep: Callable[[PureState], bool]) -> Distribution:
    """Keep supports for which ``keep`` holds, with unchanged mass."""
    return dist.filter(keep)


@dataclass
class Interpretation:
    """Values for logical and real variables plus finite quantifier ranges."""

    logical: dict = field(default_factory=dict)
    real: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)

    def bind(self, var: str, value: int) -> "Interpretation":
        logical = dict(self.logical)
        logical[var] = value
        return Interpretation(logical, self.real, self.ranges)

    def describe(self) -> dict:
        out = dict(self.logical)
        out.update({f"${k}": v for k, v in self.real.items()})
        return out
