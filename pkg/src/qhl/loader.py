"""Turn parsed spec-file declarations into runtime objects: states, interpretations, suites."""

from __future__ import annotations

import numpy as np

from . import ast as A
from .checker import SuiteParams, sample_satisfying, sample_states
from .cqstate import Distribution, Interpretation, PureState
from .errors import SpecError
from .parser import SpecFile
from .semantics import exec_cmd


def declared_state(spec: SpecFile, name: str) -> PureState:
    try:
        decl = spec.states[name]
    except KeyError:
        raise SpecError(f"unknown state {name!r}") from None
    return PureState(decl.store, np.array(decl.amplitudes, dtype=complex))


def declared_mixture(spec: SpecFile, name: str) -> Distribution:
    try:
        parts = spec.mixed[name]
    except KeyError:
        raise SpecError(f"unknown mixed state {name!r}") from None
    return Distribution((declared_state(spec, s), w) for w, s in parts)


def lookup_state(spec: SpecFile, name: str):
    if name in spec.states:
        return declared_state(spec, name)
    if name in spec.mixed:
        return declared_mixture(spec, name)
    raise SpecError(f"unknown state {name!r}")


def default_state(spec: SpecFile) -> PureState:
    """All classical variables 0 and every qubit in |0>."""
    vec = np.zeros(2 ** max(spec.num_qubits, 1), dtype=complex)
    vec[0] = 1
    return PureState.make({v: 0 for v in spec.vars}, vec)


def interpretations(spec: SpecFile, triple: str | None = None) -> list:
    """Interpretations to check a triple under; one with only ranges by default."""
    names = spec.triple_interps.get(triple, ()) if triple else ()
    out = []
    for n in names:
        decl = spec.interps[n]
        out.append(Interpretation(dict(decl.logical), dict(decl.real), dict(spec.logvar_ranges)))
    return out or [Interpretation({}, {}, dict(spec.logvar_ranges))]


def suite_params(spec: SpecFile, count: int, seed: int, mixed: bool = False,
                 value_range: tuple = (-3, 3), structured: bool = False) -> SuiteParams:
    return SuiteParams(count, seed, max(spec.num_qubits, 1), tuple(spec.vars), value_range, mixed, structured)


def triple_suite(spec: SpecFile, t: A.Triple, count: int, seed: int, interp: Interpretation | None = None) -> list:
    """Declared states followed by ``count`` random states satisfying the precondition."""
    explicit = [declared_state(spec, n) for n in spec.states]
    if t.sort == "prob":
        explicit = [Distribution.point(s) for s in explicit] + [declared_mixture(spec, n) for n in spec.mixed]
    params = suite_params(spec, count, seed, mixed=t.sort == "prob", structured=True)
    return explicit + sample_satisfying(t.pre, params, interp)


def proof_suite(spec: SpecFile, script: A.ProofScript, count: int, seed: int,
                interp: Interpretation | None = None) -> list:
    """States used for side conditions.

    Declared states and unconstrained random ones, plus, when the script
    names a target triple, states satisfying its precondition and every
    state reached after each prefix of its program.
    """
    explicit = [declared_state(spec, n) for n in spec.states]
    params = suite_params(spec, count, seed, mixed=script.sort == "prob", structured=True)
    out = explicit + sample_states(params)
    if script.target is not None:
        t = spec.triples[script.target]
        starts = sample_satisfying(t.pre, params, interp)
        out += starts
        for start in starts:
            dist = Distribution.point(start) if isinstance(start, PureState) else start
            for cmd in A.flatten_seq(t.prog):
                dist = exec_cmd(cmd, dist).out
                if script.sort == "det":
                    out.extend(dist.supports())
                else:
                    out.append(dist)
    return out
