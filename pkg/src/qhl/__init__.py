"""Satisfaction-based Hoare logic for quantum-classical programs.

Submodules: ``ast`` and ``parser``/``pretty`` for syntax, ``cqstate`` for
states, ``semantics`` for execution, ``assertions`` for satisfaction,
``wpcalc`` for predicate transformers, ``checker`` for verdicts and proofs,
``cli`` for the command line.
"""

from .assertions import SatConfig, eval_real, sat_mixed, sat_prob, sat_pure
from .checker import SuiteParams, Verdict, check_proof, check_semantic, check_wp, sample_states
from .cqstate import Distribution, Interpretation, PureState, canonicalize, point_dist
from .parser import parse_assertion, parse_command, parse_formula, parse_real, parse_spec
from .pretty import pretty
from .semantics import ExecConfig, ExecResult, exec_cmd, exec_pure
from .subst import subst_prog_var
from .wpcalc import DepthConfig, cond_term, preterm, wp_det, wp_prob

__all__ = [
    "Distribution", "DepthConfig", "ExecConfig", "ExecResult", "Interpretation", "PureState",
    "SatConfig", "SuiteParams", "Verdict", "canonicalize", "check_proof", "check_semantic",
    "check_wp", "cond_term", "eval_real", "exec_cmd", "exec_pure", "parse_assertion",
    "parse_command", "parse_formula", "parse_real", "parse_spec", "point_dist", "preterm",
    "pretty", "sample_states", "sat_mixed", "sat_prob", "sat_pure", "subst_prog_var", "wp_det",
    "wp_prob",
]
