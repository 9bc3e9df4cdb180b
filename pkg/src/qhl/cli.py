"""Command-line front end.

Exit codes: 0 valid on suite (or success), 1 invalid, 2 parse error,
3 runtime error, 4 depth-bounded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import ast as A
from .assertions import SatConfig
from .checker import DEPTH_BOUNDED, INVALID, VALID, check_proof, check_semantic, check_wp, combine, describe_state
from .errors import ParseError, ProofError, QHLError, SpecError
from .loader import interpretations, lookup_state, default_state, proof_suite, triple_suite
from .parser import parse_assertion, parse_formula, parse_real, parse_spec
from .pretty import pretty
from .semantics import ExecConfig, exec_cmd
from .cqstate import Distribution, PureState
from .deep import deep_call
from .wpcalc import DepthConfig, Transformer, max_qubit

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_RUNTIME, EXIT_DEPTH = 0, 1, 2, 3, 4
STATUS_EXIT = {VALID: EXIT_OK, INVALID: EXIT_INVALID, DEPTH_BOUNDED: EXIT_DEPTH}


def _color(text: str, code: str) -> str:
    if os.environ.get("QHL_COLOR", "").lower() in ("1", "true", "yes", "always"):
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _status_text(status: str) -> str:
    return _color(status, {VALID: "32", INVALID: "31", DEPTH_BOUNDED: "33"}.get(status, "0"))


def _ket(vector) -> str:
    m = int(len(vector)).bit_length() - 1
    parts = []
    for k, z in enumerate(vector):
        if abs(z) > 1e-12:
            re, im = round(z.real, 9) + 0.0, round(z.imag, 9) + 0.0
            coef = f"{re:g}" if im == 0 else f"({re:g}{im:+g}i)"
            parts.append(f"{coef}|{k:0{m}b}>")
    return " + ".join(parts)


def _short(node, limit: int) -> str:
    size = A.tree_size(node)
    if size > limit:
        return f"<term with {size} nodes; raise --max-print-size to print it>"
    return pretty(node)


class App:
    def __init__(self, args):
        self.args = args
        self.exec_cfg = ExecConfig(max_while_iters=args.max_while_iters)
        self.sat_cfg = SatConfig(atol=args.atol)
        self.depth = DepthConfig(args.depth_k, args.depth_n, args.measure_form, args.while_form)
        with open(args.spec, encoding="utf-8") as fh:
            self.spec = parse_spec(fh.read())

    def emit(self, payload: dict, text: str) -> None:
        if self.args.format == "json":
            payload = dict(payload, schema_version=SCHEMA_VERSION, command=self.args.command)
            print(json.dumps(payload, sort_keys=True, indent=2))
        else:
            print(text)

    def _get(self, table: dict, name: str, what: str):
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise SpecError(f"unknown {what} {name!r} (known: {known})")
        return table[name]

    # -- subcommands -------------------------------------------------------

    def run(self) -> int:
        prog = self._get(self.spec.programs, self.args.program, "program")
        start = lookup_state(self.spec, self.args.state) if self.args.state else default_state(self.spec)
        dist = Distribution.point(start) if isinstance(start, PureState) else start
        res = exec_cmd(prog, dist, self.exec_cfg)
        truncated = res.residual_mass > 1e-9
        lines = [f"program {self.args.program}: {len(res.out)} support(s), total mass {res.out.mass():.12g}"]
        for s, m in res.out.items():
            store = ", ".join(f"{k}={v}" for k, v in s.store)
            lines.append(f"  {m:.12g}  {{{store}}}  {_ket(s.vector)}")
        lines.append(f"residual mass {res.residual_mass:.12g}, while iterations {res.iterations_used}")
        if truncated:
            lines.append(_color("depth-bounded: loop cut off before its guard mass vanished", "33"))
        payload = {
            "program": self.args.program,
            "output": describe_state(res.out),
            "mass": round(res.out.mass(), 12),
            "residual_mass": round(res.residual_mass, 12),
            "iterations": res.iterations_used,
            "labels": ["depth-bounded"] if truncated else [],
        }
        self.emit(payload, "\n".join(lines))
        return EXIT_OK

    def check(self) -> int:
        t = self._get(self.spec.triples, self.args.triple, "triple")
        verdicts = []
        for interp in interpretations(self.spec, self.args.triple):
            suite = triple_suite(self.spec, t, self.args.suite_size, self.args.seed, interp)
            if self.args.method in ("semantic", "both"):
                verdicts.append(check_semantic(t, suite, interp, self.exec_cfg, self.sat_cfg))
            if self.args.method in ("wp", "both"):
                verdicts.append(check_wp(t, suite, self.depth, interp, self.exec_cfg, self.sat_cfg,
                                         self.spec.num_qubits or None))
        final = combine(verdicts, self.args.method)
        lines = [f"triple {self.args.triple} [{t.sort}]: {_status_text(final.status)}"]
        for v in verdicts:
            checked = sum(1 for e in v.log if e.get("pre"))
            lines.append(f"  {v.method}: {v.status} ({checked} of {len(v.log)} suite states satisfy the precondition)")
        if final.labels:
            lines.append("  labels: " + ", ".join(sorted(final.labels)))
        if final.disagreements:
            lines.append(f"  wp/semantic disagreements: {final.disagreements}")
        if final.counterexample:
            lines.append("  counterexample: " + json.dumps(final.counterexample, sort_keys=True))
        payload = {"triple": self.args.triple, "sort": t.sort, "verdict": final.to_dict(),
                   "checks": [v.to_dict() for v in verdicts]}
        self.emit(payload, "\n".join(lines))
        return STATUS_EXIT[final.status]

    def _transform(self, kind: str) -> int:
        prog = self._get(self.spec.programs, self.args.program, "program")
        text = self.args.expr
        if kind == "wp":
            try:
                target = parse_assertion(text, self.spec)
            except ParseError:
                target = parse_formula(text, self.spec)
        else:
            target = parse_real(text, self.spec)
        m = self.spec.num_qubits or max(max_qubit(prog), max_qubit(target))
        tr = Transformer(self.depth, m)
        if kind == "pt":
            out = tr.pt(prog, target)
        elif isinstance(target, (A.PRel, A.PNot, A.PAnd)):
            out = tr.wp_prob(prog, target)
        else:
            out = tr.wp(prog, target)
        shown = _short(out, self.args.max_print_size)
        labels = ["depth-bounded"] if tr.bounded else []
        self.emit({"program": self.args.program, "input": pretty(target), "result": shown, "labels": labels}, shown)
        return EXIT_OK

    def wp(self) -> int:
        return self._transform("wp")

    def pt(self) -> int:
        return self._transform("pt")

    def prove_check(self) -> int:
        script = self._get(self.spec.proofs, self.args.proof, "proof")
        target = self.spec.triples[script.target] if script.target else None
        interp = interpretations(self.spec, script.target)[0]
        suite = proof_suite(self.spec, script, self.args.suite_size, self.args.seed, interp)
        try:
            verdict = check_proof(script, suite, interp, self.depth, self.exec_cfg, self.sat_cfg,
                                  self.spec.num_qubits or None, target)
        except ProofError as exc:
            payload = {"proof": self.args.proof, "verdict": {"status": INVALID, "error": "rule-mismatch",
                                                            "step": exc.step, "expected": exc.expected,
                                                            "given": exc.given, "message": str(exc)}}
            self.emit(payload, f"proof {self.args.proof}: {_status_text(INVALID)}\n  rule mismatch at {exc}")
            return EXIT_INVALID
        lines = [f"proof {self.args.proof} ({len(script.steps)} steps): {_status_text(verdict.status)}"]
        if verdict.labels:
            lines.append("  labels: " + ", ".join(sorted(verdict.labels)))
        if verdict.counterexample:
            lines.append("  counterexample: " + json.dumps(verdict.counterexample, sort_keys=True))
        self.emit({"proof": self.args.proof, "verdict": verdict.to_dict()}, "\n".join(lines))
        return STATUS_EXIT[verdict.status]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random state suites")
    common.add_argument("--suite-size", type=int, default=50, help="number of random suite states")
    common.add_argument("--depth-k", type=int, default=64, help="approximants kept for loop wp")
    common.add_argument("--depth-n", type=int, default=64, help="terms kept for loop preterms")
    common.add_argument("--atol", type=float, default=1e-9, help="tolerance for equalities and P_j^i atoms")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-while-iters", type=int, default=10_000)
    common.add_argument("--measure-form", choices=("conditional", "product"), default="conditional",
                        help="measurement preterm clause")
    common.add_argument("--while-form", choices=("unrolled", "series"), default="unrolled",
                        help="loop preterm clause")
    common.add_argument("--max-print-size", type=int, default=200_000,
                        help="largest transformer output (in tree nodes) printed in full")

    p = argparse.ArgumentParser(prog="qhl", description="Check quantum-classical programs against Hoare triples.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="execute a program")
    run.add_argument("spec")
    run.add_argument("program")
    run.add_argument("--state", help="declared initial state (default: all zeros)")
    chk = sub.add_parser("check", parents=[common], help="check a triple on a state suite")
    chk.add_argument("spec")
    chk.add_argument("triple")
    chk.add_argument("--method", choices=("both", "semantic", "wp"), default="both")
    for name, what in (("wp", "assertion or formula"), ("pt", "real expression")):
        q = sub.add_parser(name, parents=[common], help=f"print the transformed {what}")
        q.add_argument("spec")
        q.add_argument("program")
        q.add_argument("expr", help=what)
    pc = sub.add_parser("prove-check", parents=[common], help="check a proof script")
    pc.add_argument("spec")
    pc.add_argument("proof")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        app = App(args)
        return deep_call(getattr(app, args.command.replace("-", "_")))
    except ParseError as exc:
        print(f"{args.spec}:{exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except RecursionError:
        print("error: term nesting too deep; lower --depth-k/--depth-n", file=sys.stderr)
        return EXIT_RUNTIME
    except (QHLError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
