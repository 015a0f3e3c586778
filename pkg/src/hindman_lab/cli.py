"""Command-line driver.

Every verb prints one JSON report ``{"status", "payload", "provenance"}`` on stdout
and exits with 0 (ok), 1 (not_found / budget_exceeded) or 2 (invalid_input).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .core import (
    ConstantColoring,
    DomainError,
    LengthPattern,
    ParityColoring,
    PopcountParityColoring,
    apart_ground,
    bit_profile,
)
from .lowerbound import (
    DecodingContext,
    InsufficientWitness,
    Schedule,
    VSGColoring,
    check_claims,
    check_sum_identity,
    classify_gaps,
    decode_detail,
    reproduce,
)
from .oracles import (
    STRATEGIES,
    BudgetExceeded,
    TableColoring,
    find_mono_config,
    is_avoiding,
    witness_number,
    witness_payload,
)
from .solver import MODES, Solution, SolveConfig, SolveFailure, solve, verify_solution

VERBS = ("profile", "witness", "find-config", "solve", "vsg", "claims", "decode")
EXIT_CODES = {"ok": 0, "not_found": 1, "budget_exceeded": 1, "invalid_input": 2}
DEFAULT_BUDGET = 5_000_000


class CommandError(Exception):
    """Input the driver refuses; the message names the offending token."""


@dataclass
class Command:
    verb: str
    options: dict = field(default_factory=dict)


@dataclass
class Report:
    status: str
    payload: dict
    provenance: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def dumps(self) -> str:
        return json.dumps({"status": self.status, "payload": self.payload,
                           "provenance": self.provenance}, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CommandError(message)


def _pattern(text: str) -> LengthPattern:
    try:
        return LengthPattern.parse(text)
    except DomainError:
        raise argparse.ArgumentTypeError(f"malformed pattern spec {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _natural(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file {text!r}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hindman-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)

    def common(p, budget=True):
        p.add_argument("--workers", type=_positive, default=None,
                       help="worker processes (default: $HINDMAN_LAB_WORKERS or 1)")
        if budget:
            p.add_argument("--budget-steps", type=_positive, default=DEFAULT_BUDGET)

    p = sub.add_parser("profile", help="binary profile of a positive integer")
    p.add_argument("n", type=_positive)

    p = sub.add_parser("witness", help="witness number for a pattern")
    p.add_argument("--pattern", type=_pattern, required=True)
    p.add_argument("--colors", type=_positive, default=2)
    p.add_argument("--max", dest="max_n", type=_positive, default=40)
    p.add_argument("--strategy", choices=STRATEGIES + ("both",), default="incremental_dfs")
    p.add_argument("--out", type=Path, help="write the certificate here")
    common(p)

    p = sub.add_parser("find-config", help="monochromatic configuration in a table coloring")
    p.add_argument("--pattern", type=_pattern, required=True)
    p.add_argument("--coloring", type=_existing, required=True, help="table coloring file")

    p = sub.add_parser("solve", help="apart H with FS^A(H) monochromatic")
    p.add_argument("--pattern", type=_pattern, required=True)
    p.add_argument("--coloring", default="vsg",
                   help="constant:<c> | parity | popcount-parity | vsg (needs --schedule)")
    p.add_argument("--schedule", type=_existing)
    p.add_argument("--mode", choices=MODES, default="direct")
    p.add_argument("--ground-size", type=_positive, default=16)
    p.add_argument("--ground-start", type=_natural, default=0)
    p.add_argument("--ground-stride", type=_positive, default=1)
    p.add_argument("--target", type=_positive, default=5)
    p.add_argument("--max", dest="max_n", type=_positive, default=40)
    p.add_argument("--horizon", type=_natural)
    p.add_argument("--tail", type=_natural, default=0)
    p.add_argument("--out", type=Path, help="write the solution JSON here")
    common(p)

    p = sub.add_parser("vsg", help="short and very short gaps of n")
    p.add_argument("--schedule", type=_existing, required=True)
    p.add_argument("n", type=_positive)

    p = sub.add_parser("claims", help="sum identity for a pair, or claim parities for a solution")
    p.add_argument("--schedule", type=_existing, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--solution", type=_existing)
    g.add_argument("--pair", type=_positive, nargs=2, metavar=("M", "N"))

    p = sub.add_parser("decode", help="decide membership in K from a solution")
    p.add_argument("--schedule", type=_existing, required=True)
    p.add_argument("--context", type=_existing,
                   help="decoding context JSON; without it a solution is computed first")
    p.add_argument("--below", type=_positive, default=16, help="query every x below this")
    p.add_argument("x", type=_natural, nargs="*")
    p.add_argument("--target", type=_positive, default=8)
    p.add_argument("--tail", type=_positive, default=3)
    common(p)
    return parser


def parse_command(argv: list[str]) -> Command:
    if not argv:
        raise CommandError("missing verb; expected one of " + ", ".join(VERBS))
    if argv[0] not in VERBS and not argv[0].startswith("-"):
        raise CommandError(f"unknown verb {argv[0]!r}")
    ns = build_parser().parse_args(argv)
    if ns.verb is None:
        raise CommandError("missing verb")
    options = {k: v for k, v in vars(ns).items() if k != "verb"}
    if "workers" in options and options["workers"] is None:
        env = os.environ.get("HINDMAN_LAB_WORKERS")
        try:
            options["workers"] = _positive(env) if env else 1
        except argparse.ArgumentTypeError:
            raise CommandError(f"HINDMAN_LAB_WORKERS: expected a positive integer, got {env!r}")
    return Command(ns.verb, options)


# ---------------------------------------------------------------------------
# execution

def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _provenance(cmd: Command) -> dict:
    inputs = {}
    budgets = {}
    for k, v in cmd.options.items():
        if isinstance(v, Path) and k != "out":
            inputs[k] = _digest(v)
        elif k in ("budget_steps", "max_n"):
            budgets[k] = v
    return {"version": __version__, "verb": cmd.verb, "inputs": inputs, "budgets": budgets}


def _coloring(opts: dict):
    spec = opts["coloring"]
    if spec == "parity":
        return ParityColoring()
    if spec == "popcount-parity":
        return PopcountParityColoring()
    if spec.startswith("constant:"):
        try:
            return ConstantColoring(int(spec.split(":", 1)[1]))
        except ValueError:
            raise CommandError(f"malformed coloring {spec!r}") from None
    if spec == "vsg":
        if opts.get("schedule") is None:
            raise CommandError("coloring 'vsg' needs --schedule")
        return VSGColoring(Schedule.from_text(opts["schedule"].read_text()))
    raise CommandError(f"unknown coloring {spec!r}")


def _witness(o: dict) -> tuple[str, dict]:
    strategies = STRATEGIES if o["strategy"] == "both" else (o["strategy"],)
    results = [witness_number(o["pattern"], o["colors"], o["max_n"], s, o["budget_steps"],
                              o["workers"]) for s in strategies]
    first = results[0]
    payload = {"pattern": first.pattern.spec(), "colors": first.r, "value": first.value,
               "exact": first.exact, "status": first.status,
               "certificate": first.certificate.to_text(),
               "certificate_verified": is_avoiding(first.certificate, first.pattern),
               "steps": {w.strategy: w.steps for w in results}}
    if len(results) > 1:
        payload["strategies_agree"] = all(
            (w.value, w.status, w.certificate) == (first.value, first.status, first.certificate)
            for w in results)
    if o.get("out"):
        o["out"].write_text(first.certificate.to_text() + "\n")
    ok = first.exact and payload["certificate_verified"] and payload.get("strategies_agree", True)
    return ("ok" if ok else "not_found"), payload


def _solve(o: dict) -> tuple[str, dict]:
    c = _coloring(o)
    ground = apart_ground(o["ground_size"], o["ground_start"], o["ground_stride"])
    cfg = SolveConfig(mode=o["mode"], ground=ground, target_size=o["target"],
                      budget=o["budget_steps"], max_n=o["max_n"], workers=o["workers"],
                      horizon=o["horizon"], tail=o["tail"])
    sol = solve(c, o["pattern"], cfg)
    if sol is None:
        return "not_found", {"solution": None}
    doc = sol.to_json(bool(verify_solution(c, sol)))
    if o.get("out"):
        o["out"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return "ok", {"solution": doc}


def _decode(o: dict) -> tuple[str, dict]:
    schedule = Schedule.from_text(o["schedule"].read_text())
    xs = o["x"] or list(range(o["below"]))
    payload: dict = {}
    if o.get("context"):
        ctx = DecodingContext.from_json(json.loads(o["context"].read_text()), schedule)
    else:
        rep = reproduce(schedule, x_bound=max(xs) + 1, target_size=o["target"], tail=o["tail"],
                        budget=o["budget_steps"], workers=o["workers"])
        payload["reproduction"] = rep.as_dict()
        sol = rep.final.solution
        if sol is None:
            status = "budget_exceeded" if rep.final.outcome == "budget_exceeded" else "not_found"
            return status, payload
        ctx = DecodingContext(sol.H, sol.params[0], sol.params[1], schedule)
    payload["context"] = ctx.to_json()
    answers = []
    for x in xs:
        d = decode_detail(ctx, x)
        answers.append({"x": x, "member": d.member, "m": str(d.m), "n": str(d.n),
                        "truth": x in schedule.K})
    payload["answers"] = answers
    payload["errors"] = sum(a["member"] != a["truth"] for a in answers)
    return ("ok" if payload["errors"] == 0 else "not_found"), payload


def execute(cmd: Command) -> Report:
    o = cmd.options
    prov = _provenance(cmd)
    try:
        if cmd.verb == "profile":
            status, payload = "ok", bit_profile(o["n"]).as_dict()
        elif cmd.verb == "witness":
            status, payload = _witness(o)
        elif cmd.verb == "find-config":
            table = TableColoring.from_text(o["coloring"].read_text())
            w = find_mono_config(table, o["pattern"])
            status = "ok" if w else "not_found"
            payload = {"pattern": o["pattern"].spec(), "witness": witness_payload(w, o["pattern"]),
                       "avoiding": w is None}
        elif cmd.verb == "solve":
            status, payload = _solve(o)
        elif cmd.verb == "vsg":
            schedule = Schedule.from_text(o["schedule"].read_text())
            status, payload = "ok", classify_gaps(o["n"], schedule).as_dict()
        elif cmd.verb == "claims":
            schedule = Schedule.from_text(o["schedule"].read_text())
            if o.get("pair"):
                m, n = o["pair"]
                payload = check_sum_identity(m, n, schedule).as_dict()
                status = "ok"
            else:
                sol = Solution.from_json(json.loads(o["solution"].read_text()))
                if sol.pattern.kind not in ("schur", "vdw", "brauer"):
                    raise CommandError("claims need a solution with parameters a, b")
                rep = check_claims(schedule, sol.H, *sol.params)
                payload = rep.as_dict()
                status = "ok" if rep.ok else "not_found"
        elif cmd.verb == "decode":
            status, payload = _decode(o)
        else:
            raise CommandError(f"unknown verb {cmd.verb!r}")
    except BudgetExceeded as exc:
        prov["budget_used"] = exc.steps
        return Report("budget_exceeded", {"error": str(exc), "stage": exc.stage}, prov)
    except SolveFailure as exc:
        return Report("not_found", {"error": str(exc)}, prov)
    except InsufficientWitness as exc:
        return Report("not_found", {"error": str(exc)}, prov)
    except (CommandError, DomainError, ValueError, KeyError) as exc:
        return Report("invalid_input", {"error": str(exc)}, prov)
    return Report(status, payload, prov)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_command(argv)
    except CommandError as exc:
        report = Report("invalid_input", {"error": str(exc)}, {"version": __version__})
    else:
        report = execute(cmd)
    print(report.dumps())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
