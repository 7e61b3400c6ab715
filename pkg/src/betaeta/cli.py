"""Command-line interface.

Exit codes: 0 equivalent (or success), 1 inequivalent (or divergence found),
2 input error, 3 internal fault.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import __version__
from .canonicity import serialize_witness
from .driver import CorpusSpec, decide_equiv, differential_run
from .focusing import focus, print_focused
from .kernel import (
    Judgment,
    KernelError,
    beta_normalize,
    elaborate_normal,
    parse_judgment,
    print_term,
    print_type,
    typecheck,
)
from .saturation import saturate_terms
from .semantics import (
    InternalFault,
    distinguishing_model,
    eval_term,
    fin,
    print_model,
    print_value,
    valuations,
    apply_model,
)

EXIT_OK, EXIT_INEQUIVALENT, EXIT_INPUT, EXIT_FAULT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(args) -> Judgment:
    if args.judgment is not None:
        text = args.judgment
    elif args.file == "-":
        text = sys.stdin.read()
    elif args.file is None:
        raise UsageError("expected a judgment file or --judgment TEXT")
    else:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    return parse_judgment(text)


def _pair(j: Judgment):
    if len(j.terms) != 2:
        raise UsageError("this command needs a judgment with two term entries")
    return j.terms[0][1], j.terms[1][1]


def _emit(out, args, key: str, value: str) -> None:
    if args.format == "machine":
        out.write(f"{key}: {value}\n")
    else:
        out.write(f"{value}\n")


def cmd_check(args, out) -> int:
    j = _load(args)
    for name, e in j.terms:
        typecheck(j.context, e, j.goal)
        _emit(out, args, name, f"{name} : {print_type(j.goal)}")
    return EXIT_OK


def cmd_normalize(args, out) -> int:
    j = _load(args)
    for name, e in j.terms:
        nf = beta_normalize(j.context, elaborate_normal(j.context, e, j.goal))
        _emit(out, args, name, f"{name} = {print_term(nf)}")
    return EXIT_OK


def cmd_eval(args, out) -> int:
    j = _load(args)
    model = {a: fin(args.model_size) for a in j.atoms}
    closed = [(x, apply_model(model, t)) for x, t in j.context]
    if model:
        _emit(out, args, "model", print_model(model))
    for g in valuations(closed):
        env = ", ".join(f"{x} = {print_value(v)}" for x, v in g.items())
        for name, e in j.terms:
            v = eval_term(j.context, e, g, j.goal, model)
            line = f"{name}[{env}] = {print_value(v)}" if env else f"{name} = {print_value(v)}"
            _emit(out, args, "value", line)
    return EXIT_OK


def cmd_focus(args, out) -> int:
    j = _load(args)
    for name, e in j.terms:
        _emit(out, args, name, f"{name} = {print_focused(focus(j.context, e, j.goal))}")
    return EXIT_OK


def cmd_saturate(args, out) -> int:
    j = _load(args)
    r = saturate_terms(j.context, j.goal, [e for _, e in j.terms], trace=args.trace_saturation)
    for (name, _), t in zip(j.terms, r.terms):
        _emit(out, args, name, f"{name} = {print_focused(t)}")
    if args.trace_saturation:
        for line in r.trace:
            _emit(out, args, "trace", line)
    return EXIT_OK


def cmd_equiv(args, out) -> int:
    j = _load(args)
    a, b = _pair(j)
    v = decide_equiv(j.context, a, b, j.goal, trace_saturation=args.trace_saturation)
    _emit(out, args, "verdict", v.label)
    if args.trace_saturation:
        for line in v.trace["saturated"]:
            _emit(out, args, "saturated", line)
        for line in v.trace["log"]:
            _emit(out, args, "trace", line)
    if v.witness is not None:
        out.write(serialize_witness(v.witness) + "\n")
        return EXIT_INEQUIVALENT
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    j = _load(args)
    a, b = _pair(j)
    m = distinguishing_model(j.context, a, b, range(args.max_model_size + 1), j.goal)
    if m is None:
        _emit(out, args, "verdict", "EQUIVALENT")
        return EXIT_OK
    _emit(out, args, "verdict", "INEQUIVALENT")
    _emit(out, args, "model", print_model(m) or "(no atoms)")
    return EXIT_INEQUIVALENT


def cmd_difftest(args, out) -> int:
    spec = CorpusSpec(
        judgments=args.judgments,
        terms_per_judgment=args.terms,
        seed=args.seed,
        oracle_size=args.max_model_size,
        max_term_size=args.max_term_size,
    )
    report = differential_run(spec, workers=args.workers)
    for line in report.lines():
        out.write(line + "\n")
    if any(r.status == "error" for r in report.results):
        return EXIT_FAULT
    return EXIT_INEQUIVALENT if report.divergences else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betaeta", description="Decide beta-eta equivalence with sums and empty types.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--max-model-size", type=int, default=3, help="largest atom cardinality tried by the oracle")
    common.add_argument("--trace-saturation", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "check": (cmd_check, "typecheck the terms of a judgment"),
        "normalize": (cmd_normalize, "print beta-normal forms"),
        "eval": (cmd_eval, "evaluate the terms under every valuation of a finite model"),
        "focus": (cmd_focus, "print focused forms"),
        "saturate": (cmd_saturate, "print jointly saturated forms"),
        "equiv": (cmd_equiv, "decide equivalence, printing a witness when inequivalent"),
        "oracle": (cmd_oracle, "semantic equivalence over small finite models"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("file", nargs="?", help="judgment file, or - for standard input")
        p.add_argument("--judgment", help="judgment text given inline")
        if name == "eval":
            p.add_argument("--model-size", type=int, default=2, help="cardinality of every atom")
        p.set_defaults(func=fn)
    p = sub.add_parser("difftest", parents=[common], help="compare the decision procedure with the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--judgments", type=int, default=60)
    p.add_argument("--terms", type=int, default=8, help="terms sampled per judgment")
    p.add_argument("--max-term-size", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_difftest)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args, out)
    except (KernelError, UsageError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except InternalFault as exc:
        err.write(f"internal fault: {exc}\n")
        return EXIT_FAULT
    except RecursionError as exc:
        err.write(f"internal fault: {exc}\n")
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
