from __future__ import annotations

import io
import re
from pathlib import Path

import pytest

import betaeta.cli as cli
from betaeta.canonicity import close_term, parse_witness
from betaeta.kernel import BOOL, parse_judgment, plug, typecheck
from betaeta.semantics import InternalFault, cardinality, eval_term

JUDGMENTS = Path(__file__).resolve().parent.parent / "judgments"


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def path(name):
    return str(JUDGMENTS / name)


class TestExitCodes:
    def test_equivalent(self):
        code, out, _ = run("equiv", path("inconsistent_context.judgment"))
        assert code == 0 and out == "EQUIVALENT\n"

    def test_inequivalent(self):
        code, out, _ = run("equiv", path("swap.judgment"))
        assert code == 1 and out.startswith("INEQUIVALENT\nmodel:\n")

    def test_ill_typed(self):
        code, out, err = run("check", path("ill_typed.judgment"))
        assert code == 2 and out == "" and err == "error: in x: expected 1 + 1, got 1\n"

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["equiv"], ["equiv", "/no/such/file"]])
    def test_usage_errors(self, argv):
        assert run(*argv)[0] == 2

    def test_equiv_needs_two_terms(self):
        code, _, err = run("equiv", "--judgment", "goal 1; term a = ();")
        assert code == 2 and "two term entries" in err

    def test_internal_fault(self, monkeypatch):
        def boom(*args, **kwargs):
            raise InternalFault("witness does not separate")

        monkeypatch.setattr(cli, "decide_equiv", boom)
        code, _, err = run("equiv", path("swap.judgment"))
        assert code == 3 and err == "internal fault: witness does not separate\n"


class TestCommands:
    def test_check_machine(self):
        code, out, _ = run("check", path("swap.judgment"), "--format", "machine")
        assert code == 0
        assert out.splitlines() == ["swap: swap : X + X -> X + X", "id: id : X + X -> X + X"]

    def test_normalize(self):
        src = r"goal 1 -> 1; term t = (\f:1 -> 1. f) (\x. x);"
        assert run("normalize", "--judgment", src)[1] == "t = \\x:1. x\n"

    def test_eval_lists_every_valuation(self):
        _, out, _ = run("eval", path("two_observations.judgment"), "--model-size", "1", "--format", "machine")
        lines = out.splitlines()
        assert lines[0] == "model: X -> 1"
        # 1 + 1 -> 1 has exactly one function, so one valuation and two values.
        assert len(lines) == 3 and all(l.startswith("value: ") for l in lines[1:])

    def test_focus(self):
        _, out, _ = run("focus", path("swap.judgment"))
        assert out.splitlines()[0] == r"swap = \x0. match x0 {i1 x1 -> i2 x1 | i2 x2 -> i1 x2}"

    def test_saturate_trace(self):
        code, out, _ = run("saturate", path("inconsistent_context.judgment"), "--trace-saturation", "--format", "machine")
        assert code == 0
        keys = [l.split(":")[0] for l in out.splitlines()]
        assert keys[:2] == ["left", "right"] and "trace" in keys

    def test_oracle(self):
        code, out, _ = run("oracle", path("two_observations.judgment"), "--format", "machine")
        assert code == 1 and out == "verdict: INEQUIVALENT\nmodel: X -> 1 + 1\n"

    def test_oracle_bounded_model_size(self):
        # Models of size 0 and 1 cannot tell the two observations apart.
        code, out, _ = run("oracle", path("two_observations.judgment"), "--max-model-size", "1")
        assert code == 0 and out == "EQUIVALENT\n"


class TestInputs:
    def test_stdin(self, monkeypatch):
        text = (JUDGMENTS / "swap.judgment").read_text()
        code, out, _ = run("equiv", "-", stdin=text, monkeypatch=monkeypatch)
        assert code == 1 and out.startswith("INEQUIVALENT")

    def test_inline_matches_file(self):
        text = (JUDGMENTS / "two_observations.judgment").read_text()
        assert run("equiv", "--judgment", text) == run("equiv", path("two_observations.judgment"))


class TestWitnessOutput:
    def test_machine_format(self):
        code, out, _ = run("equiv", path("two_observations.judgment"), "--format", "machine")
        assert code == 1
        lines = out.splitlines()
        assert lines[:3] == ["verdict: INEQUIVALENT", "model:", "  X -> 1 + 1"]
        assert re.fullmatch(r"left: \S+", lines[-2]) and re.fullmatch(r"right: \S+", lines[-1])

    def test_deterministic(self):
        first = run("equiv", path("two_observations.judgment"), "--format", "machine")
        assert all(run("equiv", path("two_observations.judgment"), "--format", "machine") == first for _ in range(3))

    @pytest.mark.parametrize("name", ["swap.judgment", "two_observations.judgment"])
    def test_witness_reparses_and_separates(self, name):
        _, out, _ = run("equiv", path(name))
        model, _, context = parse_witness(out.split("\n", 1)[1])
        j = parse_judgment((JUDGMENTS / name).read_text())
        values = []
        for _, e in j.terms:
            closed = plug(context, close_term(model, e))
            typecheck([], closed, BOOL)
            values.append(eval_term([], closed, {}, BOOL))
        assert values[0] != values[1]
        assert all(cardinality(t) >= 1 for t in model.values())


def test_difftest_small_run():
    code, out, _ = run("difftest", "--judgments", "3", "--terms", "3")
    lines = out.splitlines()
    assert code == 0
    assert re.fullmatch(r"SUMMARY pairs=(\d+) agree=\1 diverge=0 skip=0 error=0", lines[-1])
    assert run("difftest", "--judgments", "3", "--terms", "3")[1] == out
