from __future__ import annotations

import itertools

import pytest
from helpers import closed_types

from betaeta.driver import enumerate_terms
from betaeta.funless import (
    FunlessError,
    dataty,
    defun_term,
    defun_value,
    inhabitant,
    is_funless,
    refun_term,
    refun_value,
    reify,
    reify_funless,
)
from betaeta.kernel import BOOL, alpha_eq, parse_term, parse_type, print_term, typecheck
from betaeta.semantics import STAR, VFun, VPair, VTag, cardinality, enumerate_values, eval_term


@pytest.mark.parametrize(
    "src,expected",
    [
        ("1 + 1 -> 1 + 1", "(1 + 1) * (1 + 1)"),
        ("0 -> 1 + 1", "1"),
        ("1 -> 1 + 1", "1 + 1"),
        ("1 * 1 -> 0", "0"),
        ("(1 -> 1 + 1) -> 1 + 1", "(1 + 1) * (1 + 1)"),
        ("(1 + 1) * (1 -> 0)", "(1 + 1) * 0"),
    ],
)
def test_dataty_examples(src, expected):
    assert dataty(parse_type(src)) == parse_type(expected)


def test_dataty_rejects_atoms():
    with pytest.raises(FunlessError):
        dataty(parse_type("X -> X"))


def test_is_funless():
    assert is_funless(parse_type("(1 + 1) * 0"))
    assert not is_funless(parse_type("1 -> 1"))


def test_negation_table():
    t = parse_type("1 + 1 -> 1 + 1")
    neg = VFun(((VTag(1, STAR), VTag(2, STAR)), (VTag(2, STAR), VTag(1, STAR))))
    assert defun_value(neg, t) == VPair(VTag(2, STAR), VTag(1, STAR))
    assert refun_value(VPair(VTag(2, STAR), VTag(1, STAR)), t) == neg


def test_reify():
    assert print_term(reify_funless(VPair(VTag(2, STAR), STAR))) == "(i2 (), ())"
    t = parse_type("1 + 1 -> 1 + 1")
    e = reify(enumerate_values(t)[1], t)
    typecheck([], e, t)
    assert eval_term([], e, {}, t) == enumerate_values(t)[1]


def test_inhabitant():
    assert inhabitant(parse_type("1 -> 0")) is None
    e = inhabitant(parse_type("0 -> 1 + 1"))
    assert e is not None
    typecheck([], e, parse_type("0 -> 1 + 1"))


@pytest.mark.parametrize("t", closed_types(2), ids=str)
def test_bijection(t):
    d = dataty(t)
    assert is_funless(d)
    assert cardinality(d) == cardinality(t)
    assert [refun_value(defun_value(v, t), t) for v in enumerate_values(t)] == list(enumerate_values(t))
    assert [defun_value(refun_value(w, t), t) for w in enumerate_values(d)] == list(enumerate_values(d))


FUNCTION_TYPES = [t for t in closed_types(3) if not is_funless(t) and cardinality(t) <= 16]


@pytest.mark.parametrize("t", FUNCTION_TYPES[::7], ids=lambda t: str(len(str(t))))
def test_term_translations_track_values(t):
    d = dataty(t)
    terms = enumerate_terms([], t, 6, budget=200)
    values = []
    for e in terms:
        v = eval_term([], e, {}, t)
        values.append(v)
        de = defun_term(e, t)
        typecheck([], de, d)
        assert eval_term([], de, {}, d) == defun_value(v, t)
        back = refun_term(de, t)
        typecheck([], back, t)
        assert eval_term([], back, {}, t) == v
    # Equal before the translation exactly when equal after it.
    for (a, va), (b, vb) in itertools.combinations(zip(terms, values), 2):
        da = eval_term([], defun_term(a, t), {}, d)
        db = eval_term([], defun_term(b, t), {}, d)
        assert (va == vb) == (da == db)


@pytest.mark.parametrize("t", [BOOL, parse_type("(1 + 1) * (1 + 0)"), parse_type("1 + (1 + 1) * 1")])
def test_reify_eval_fixes_normal_terms(t):
    for e in enumerate_terms([], t, 8):
        assert alpha_eq(reify_funless(eval_term([], e, {}, t)), e)


def test_reify_of_function_value_is_closed_and_correct():
    t = parse_type("(1 + 1 -> 1 + 1) -> 1 + 1")
    for v in enumerate_values(t):
        e = reify(v, t)
        typecheck([], e, t)
        assert eval_term([], e, {}, t) == v


def test_translation_of_open_terms():
    t = parse_type("1 + 1 -> 1 + 1")
    assert print_term(defun_term(parse_term("f"), t)) == "(f (i1 ()), f (i2 ()))"
    assert print_term(defun_term(parse_term("f"), parse_type("0 -> 1"))) == "()"


def test_translations_keep_heads_inferable():
    # A naive normal form here is `\x:0. case absurd x of {...}`.
    t = parse_type("0 -> 1 + (1 -> 0)")
    back = refun_term(defun_term(parse_term("\\z. absurd z"), t), t)
    typecheck([], back, t)
    assert print_term(back).count("case") == 0
