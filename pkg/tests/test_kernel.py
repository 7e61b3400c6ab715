from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from helpers import beta_expand, judgments_with_terms

from betaeta.kernel import (
    BOOL,
    EMPTY,
    UNIT,
    UNITV,
    App,
    Atom,
    Fun,
    Hole,
    Inj,
    Lam,
    Pair,
    ParseError,
    Prod,
    Sum,
    TypeCheckError,
    Var,
    alpha_eq,
    alpha_key,
    beta_normalize,
    elaborate,
    free_vars,
    is_beta_normal,
    normalize_with,
    parse_judgment,
    parse_term,
    parse_type,
    plug,
    print_term,
    print_type,
    redex_paths,
    reduce_at,
    strip_annotations,
    subst,
    term_size,
    typecheck,
    whnf,
)

X = Atom("X")


class TestTypes:
    def test_precedence(self):
        # -> binds loosest, then +, then *.
        assert parse_type("1 + X * X -> X") == Fun(Sum(UNIT, Prod(X, X)), X)

    def test_right_associativity(self):
        assert parse_type("X -> X -> X") == Fun(X, Fun(X, X))
        assert parse_type("X + X + X") == Sum(X, Sum(X, X))
        assert parse_type("X * X * X") == Prod(X, Prod(X, X))

    def test_parentheses(self):
        assert parse_type("(X -> X) -> 0") == Fun(Fun(X, X), EMPTY)

    @pytest.mark.parametrize(
        "text", ["1 + X * X -> X", "(X -> X) -> X", "(X + X) * 0", "X * (X + 1)", "((X -> 1) + 0) * X"]
    )
    def test_print_roundtrip(self, text):
        t = parse_type(text)
        assert parse_type(print_type(t)) == t

    def test_distinct_constructors_hash_apart(self):
        assert len({Prod(UNIT, UNIT), Sum(UNIT, UNIT), Fun(UNIT, UNIT), UNIT, EMPTY}) == 5

    def test_parse_error_has_position(self):
        with pytest.raises(ParseError, match=r"1:\d+"):
            parse_type("X -> ")


class TestTerms:
    def test_parse_lambda_and_match(self):
        e = parse_term(r"\x:1. case x of {i1 a -> i2 a | i2 a -> i1 a}")
        assert isinstance(e, Lam) and e.ann == UNIT

    def test_print_parse_roundtrip(self):
        src = r"\f. \y. case f (p1 y) of {i1 a -> (a, ()) | i2 b -> absurd b}"
        e = parse_term(src)
        assert parse_term(print_term(e)) == e

    def test_free_vars(self):
        assert free_vars(parse_term(r"\x. f x y")) == {"f", "y"}

    def test_subst_avoids_capture(self):
        e = subst(parse_term(r"\y. x"), "x", Var("y"))
        assert isinstance(e, Lam) and e.binder != "y" and e.body == Var("y")

    def test_plug_may_capture(self):
        ctx = Lam("n", Hole(), None)
        assert plug(ctx, Var("n")) == Lam("n", Var("n"), None)

    def test_alpha(self):
        a, b = parse_term(r"\x. \y. x"), parse_term(r"\u. \v. u")
        assert alpha_eq(a, b) and alpha_key(a) == alpha_key(b)
        assert not alpha_eq(a, parse_term(r"\x. \y. y"))

    def test_size(self):
        assert term_size(parse_term(r"\x. (x, ())")) == 4


class TestTyping:
    def test_check_lambda(self):
        assert typecheck([], parse_term(r"\x. x"), Fun(X, X)) == Fun(X, X)

    def test_mismatch(self):
        with pytest.raises(TypeCheckError):
            typecheck([("x", UNIT)], Var("x"), BOOL)

    def test_unannotated_lambda_needs_check_mode(self):
        with pytest.raises(TypeCheckError):
            typecheck([], parse_term(r"\x. x"))

    def test_absurd(self):
        assert typecheck([("z", EMPTY)], parse_term("absurd z"), Fun(X, X)) == Fun(X, X)

    def test_match_inferred_from_second_branch(self):
        ctx = [("s", BOOL), ("z", EMPTY), ("u", X)]
        e = parse_term("case s of {i1 a -> absurd z | i2 b -> u}")
        assert typecheck(ctx, e) == X

    def test_elaborate_annotates_binders(self):
        e = elaborate([], parse_term(r"\x. x"), Fun(X, X))
        assert e == Lam("x", Var("x"), X)

    def test_judgment_file_syntax(self):
        j = parse_judgment("atoms X;\ncontext n : 1 + X -> X;\ngoal X;\nterm a = n (i1 ());\n")
        assert j.atoms == ("X",)
        assert j.context == (("n", Fun(Sum(UNIT, X), X)),)
        assert [name for name, _ in j.terms] == ["a"]


class TestReduction:
    def test_beta(self):
        e = parse_term(r"(\x. case x of {i1 a -> i2 a | i2 a -> i1 a}) (i1 ())")
        assert beta_normalize([], e) == Inj(2, UNITV)

    def test_projection(self):
        assert beta_normalize([], parse_term("p2 ((), i1 ())")) == Inj(1, UNITV)

    def test_whnf_stops_at_head(self):
        e = parse_term(r"(\x. (x, (\y. y) ())) ()")
        w = whnf(e)
        assert isinstance(w, Pair) and not is_beta_normal(w)

    def test_redex_paths_order(self):
        e = parse_term(r"(\x. x) ((\y. y) ())")
        assert list(redex_paths(e)) == [(), (1,)]
        inner = reduce_at(e, (1,))
        assert inner == App(Lam("x", Var("x"), None), UNITV)

    def test_strategies_agree_on_example(self):
        e = parse_term(r"(\f. f (f ())) (\z. (\w. w) z)")
        outs = {print_term(normalize_with(e, lambda ps, k=k: k % len(ps))) for k in range(4)}
        assert outs == {"()"}

    @given(judgments_with_terms(count=1), st.integers(0, 2**32 - 1))
    def test_normalization_confluent(self, j, seed):
        ctx, _, (e,) = j
        rng = random.Random(seed)
        expanded = beta_expand(e, rng, steps=3)
        first = normalize_with(expanded, lambda ps: 0)
        last = normalize_with(expanded, lambda ps: len(ps) - 1)
        rand = normalize_with(expanded, lambda ps: rng.randrange(len(ps)))
        assert alpha_eq(first, last) and alpha_eq(first, rand)
        assert alpha_eq(beta_normalize(ctx, expanded), first)

    @given(judgments_with_terms(count=1))
    def test_beta_normalize_idempotent(self, j):
        ctx, _, (e,) = j
        nf = beta_normalize(ctx, e)
        assert is_beta_normal(nf)
        assert alpha_eq(beta_normalize(ctx, nf), nf)

    @given(judgments_with_terms(count=1))
    def test_print_parse_roundtrip_on_enumerated_terms(self, j):
        ctx, goal, (e,) = j
        back = parse_term(print_term(e))
        assert alpha_eq(strip_annotations(back), strip_annotations(e))
        typecheck(ctx, back, goal)
