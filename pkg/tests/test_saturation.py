from __future__ import annotations

from hypothesis import given
from helpers import judgments_with_terms

from betaeta.focusing import check_root, defocus, print_focused, root_judgment
from betaeta.kernel import Inj, Var, beta_normalize, elaborate_normal, parse_term, parse_type
from betaeta.saturation import (
    alpha_normal,
    consistent,
    icc_canon,
    is_saturated,
    positive_subformulas,
    provable,
    retrieve,
    sat_equal,
    saturate,
    saturate_pair,
    saturation_violations,
)
from betaeta.semantics import oracle_equiv

T = parse_type


def prepared(ctx, goal, *terms):
    return [beta_normalize(ctx, elaborate_normal(ctx, e, goal)) for e in terms]


class TestDeduction:
    def test_positive_subformulas(self):
        subs = positive_subformulas([T("1 + X -> X"), T("X")])
        assert subs == [T("1 + X"), T("X")]

    def test_retrieve(self):
        ctx = [("x", T("X"))]
        assert retrieve(ctx, T("X + 1")) == Inj(1, Var("x"))
        assert retrieve(ctx, T("0")) is None

    def test_provability(self):
        assert provable([("f", T("1 -> 0"))], T("0"))
        assert not provable([("f", T("X -> 0"))], T("0"))
        assert not consistent([("f", T("1 -> 0"))])
        assert consistent([("f", T("X -> 0"))])

    def test_violations(self):
        ctx = [("f", T("1 -> 1 + 1"))]
        assert saturation_violations(ctx, positive_subformulas([T("1 -> 1 + 1")])) == [T("1 + 1")]


class TestSaturate:
    def test_single_observation_is_bound(self):
        ctx = [("f", T("1 -> 1 + 1"))]
        out = saturate(ctx, T("1 + 1"), parse_term("f ()"))
        assert print_focused(out) == "let {y0 = f up(())} in match y0 {i1 y1 -> i1 up(()) | i2 y2 -> i2 up(())}"

    def test_sum_eta_pair_saturates_identically(self):
        ctx = [("f", T("1 -> 1 + 1"))]
        a, b = prepared(ctx, T("1 + 1"), parse_term("f ()"), parse_term("case f () of {i1 a -> i1 a | i2 b -> i2 b}"))
        r = saturate_pair(ctx, T("1 + 1"), a, b, trace=True)
        assert print_focused(r.terms[0]) == print_focused(r.terms[1])
        assert r.trace == ["PHASE old=[] new=[f : 1 -> 1 + 1] select=[f () : 1 + 1] retrievable=[]"]
        for g in r.final_contexts:
            assert is_saturated(g, r.subformulas) and consistent(g)

    def test_inconsistent_context_collapses(self):
        ctx = [("f", T("1 -> 1 + 1")), ("g", T("1 -> 0"))]
        a, b = prepared(
            ctx,
            T("1 + 1"),
            parse_term("case f () of {i1 x -> i1 () | i2 x -> i1 ()}"),
            parse_term("case f () of {i1 x -> i2 () | i2 x -> i2 ()}"),
        )
        r = saturate_pair(ctx, T("1 + 1"), a, b)
        expected = "let {y0 = f up(()); y1 = g up(())} in absurd y1"
        assert [print_focused(t) for t in r.terms] == [expected, expected]
        assert sat_equal(*r.terms)

    def test_distinct_observations_stay_apart(self):
        ctx = [("n", T("1 + X -> X"))]
        a, b = prepared(ctx, T("X"), parse_term("n (i1 ())"), parse_term("n (i2 (n (i1 ())))"))
        r = saturate_pair(ctx, T("X"), a, b)
        assert [print_focused(t) for t in r.terms] == [
            "let {y0 = n (i1 up(()))} in let {y1 = n (i2 y0)} in y0",
            "let {y0 = n (i1 up(()))} in let {y1 = n (i2 y0)} in y1",
        ]
        assert not sat_equal(*r.terms)


class TestProperties:
    @given(judgments_with_terms(count=2))
    def test_outputs_are_saturated_and_sound(self, j):
        ctx, goal, (a, b) = j
        pa, pb = prepared(ctx, goal, a, b)
        r = saturate_pair(ctx, goal, pa, pb)
        for orig, out in zip((a, b), r.terms):
            check_root(out, ctx, goal, saturated=True)
            assert oracle_equiv(ctx, orig, defocus(out), 2, goal)
        for g in r.final_contexts:
            assert is_saturated(g, r.subformulas) and consistent(g)

    @given(judgments_with_terms(count=2))
    def test_sat_equal_is_symmetric_and_reflexive(self, j):
        ctx, goal, (a, b) = j
        pa, pb = prepared(ctx, goal, a, b)
        r = saturate_pair(ctx, goal, pa, pb)
        delta = root_judgment(ctx, goal).delta
        x, y = r.terms
        assert sat_equal(x, x, delta) and sat_equal(y, y, delta)
        assert sat_equal(x, y, delta) == sat_equal(y, x, delta)

    @given(judgments_with_terms(count=1))
    def test_icc_canon_is_idempotent(self, j):
        ctx, goal, (e,) = j
        (pe,) = prepared(ctx, goal, e)
        delta = root_judgment(ctx, goal).delta
        once = icc_canon(saturate(ctx, goal, pe), delta)
        assert alpha_normal(icc_canon(once, delta)) == alpha_normal(once)
