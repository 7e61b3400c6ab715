from __future__ import annotations

import pytest
from hypothesis import given
from helpers import judgments_with_terms

from betaeta.focusing import (
    FAbsurd,
    FConcPos,
    FocusError,
    FUnit,
    NArrow,
    NAtom,
    NProd,
    NUnit,
    PAtom,
    PEmpty,
    PInj,
    PShift,
    PSum,
    ShiftToNeg,
    ShiftToPos,
    check_root,
    defocus,
    depolarize,
    focus,
    is_positive,
    polarize,
    polarize_neg,
    polarize_pos,
    print_focused,
    print_poltype,
    root_judgment,
)
from betaeta.kernel import alpha_eq, parse_term, parse_type, strip_annotations
from betaeta.saturation import alpha_normal, icc_canon
from betaeta.semantics import oracle_equiv


def T(s):
    return parse_type(s)


class TestPolarity:
    def test_connective_polarities(self):
        assert is_positive(T("X + X")) and is_positive(T("0")) and is_positive(T("X"))
        assert not is_positive(T("X -> X")) and not is_positive(T("X * X")) and not is_positive(T("1"))

    def test_atom_polarity_map(self):
        assert not is_positive(T("X"), {"X": "-"})
        assert polarize(T("X"), {"X": "-"}) == NAtom("X")

    def test_shifts_are_inserted_at_polarity_changes(self):
        assert polarize_neg(T("1 + 1")) == ShiftToNeg(PSum(ShiftToPos(NUnit()), ShiftToPos(NUnit())))
        assert polarize_pos(T("X -> X")) == ShiftToPos(NArrow(PAtom("X"), ShiftToNeg(PAtom("X"))))
        assert polarize_neg(T("X * 0")) == NProd(ShiftToNeg(PAtom("X")), ShiftToNeg(PEmpty()))

    def test_printing(self):
        assert print_poltype(polarize_pos(T("X * X"))) == "⇑(⇓X * ⇓X)"

    @pytest.mark.parametrize("src", ["X -> X + 1", "(X * X) + 0", "((X -> 0) -> X) * 1", "X"])
    def test_depolarize_inverts(self, src):
        for pol in (None, {"X": "-"}):
            assert depolarize(polarize(T(src), pol)) == T(src)


class TestFocus:
    def test_swap(self):
        f = focus([], parse_term(r"\y. case y of {i1 a -> i2 a | i2 a -> i1 a}"), T("X + X -> X + X"))
        assert print_focused(f) == r"\x0. match x0 {i1 x1 -> i2 x1 | i2 x2 -> i1 x2}"

    def test_function_is_eta_expanded(self):
        f = focus([("f", T("X -> X"))], parse_term("f"), T("X -> X"))
        assert print_focused(f) == r"\x0. let y0 = f x0 in y0"

    def test_negative_atoms_need_no_let(self):
        pol = {"X": "-"}
        f = focus([("f", T("X -> X"))], parse_term("f"), T("X -> X"), pol)
        assert print_focused(f) == r"\x0. f up(x0)"

    def test_sum_variable_is_eta_expanded(self):
        f = focus([("b", T("1 + 1"))], parse_term("b"), T("1 + 1"))
        assert print_focused(f) == "match b {i1 b0 -> i1 up(()) | i2 b1 -> i2 up(())}"

    def test_products(self):
        f = focus([("p", T("X * X"))], parse_term("(p2 p, p1 p)"), T("X * X"))
        assert print_focused(f) == "⟨let y0 = p2 p in y0, let y1 = p1 p in y1⟩"

    def test_absurd(self):
        assert focus([("z", T("0"))], parse_term("absurd z"), T("X -> X")) == FAbsurd("z")

    def test_root_judgment(self):
        j = root_judgment([("f", T("X -> X"))], T("X"))
        assert j.goal == ShiftToNeg(PAtom("X"))
        assert j.delta == (("f", ShiftToPos(NArrow(PAtom("X"), ShiftToNeg(PAtom("X"))))),)


class TestChecker:
    def test_rejects_unit_at_atom(self):
        with pytest.raises(FocusError):
            check_root(FUnit(), [], T("X"))

    def test_rejects_wrong_injection(self):
        # i1 () is not a value of 0 + X.
        with pytest.raises(FocusError):
            check_root(FConcPos(PInj(1, PShift(FUnit()))), [], T("0 + X"))

    def test_accepts_focused_output(self):
        ctx = [("n", T("1 + X -> X"))]
        e = parse_term("n (i2 (n (i1 ())))")
        check_root(focus(ctx, e, T("X")), ctx, T("X"))


class TestProperties:
    @given(judgments_with_terms(count=1))
    def test_focus_is_well_formed_and_sound(self, j):
        ctx, goal, (e,) = j
        f = focus(ctx, e, goal)
        check_root(f, ctx, goal)
        assert oracle_equiv(ctx, e, defocus(f), 2, goal)

    @given(judgments_with_terms(count=1))
    def test_focus_is_stable(self, j):
        ctx, goal, (e,) = j
        f = focus(ctx, e, goal)
        again = focus(ctx, strip_annotations(defocus(f)), goal)
        jf = root_judgment(ctx, goal)
        assert alpha_normal(icc_canon(again, jf.delta)) == alpha_normal(icc_canon(f, jf.delta))

    @given(judgments_with_terms(count=1))
    def test_negative_polarity_is_also_sound(self, j):
        ctx, goal, (e,) = j
        pol = {"X": "-"}
        f = focus(ctx, e, goal, pol)
        check_root(f, ctx, goal, pol)
        assert oracle_equiv(ctx, e, defocus(f), 2, goal)

    @given(judgments_with_terms(count=1))
    def test_defocus_of_beta_normal_is_alpha_stable(self, j):
        ctx, goal, (e,) = j
        d = defocus(focus(ctx, e, goal))
        assert alpha_eq(strip_annotations(defocus(focus(ctx, d, goal))), strip_annotations(d))
