"""Removal of function types at closed types.

Every closed type is isomorphic to a type built from products, sums, 1 and
0 only. The isomorphism is given on types (`dataty`), on terms
(`defun_term`/`refun_term`) and on semantic values
(`defun_value`/`refun_value`). Composing it with the obvious reading of
function-free values as terms gives reification of any closed value.
"""

from __future__ import annotations

from typing import Callable, Optional

from .kernel import (
    UNIT,
    UNITV,
    Absurd,
    App,
    Atom,
    Empty,
    Fun,
    Inj,
    KernelError,
    Lam,
    Match,
    Pair,
    Prod,
    Proj,
    Sum,
    Term,
    Type,
    Unit,
    Var,
    commute_normal,
    print_type,
)
from .semantics import STAR, SemValue, Star, VFun, VPair, VTag, enumerate_values


class FunlessError(KernelError):
    pass


# ---------------------------------------------------------------------------
# Types


def dataty(t: Type) -> Type:
    match t:
        case Fun(a, b):
            return datatyarr(dataty(a), dataty(b))
        case Prod(a, b):
            return Prod(dataty(a), dataty(b))
        case Sum(a, b):
            return Sum(dataty(a), dataty(b))
        case Unit() | Empty():
            return t
        case Atom(name):
            raise FunlessError(f"atom {name} has no function-free form")
    raise TypeError(t)


def datatyarr(a: Type, b: Type) -> Type:
    """The function-free form of a -> b, where a and b are already function-free."""
    match a:
        case Prod(a1, a2):
            return datatyarr(a1, datatyarr(a2, b))
        case Unit():
            return b
        case Sum(a1, a2):
            return Prod(datatyarr(a1, b), datatyarr(a2, b))
        case Empty():
            return UNIT
    raise FunlessError(f"domain {print_type(a)} is not function-free")


def is_funless(t: Type) -> bool:
    match t:
        case Prod(a, b) | Sum(a, b):
            return is_funless(a) and is_funless(b)
        case Unit() | Empty():
            return True
    return False


# ---------------------------------------------------------------------------
# Values


def defun_value(v: SemValue, t: Type) -> SemValue:
    match t, v:
        case Unit(), Star():
            return v
        case Prod(ta, tb), VPair(a, b):
            return VPair(defun_value(a, ta), defun_value(b, tb))
        case Sum(ta, tb), VTag(i, a):
            return VTag(i, defun_value(a, ta if i == 1 else tb))
        case Fun(ta, tb), VFun():
            return _defunarr_value(
                lambda x: defun_value(v(refun_value(x, ta)), tb), dataty(ta), dataty(tb)
            )
    raise FunlessError(f"value does not belong to {print_type(t)}")


def _defunarr_value(f: Callable[[SemValue], SemValue], a: Type, b: Type) -> SemValue:
    match a:
        case Prod(a1, a2):
            return _defunarr_value(
                lambda x1: _defunarr_value(lambda x2: f(VPair(x1, x2)), a2, b),
                a1,
                datatyarr(a2, b),
            )
        case Unit():
            return f(STAR)
        case Sum(a1, a2):
            return VPair(
                _defunarr_value(lambda x: f(VTag(1, x)), a1, b),
                _defunarr_value(lambda x: f(VTag(2, x)), a2, b),
            )
        case Empty():
            return STAR
    raise FunlessError(f"domain {print_type(a)} is not function-free")


def refun_value(v: SemValue, t: Type) -> SemValue:
    match t, v:
        case Unit(), Star():
            return v
        case Prod(ta, tb), VPair(a, b):
            return VPair(refun_value(a, ta), refun_value(b, tb))
        case Sum(ta, tb), VTag(i, a):
            return VTag(i, refun_value(a, ta if i == 1 else tb))
        case Fun(ta, tb), _:
            da, db = dataty(ta), dataty(tb)
            return VFun(
                tuple(
                    (x, refun_value(_apply_funless(v, defun_value(x, ta), da, db), tb))
                    for x in enumerate_values(ta)
                )
            )
    raise FunlessError(f"value does not belong to the function-free form of {print_type(t)}")


def _apply_funless(v: SemValue, x: SemValue, a: Type, b: Type) -> SemValue:
    """Apply a function-free encoding of a function a -> b to an argument."""
    match a, x:
        case Prod(a1, a2), VPair(x1, x2):
            return _apply_funless(_apply_funless(v, x1, a1, datatyarr(a2, b)), x2, a2, b)
        case Unit(), _:
            return v
        case Sum(a1, a2), VTag(i, y):
            return _apply_funless(v.left if i == 1 else v.right, y, a1 if i == 1 else a2, b)
    raise FunlessError("ill-typed function-free application")


# ---------------------------------------------------------------------------
# Terms


class _Fresh:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> str:
        name = f"%f{self.n}"
        self.n += 1
        return name


def defun_term(e: Term, t: Type) -> Term:
    """A term of type dataty(t) equivalent to e : t."""
    return commute_normal(_defun(e, t, _Fresh()))


def refun_term(e: Term, t: Type) -> Term:
    """A term of type t equivalent to e : dataty(t)."""
    return commute_normal(_refun(e, t, _Fresh()))


def _defun(e: Term, t: Type, fresh: _Fresh) -> Term:
    if is_funless(t):
        return e
    match t:
        case Prod(ta, tb):
            if isinstance(e, Pair):
                return Pair(_defun(e.left, ta, fresh), _defun(e.right, tb, fresh))
            return Pair(_defun(Proj(1, e), ta, fresh), _defun(Proj(2, e), tb, fresh))
        case Sum(ta, tb):
            if isinstance(e, Inj):
                return Inj(e.index, _defun(e.arg, ta if e.index == 1 else tb, fresh))
            x, y = fresh(), fresh()
            return Match(e, x, Inj(1, _defun(Var(x), ta, fresh)), y, Inj(2, _defun(Var(y), tb, fresh)))
        case Fun(ta, tb):
            da, db = dataty(ta), dataty(tb)
            x = fresh()
            body = _defun(App(e, _refun(Var(x), ta, fresh)), tb, fresh)
            return _defunarr(Lam(x, body, da), da, db, fresh)
        case Atom(name):
            raise FunlessError(f"atom {name} has no function-free form")
    raise TypeError(t)


def _defunarr(e: Term, a: Type, b: Type, fresh: _Fresh) -> Term:
    """Encode e : a -> b (a, b function-free) as a term of type datatyarr(a, b)."""
    match a:
        case Prod(a1, a2):
            x1, x2 = fresh(), fresh()
            inner = _defunarr(Lam(x2, App(e, Pair(Var(x1), Var(x2))), a2), a2, b, fresh)
            return _defunarr(Lam(x1, inner, a1), a1, datatyarr(a2, b), fresh)
        case Unit():
            return App(e, UNITV)
        case Sum(a1, a2):
            x1, x2 = fresh(), fresh()
            return Pair(
                _defunarr(Lam(x1, App(e, Inj(1, Var(x1))), a1), a1, b, fresh),
                _defunarr(Lam(x2, App(e, Inj(2, Var(x2))), a2), a2, b, fresh),
            )
        case Empty():
            return UNITV
    raise FunlessError(f"domain {print_type(a)} is not function-free")


def _refun(e: Term, t: Type, fresh: _Fresh) -> Term:
    if is_funless(t):
        return e
    match t:
        case Prod(ta, tb):
            if isinstance(e, Pair):
                return Pair(_refun(e.left, ta, fresh), _refun(e.right, tb, fresh))
            return Pair(_refun(Proj(1, e), ta, fresh), _refun(Proj(2, e), tb, fresh))
        case Sum(ta, tb):
            if isinstance(e, Inj):
                return Inj(e.index, _refun(e.arg, ta if e.index == 1 else tb, fresh))
            x, y = fresh(), fresh()
            return Match(e, x, Inj(1, _refun(Var(x), ta, fresh)), y, Inj(2, _refun(Var(y), tb, fresh)))
        case Fun(ta, tb):
            da, db = dataty(ta), dataty(tb)
            x = fresh()
            body = _refun(App(_refunarr(e, da, db, fresh), _defun(Var(x), ta, fresh)), tb, fresh)
            return Lam(x, body, ta)
        case Atom(name):
            raise FunlessError(f"atom {name} has no function-free form")
    raise TypeError(t)


def _refunarr(e: Term, a: Type, b: Type, fresh: _Fresh) -> Term:
    """Decode e : datatyarr(a, b) as a function a -> b."""
    match a:
        case Prod(a1, a2):
            x = fresh()
            first = App(_refunarr(e, a1, datatyarr(a2, b), fresh), Proj(1, Var(x)))
            return Lam(x, App(_refunarr(first, a2, b, fresh), Proj(2, Var(x))), a)
        case Unit():
            return Lam(fresh(), e, a)
        case Sum(a1, a2):
            x, x1, x2 = fresh(), fresh(), fresh()
            return Lam(
                x,
                Match(
                    Var(x),
                    x1,
                    App(_refunarr(Proj(1, e), a1, b, fresh), Var(x1)),
                    x2,
                    App(_refunarr(Proj(2, e), a2, b, fresh), Var(x2)),
                ),
                a,
            )
        case Empty():
            x = fresh()
            return Lam(x, Absurd(Var(x)), a)
    raise FunlessError(f"domain {print_type(a)} is not function-free")


# ---------------------------------------------------------------------------
# Reification


def reify_funless(v: SemValue) -> Term:
    match v:
        case Star():
            return UNITV
        case VPair(a, b):
            return Pair(reify_funless(a), reify_funless(b))
        case VTag(i, a):
            return Inj(i, reify_funless(a))
    raise FunlessError("function value in a function-free position")


def reify(v: SemValue, t: Type) -> Term:
    """A closed beta-normal term of closed type t denoting v."""
    return refun_term(reify_funless(defun_value(v, t)), t)


def inhabitant(t: Type) -> Optional[Term]:
    values = enumerate_values(t)
    if not values:
        return None
    return reify(values[0], t)
