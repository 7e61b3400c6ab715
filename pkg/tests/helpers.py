"""Shared generators for the test suite."""

from __future__ import annotations

import random
from functools import lru_cache

from hypothesis import strategies as st

from betaeta.driver import enumerate_terms, enumerate_types
from betaeta.kernel import (
    BOOL,
    EMPTY,
    UNIT,
    UNITV,
    Absurd,
    Annot,
    App,
    Fun,
    Inj,
    Lam,
    Match,
    Pair,
    Prod,
    Proj,
    Sum,
    Term,
    Var,
    free_vars,
    fresh_name,
)
from betaeta.semantics import BudgetExceeded, apply_model, cardinality, fin


def closed_types(max_binary: int) -> list:
    """Closed types over 1 and 0 with at most `max_binary` binary connectives."""
    levels = [[UNIT, EMPTY]]
    for n in range(1, max_binary + 1):
        level = []
        for k in range(n):
            for a in levels[k]:
                for b in levels[n - 1 - k]:
                    level += [Fun(a, b), Prod(a, b), Sum(a, b)]
        levels.append(level)
    return [t for level in levels for t in level]


def _kids(e: Term) -> list[Term]:
    match e:
        case Lam(_, b, _) | Proj(_, b) | Inj(_, b) | Absurd(b) | Annot(b, _):
            return [b]
        case App(a, b) | Pair(a, b):
            return [a, b]
        case Match(s, _, b1, _, b2):
            return [s, b1, b2]
    return []


def _rebuild(e: Term, kids: list[Term]) -> Term:
    match e:
        case Lam(x, _, t):
            return Lam(x, kids[0], t)
        case Proj(i, _):
            return Proj(i, kids[0])
        case Inj(i, _):
            return Inj(i, kids[0])
        case Absurd(_):
            return Absurd(kids[0])
        case Annot(_, t):
            return Annot(kids[0], t)
        case App():
            return App(*kids)
        case Pair():
            return Pair(*kids)
        case Match(_, x1, _, x2, _):
            return Match(kids[0], x1, kids[1], x2, kids[2])
    return e


def _positions(e: Term, path=()):
    yield path
    for i, k in enumerate(_kids(e)):
        yield from _positions(k, path + (i,))


def _at(e: Term, path) -> Term:
    for i in path:
        e = _kids(e)[i]
    return e


def _replace(e: Term, path, new: Term) -> Term:
    if not path:
        return new
    kids = _kids(e)
    kids[path[0]] = _replace(kids[path[0]], path[1:], new)
    return _rebuild(e, kids)


def _wrap(s: Term, choice: int) -> Term:
    """A well-typed redex whose contractum is s (at the same type as s)."""
    y = fresh_name("w", free_vars(s))
    match choice:
        case 0:
            return App(Lam(y, s, UNIT), UNITV)
        case 1:
            return Proj(1, Pair(s, UNITV))
        case 2:
            return Proj(2, Pair(UNITV, s))
        case 3:
            return Match(Annot(Inj(1, UNITV), BOOL), y, s, y, s)
        case _:
            z = fresh_name("w", free_vars(s) | {y})
            return App(Lam(y, App(Lam(z, s, UNIT), Var(y)), UNIT), UNITV)


def beta_expand(e: Term, rng: random.Random, steps: int = 3) -> Term:
    """Insert `steps` redexes at random positions, preserving type and normal form."""
    for _ in range(steps):
        paths = list(_positions(e))
        p = rng.choice(paths)
        e = _replace(e, p, _wrap(_at(e, p), rng.randrange(5)))
    return e


@lru_cache(maxsize=None)
def small_types(connectives: int = 3) -> tuple:
    return tuple(enumerate_types(["X"], connectives))


def oracle_cheap(ctx, goal, limit: int = 4000) -> bool:
    try:
        card = 1
        for _, t in ctx:
            card *= cardinality(apply_model({"X": fin(3)}, t))
        return card * max(1, cardinality(apply_model({"X": fin(3)}, goal))) <= limit
    except BudgetExceeded:
        return False


@lru_cache(maxsize=None)
def judgment_pool(connectives: int = 3, size: int = 5, tries: int = 2000) -> tuple:
    """Deterministic sample of cheap judgments with at least two inhabitants."""
    rng = random.Random(1234)
    types = small_types(connectives)
    pool = []
    for _ in range(tries):
        ctx = tuple((f"h{i}", rng.choice(types)) for i in range(rng.randint(0, 2)))
        goal = rng.choice(types)
        if not oracle_cheap(ctx, goal):
            continue
        try:
            terms = enumerate_terms(list(ctx), goal, size, budget=500)
        except BudgetExceeded:
            continue
        if len(terms) >= 2:
            pool.append((ctx, goal, tuple(terms)))
    return tuple(pool)


@st.composite
def judgments_with_terms(draw, count: int = 2):
    """A judgment over one atom with `count` inhabitants drawn from the enumerator."""
    ctx, goal, terms = draw(st.sampled_from(judgment_pool()))
    picked = [draw(st.sampled_from(terms)) for _ in range(count)]
    return list(ctx), goal, picked
