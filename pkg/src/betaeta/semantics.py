"""Finite set-theoretic semantics of closed types and terms.

Closed types denote finite sets of values; a model instantiates atoms with
closed types. Function values are extensional tables, so value equality is
decidable and two terms can be compared by brute-force evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import prod
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .kernel import (
    EMPTY,
    UNIT,
    Absurd,
    Annot,
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
    TypeCheckError,
    Unit,
    UnitVal,
    Var,
    elaborate_normal,
    print_type,
    type_atoms,
    typecheck,
)

BUDGET = 10**6


class BudgetExceeded(KernelError):
    pass


class InternalFault(Exception):
    pass


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class Star:
    def __repr__(self) -> str:
        return "*"


@dataclass(frozen=True)
class VPair:
    left: "SemValue"
    right: "SemValue"


@dataclass(frozen=True)
class VTag:
    index: int
    payload: "SemValue"


@dataclass(frozen=True)
class VFun:
    table: tuple[tuple["SemValue", "SemValue"], ...]

    def __call__(self, arg: "SemValue") -> "SemValue":
        return _table_dict(self)[arg]


SemValue = Union[Star, VPair, VTag, VFun]
STAR = Star()


@lru_cache(maxsize=None)
def _table_dict(f: VFun) -> dict:
    return dict(f.table)


def print_value(v: SemValue) -> str:
    match v:
        case Star():
            return "*"
        case VPair(a, b):
            return f"<{print_value(a)}, {print_value(b)}>"
        case VTag(i, a):
            return f"in{i}({print_value(a)})"
        case VFun(table):
            return "{" + ", ".join(f"{print_value(a)} |-> {print_value(b)}" for a, b in table) + "}"
    raise TypeError(v)


# ---------------------------------------------------------------------------
# Models

Model = Mapping[str, Type]


def fin(n: int) -> Type:
    """The n-th type of the canonical ladder 0, 1, 1+1, 1+(1+1), ..."""
    if n == 0:
        return EMPTY
    t: Type = UNIT
    for _ in range(n - 1):
        t = Sum(UNIT, t)
    return t


def fin_code(k: int, n: int) -> SemValue:
    """The k-th element (0-based) of fin(n)."""
    if not 0 <= k < n:
        raise ValueError(f"code {k} out of range for Fin({n})")
    if n == 1:
        return STAR
    if k == 0:
        return VTag(1, STAR)
    return VTag(2, fin_code(k - 1, n - 1))


def apply_model(m: Model, t: Type) -> Type:
    match t:
        case Atom(name):
            if name not in m:
                raise KernelError(f"model does not interpret atom {name}")
            return m[name]
        case Fun(a, b):
            return Fun(apply_model(m, a), apply_model(m, b))
        case Prod(a, b):
            return Prod(apply_model(m, a), apply_model(m, b))
        case Sum(a, b):
            return Sum(apply_model(m, a), apply_model(m, b))
    return t


def print_model(m: Model) -> str:
    return ", ".join(f"{x} -> {print_type(t)}" for x, t in sorted(m.items()))


def ladder_models(atoms: Iterable[str], sizes: Iterable[int]) -> Iterator[dict[str, Type]]:
    atoms = sorted(set(atoms))
    sizes = sorted(set(sizes))
    for combo in itertools.product(sizes, repeat=len(atoms)):
        yield {x: fin(n) for x, n in zip(atoms, combo)}


# ---------------------------------------------------------------------------
# Enumeration


def cardinality(t: Type) -> int:
    match t:
        case Unit():
            return 1
        case Empty():
            return 0
        case Prod(a, b):
            return cardinality(a) * cardinality(b)
        case Sum(a, b):
            return cardinality(a) + cardinality(b)
        case Fun(a, b):
            base, exp = cardinality(b), cardinality(a)
            if base > 1 and exp * base.bit_length() > _MAX_CARD_BITS:
                raise BudgetExceeded(f"type {print_type(t)} is astronomically large")
            return base**exp
        case Atom(name):
            raise KernelError(f"type is not closed: atom {name}")
    raise TypeError(t)


_MAX_CARD_BITS = 4096


def enumerate_values(t: Type) -> tuple[SemValue, ...]:
    """All values of a closed type in canonical order."""
    if cardinality(t) > BUDGET:
        raise BudgetExceeded(f"type {print_type(t)} has more than {BUDGET} values")
    return _enumerate(t)


@lru_cache(maxsize=1 << 16)
def _enumerate(t: Type) -> tuple[SemValue, ...]:
    match t:
        case Unit():
            return (STAR,)
        case Empty():
            return ()
        case Prod(a, b):
            return tuple(VPair(x, y) for x in _enumerate(a) for y in _enumerate(b))
        case Sum(a, b):
            return tuple(VTag(1, x) for x in _enumerate(a)) + tuple(VTag(2, y) for y in _enumerate(b))
        case Fun(a, b):
            dom = _enumerate(a)
            cod = _enumerate(b)
            return tuple(
                VFun(tuple(zip(dom, outs))) for outs in itertools.product(cod, repeat=len(dom))
            )
    raise KernelError(f"type is not closed: {print_type(t)}")


def value_index(v: SemValue, t: Type) -> int:
    return _enumerate(t).index(v)


def check_value(v: SemValue, t: Type) -> bool:
    match v, t:
        case Star(), Unit():
            return True
        case VPair(a, b), Prod(ta, tb):
            return check_value(a, ta) and check_value(b, tb)
        case VTag(1, a), Sum(ta, _):
            return check_value(a, ta)
        case VTag(2, b), Sum(_, tb):
            return check_value(b, tb)
        case VFun(table), Fun(ta, tb):
            dom = _enumerate(ta)
            return tuple(a for a, _ in table) == dom and all(check_value(b, tb) for _, b in table)
    return False


# ---------------------------------------------------------------------------
# Evaluation

Valuation = Mapping[str, SemValue]


def _needs_annotation(e: Term) -> bool:
    match e:
        case Lam(_, body, ann):
            return ann is None or _needs_annotation(body)
        case App(a, b) | Pair(a, b):
            return _needs_annotation(a) or _needs_annotation(b)
        case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
            return _needs_annotation(a)
        case Match(s, _, b1, _, b2):
            return _needs_annotation(s) or _needs_annotation(b1) or _needs_annotation(b2)
    return False


def eval_term(
    ctx: Sequence[tuple[str, Type]],
    e: Term,
    g: Valuation,
    goal: Optional[Type] = None,
    model: Optional[Model] = None,
) -> SemValue:
    """Evaluate e under valuation g.

    Lambda binders must carry annotations; when they do not, the goal type is
    used to elaborate them. Annotations mentioning atoms are read through the
    model.
    """
    if _needs_annotation(e):
        if goal is None:
            raise TypeCheckError("evaluation needs annotated binders or a goal type")
        e = elaborate_normal(ctx, e, goal)
    return _Evaluator(model or {}).run(e, dict(g))


class _Evaluator:
    def __init__(self, model: Model):
        self.model = model
        self.closed: dict[Type, Type] = {}

    def close(self, t: Type) -> Type:
        c = self.closed.get(t)
        if c is None:
            c = apply_model(self.model, t) if type_atoms(t) else t
            self.closed[t] = c
        return c

    def run(self, e: Term, env: dict[str, SemValue]) -> SemValue:
        return self.force(self.lazy(e, env))

    def force(self, v):
        """Materialize closures into tables, recursively."""
        match v:
            case _Closure():
                return VFun(tuple((a, self.force(v(a))) for a in enumerate_values(v.dom)))
            case VPair(a, b):
                return VPair(self.force(a), self.force(b))
            case VTag(i, a):
                return VTag(i, self.force(a))
        return v

    def lazy(self, e: Term, env: dict[str, SemValue]):
        # Lambdas evaluate to closures; tables are built only when a function
        # value is used as an argument of a table or returned.
        match e:
            case Var(x):
                if x not in env:
                    raise InternalFault(f"unbound variable {x} during evaluation")
                return env[x]
            case Lam(x, body, ann):
                return _Closure(self, x, body, env, self.close(ann))
            case App(f, a):
                fv = self.lazy(f, env)
                av = self.lazy(a, env)
                return fv(av) if isinstance(fv, _Closure) else fv(self.force(av))
            case Pair(a, b):
                return VPair(self.lazy(a, env), self.lazy(b, env))
            case Proj(i, a):
                p = self.lazy(a, env)
                return p.left if i == 1 else p.right
            case UnitVal():
                return STAR
            case Inj(i, a):
                return VTag(i, self.lazy(a, env))
            case Match(s, x1, b1, x2, b2):
                v = self.lazy(s, env)
                if v.index == 1:
                    return self.lazy(b1, {**env, x1: v.payload})
                return self.lazy(b2, {**env, x2: v.payload})
            case Absurd(_):
                raise InternalFault("evaluated an eliminator of the empty type")
            case Annot(a, _):
                return self.lazy(a, env)
        raise InternalFault(f"cannot evaluate {e!r}")


class _Closure:
    def __init__(self, ev: _Evaluator, x: str, body: Term, env: dict, dom: Type):
        self.ev, self.x, self.body, self.env, self.dom = ev, x, body, env, dom

    def __call__(self, arg):
        return self.ev.lazy(self.body, {**self.env, self.x: arg})


# Short alias matching the operation name used by callers.
eval = eval_term  # noqa: A001


def valuations(ctx: Sequence[tuple[str, Type]], budget: int = BUDGET) -> Iterator[dict[str, SemValue]]:
    """Every valuation of a closed context, in canonical order."""
    ctx = list(ctx)
    count = prod(cardinality(t) for _, t in ctx)
    if count > budget:
        raise BudgetExceeded(f"{count} valuations exceed the budget of {budget}")
    if count == 0:
        return
    names = [x for x, _ in ctx]
    for combo in itertools.product(*(enumerate_values(t) for _, t in ctx)):
        yield dict(zip(names, combo))


def _closed_ctx(ctx: Sequence[tuple[str, Type]], m: Model) -> list[tuple[str, Type]]:
    return [(x, apply_model(m, t)) for x, t in ctx]


def _prepare(ctx, e1: Term, e2: Term, goal: Optional[Type]) -> tuple[Term, Term, Type]:
    if goal is None:
        goal = typecheck(ctx, e1)
    try:
        a = elaborate_normal(ctx, e1, goal)
        b = elaborate_normal(ctx, e2, goal)
    except TypeCheckError as err:
        raise TypeCheckError(f"terms do not share the type {print_type(goal)}: {err}") from err
    return a, b, goal


def sem_equal_in_model(
    ctx: Sequence[tuple[str, Type]],
    e1: Term,
    e2: Term,
    m: Model,
    goal: Optional[Type] = None,
    budget: int = BUDGET,
) -> bool:
    a, b, _ = _prepare(ctx, e1, e2, goal)
    ev = _Evaluator(m)
    for g in valuations(_closed_ctx(ctx, m), budget):
        if ev.run(a, g) != ev.run(b, g):
            return False
    return True


def judgment_atoms(ctx: Sequence[tuple[str, Type]], goal: Type) -> set[str]:
    atoms = set(type_atoms(goal))
    for _, t in ctx:
        atoms |= type_atoms(t)
    return atoms


def evaluation_cost(e: Term, m: Model) -> int:
    """Upper bound on the body evaluations needed to run e once under m."""

    def go(e: Term, mult: int) -> int:
        match e:
            case Lam(_, body, ann):
                inner = mult * cardinality(apply_model(m, ann))
                return inner + go(body, inner)
            case App(a, b) | Pair(a, b):
                return go(a, mult) + go(b, mult)
            case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
                return go(a, mult)
            case Match(s, _, b1, _, b2):
                return go(s, mult) + go(b1, mult) + go(b2, mult)
        return mult

    return 1 + go(e, 1)


def distinguishing_model(
    ctx: Sequence[tuple[str, Type]],
    e1: Term,
    e2: Term,
    sizes: Iterable[int],
    goal: Optional[Type] = None,
    budget: int = BUDGET,
) -> Optional[dict[str, Type]]:
    """The first ladder model (over the given cardinalities) separating e1 and e2."""
    a, b, goal = _prepare(ctx, e1, e2, goal)
    spent = 0
    for m in ladder_models(judgment_atoms(ctx, goal), sizes):
        closed = _closed_ctx(ctx, m)
        per = evaluation_cost(a, m) + evaluation_cost(b, m)
        spent += prod(cardinality(t) for _, t in closed) * per
        if spent > budget:
            raise BudgetExceeded(f"oracle query exceeds {budget} valuations")
        ev = _Evaluator(m)
        for g in valuations(closed, budget):
            if ev.run(a, g) != ev.run(b, g):
                return m
    return None


def oracle_equiv(
    ctx: Sequence[tuple[str, Type]],
    e1: Term,
    e2: Term,
    max_atom_type_size: int,
    goal: Optional[Type] = None,
    extra_sizes: Iterable[int] = (),
    budget: int = BUDGET,
) -> bool:
    """Semantic equality in every ladder model with atoms of at most the given size."""
    if max_atom_type_size < 1:
        raise ValueError("max_atom_type_size must be at least 1")
    sizes = set(range(max_atom_type_size + 1)) | set(extra_sizes)
    return distinguishing_model(ctx, e1, e2, sizes, goal, budget) is None
