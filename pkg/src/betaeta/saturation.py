"""Saturated focused normal forms.

A saturating focusing point binds, all at once, every positive observation
the context makes available: the neutrals of positive type occurring in the
source terms, plus one proof-search witness for each positive subformula
that is deducible but not yet retrievable. Two terms are normalized in a
single joint run so that they make the same choices; their normal forms are
then compared up to reordering of invertible rules and renaming.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .focusing import (
    Binding,
    FAbsurd,
    FConcNeg,
    FConcPos,
    FHole,
    FLam,
    FLet,
    FMatch,
    FMultiLet,
    FocusedTerm,
    FPair,
    FUnit,
    Invertible,
    NApp,
    NProj,
    NVar,
    PInj,
    PolType,
    Policy,
    PosType,
    PShift,
    PSum,
    PEmpty,
    PVar,
    PhaseEngine,
    Polarity,
    Selection,
    defocus,
    depolarize,
    is_positive,
    print_focused,
)
from .kernel import (
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
    alpha_key,
    beta_normalize,
    elaborate_normal,
    strip_annotations,
    fresh_name,
    print_term,
    print_type,
    subst,
)
from .semantics import InternalFault


class SaturationError(KernelError):
    pass


# ---------------------------------------------------------------------------
# Subformulas and retrieval


def positive_subformulas(types: Iterable[Type], polarity: Optional[Polarity] = None) -> list[Type]:
    """Positive subformulas (sums, 0, positive atoms) in first-occurrence order."""
    out: list[Type] = []
    seen: set[Type] = set()

    def walk(t: Type) -> None:
        if is_positive(t, polarity) and t not in seen:
            seen.add(t)
            out.append(t)
        match t:
            case Fun(a, b) | Prod(a, b) | Sum(a, b):
                walk(a)
                walk(b)

    for t in types:
        walk(t)
    return out


def _unpol(t) -> Type:
    if isinstance(t, (Atom, Fun, Prod, Unit, Sum, Empty)):
        return t
    return depolarize(t)


def retrieve(gamma: Sequence[tuple[str, Type]], p: Type, polarity: Optional[Polarity] = None) -> Optional[Term]:
    """A term of type p built from variables of gamma and injections only."""
    match p:
        case Sum(a, b):
            left = retrieve(gamma, a, polarity)
            if left is not None:
                return Inj(1, left)
            right = retrieve(gamma, b, polarity)
            return Inj(2, right) if right is not None else None
        case Empty():
            return None
    for x, t in gamma:
        if t == p:
            return Var(x)
    return None


def strong_retrievable(g: Sequence[tuple[str, Union[Type, PolType]]], p: Union[Type, PosType]) -> Optional[PosNeutralLike]:
    """The first strong positive derivation of p from g, as a positive neutral."""
    gamma = [(x, _unpol(t)) for x, t in g]
    t = _unpol(p)
    term = retrieve(gamma, t)
    if term is None:
        return None
    return _to_pos(term, t)


PosNeutralLike = Union[PInj, PVar, PShift]


def _to_pos(term: Term, t: Type):
    match term, t:
        case Inj(i, a), Sum(l, r):
            return PInj(i, _to_pos(a, l if i == 1 else r))
        case Var(x), Atom():
            return PVar(x)
        case Var(x), _:
            return PShift(_eta_var(x))
    raise InternalFault(f"unexpected retrieval {print_term(term)}")


def _eta_var(x: str):
    # A retrieved negative variable stands for its own eta-expansion; the
    # witness only needs the variable name.
    return FConcNeg(NVar(x))


# ---------------------------------------------------------------------------
# Proof search


class Prover:
    """Focused proof search by saturation over a fixed set of positive subformulas.

    Produces ordinary (annotated, beta-normal) terms. Cycles in the search
    are cut by refusing to revisit a goal under the same set of hypothesis types.
    """

    def __init__(self, subformulas: Sequence[Type], polarity: Optional[Polarity] = None, fresh=None):
        self.subformulas = list(subformulas)
        self.polarity = polarity
        self.in_progress: set = set()
        if fresh is None:
            used: set[str] = set()

            def fresh(base: str = "w") -> str:
                x = fresh_name(base, used)
                used.add(x)
                return x

        self.fresh = fresh

    def positive(self, t: Type) -> bool:
        return is_positive(t, self.polarity)

    def prove_pos(self, gamma, t: Type) -> Optional[Term]:
        match t:
            case Sum(a, b):
                left = self.prove_pos(gamma, a)
                if left is not None:
                    return Inj(1, left)
                right = self.prove_pos(gamma, b)
                return Inj(2, right) if right is not None else None
            case Empty():
                return None
            case Atom() if self.positive(t):
                return retrieve(gamma, t, self.polarity)
        return self.prove_neg(gamma, t)

    def prove(self, gamma, t: Type) -> Optional[Term]:
        """Full provability of t, positive goals included."""
        if self.positive(t):
            r = self._inv(tuple(gamma), (), t)
            return None if r is None else beta_normalize((), r)
        return self.prove_neg(gamma, t)

    def prove_neg(self, gamma, t: Type) -> Optional[Term]:
        key = (frozenset(ty for _, ty in gamma), t)
        if key in self.in_progress:
            return None
        self.in_progress.add(key)
        try:
            r = self._inv(tuple(gamma), (), t)
        finally:
            self.in_progress.discard(key)
        return None if r is None else beta_normalize((), r)

    def _inv(self, gamma, delta, goal: Type) -> Optional[Term]:
        for x, t in delta:
            if isinstance(t, Empty):
                return Absurd(Var(x))
        for i, (x, t) in enumerate(delta):
            if isinstance(t, Sum):
                arms = []
                for part in (t.left, t.right):
                    xk = self.fresh("w")
                    r = self._inv(gamma, delta[:i] + ((xk, part),) + delta[i + 1 :], goal)
                    if r is None:
                        return None
                    arms.append((xk, r))
                return Match(Var(x), arms[0][0], arms[0][1], arms[1][0], arms[1][1])
        gamma = gamma + delta
        match goal:
            case Fun(a, b):
                x = self.fresh("w")
                body = self._inv(gamma, ((x, a),), b)
                return None if body is None else Lam(x, body, a)
            case Prod(a, b):
                left = self._inv(gamma, (), a)
                if left is None:
                    return None
                right = self._inv(gamma, (), b)
                return None if right is None else Pair(left, right)
            case Unit():
                return UNITV
        return self._focus(gamma, goal)

    def _focus(self, gamma, goal: Type) -> Optional[Term]:
        for q in self.subformulas:
            if retrieve(gamma, q, self.polarity) is not None:
                continue
            w = self.deducible(gamma, q)
            if w is None:
                continue
            y = self.fresh("w")
            body = self._inv(gamma, ((y, q),), goal)
            return None if body is None else subst(body, y, w)
        if self.positive(goal):
            return self._conclude(gamma, goal)
        return self.deducible(gamma, goal)

    def _conclude(self, gamma, t: Type) -> Optional[Term]:
        match t:
            case Sum(a, b):
                left = self._conclude(gamma, a)
                if left is not None:
                    return Inj(1, left)
                right = self._conclude(gamma, b)
                return Inj(2, right) if right is not None else None
            case Empty():
                return None
            case Atom() if self.positive(t):
                return retrieve(gamma, t, self.polarity)
        return self.prove_neg(gamma, t)

    def deducible(self, gamma, p: Type) -> Optional[Term]:
        """A variable-headed neutral of type p, found by iterative deepening on spine length."""
        heads = [(x, t) for x, t in gamma if not self.positive(t)]
        if not heads:
            return None
        bound = max(_spine_depth(t) for _, t in heads)
        for depth in range(1, bound + 1):
            for x, t in heads:
                r = self._spine(gamma, Var(x), t, p, depth)
                if r is not None:
                    return r
        return None

    def _spine(self, gamma, head: Term, t: Type, p: Type, depth: int) -> Optional[Term]:
        if depth == 0:
            return head if t == p else None
        match t:
            case Prod(a, b):
                r = self._spine(gamma, Proj(1, head), a, p, depth - 1)
                if r is not None:
                    return r
                return self._spine(gamma, Proj(2, head), b, p, depth - 1)
            case Fun(a, b):
                if not _reaches(b, p, depth - 1, self.positive):
                    return None
                arg = self.prove_pos(gamma, a)
                if arg is None:
                    return None
                return self._spine(gamma, App(head, arg), b, p, depth - 1)
        return None


def _spine_depth(t: Type) -> int:
    match t:
        case Fun(_, b):
            return 1 + _spine_depth(b)
        case Prod(a, b):
            return 1 + max(_spine_depth(a), _spine_depth(b))
    return 0


def _reaches(t: Type, p: Type, depth: int, positive) -> bool:
    if depth == 0:
        return t == p
    match t:
        case Prod(a, b):
            return _reaches(a, p, depth - 1, positive) or _reaches(b, p, depth - 1, positive)
        case Fun(_, b):
            return _reaches(b, p, depth - 1, positive)
    return False


def _ctx_types(g) -> list[tuple[str, Type]]:
    return [(x, _unpol(t)) for x, t in g]


def provable(g: Sequence[tuple[str, Union[Type, PolType]]], p: Union[Type, PolType]) -> bool:
    """Whether p is provable from g (a context of negative types and atoms)."""
    gamma = _ctx_types(g)
    t = _unpol(p)
    prover = Prover(positive_subformulas([t] + [ty for _, ty in gamma]))
    return prover.prove(gamma, t) is not None


def consistent(g: Sequence[tuple[str, Union[Type, PolType]]]) -> bool:
    return not provable(g, Empty())


# ---------------------------------------------------------------------------
# Saturated contexts


def saturation_violations(gamma, subformulas, polarity=None) -> list[Type]:
    """Subformulas deducible by a neutral from gamma but not retrievable."""
    prover = Prover(subformulas, polarity)
    out = []
    for q in subformulas:
        if retrieve(gamma, q, polarity) is None and prover.deducible(gamma, q) is not None:
            out.append(q)
    return out


def is_saturated(gamma, subformulas, polarity=None) -> bool:
    return not saturation_violations(gamma, subformulas, polarity)


# ---------------------------------------------------------------------------
# The saturating policy


@dataclass
class PhaseRecord:
    old: tuple[tuple[str, Type], ...]
    new: tuple[str, ...]
    selected: tuple[tuple[str, Type], ...]
    retrievable: tuple[Type, ...]


class SaturationPolicy(Policy):
    """Bind every new class of positive neutral, plus completion witnesses."""

    multi = True

    def __init__(self, subformulas: Sequence[Type], guard: int, polarity: Optional[Polarity] = None):
        self.subformulas = list(subformulas)
        self.guard = guard
        self.polarity = polarity
        self.prover: Optional[Prover] = None
        self.phases: list[PhaseRecord] = []
        self.final_contexts: list[tuple[tuple[str, Type], ...]] = []
        self.trace: Optional[list[str]] = None

    def enter_phase(self, depth: int) -> None:
        if depth > self.guard:
            raise InternalFault(f"saturation exceeded {self.guard} nested phases")

    def select(self, engine: PhaseEngine, gamma, new, bound, goal, sources) -> Selection:
        if self.prover is None:
            self.prover = Prover(self.subformulas, self.polarity, engine.fresh)
        pool: list[tuple[Term, Type]] = []
        seen: set[str] = set()
        for s in sources:
            for term, ty in engine.candidate_spines(gamma, s):
                k = alpha_key(term)
                if k not in seen:
                    seen.add(k)
                    pool.append((term, ty))
        sel = Selection()
        alias_of: dict[str, list[Term]] = {}
        for term, ty in pool:
            hit = None
            for b in bound:
                if b.type == ty and neutral_equiv(engine, gamma, bound, term, b.rep):
                    hit = b
                    break
            if hit is not None:
                alias_of.setdefault(hit.var, (hit.value, []))[1].append(term)
                continue
            for members, rep, cty in sel.classes:
                if cty == ty and neutral_equiv(engine, gamma, bound, term, rep):
                    members.append(term)
                    break
            else:
                sel.classes.append(([term], term, ty))
        sel.aliases = [(members, value) for value, members in alias_of.values()]
        covered = {ty for _, _, ty in sel.classes}
        old = [(x, t) for x, t in gamma if x not in new]
        for q in self.subformulas:
            if q in covered or retrieve(gamma, q, self.polarity) is not None:
                continue
            # witnesses must use a variable introduced by the last invertible phase
            if self.prover.deducible(old, q) is not None:
                continue
            w = self.prover.deducible(gamma, q)
            if w is not None:
                sel.classes.append(([w], w, q))
                covered.add(q)
        if sel.classes:
            self._record(gamma, new, sel, engine)
        elif not sel.aliases and engine.payload_depth == 0:
            self.final_contexts.append(tuple(gamma))
        return sel

    def _record(self, gamma, new, sel: Selection, engine: PhaseEngine) -> None:
        retr = tuple(q for q in self.subformulas if retrieve(gamma, q, self.polarity) is not None)
        rec = PhaseRecord(
            tuple(gamma), tuple(new), tuple((print_term(rep), ty) for _, rep, ty in sel.classes), retr
        )
        self.phases.append(rec)
        if self.trace is not None:
            old = ", ".join(f"{x} : {print_type(t)}" for x, t in gamma if x not in new)
            nw = ", ".join(f"{x} : {print_type(t)}" for x, t in gamma if x in new)
            chosen = ", ".join(f"{n} : {print_type(t)}" for n, t in rec.selected)
            rt = ", ".join(print_type(t) for t in retr)
            self.trace.append(f"PHASE old=[{old}] new=[{nw}] select=[{chosen}] retrievable=[{rt}]")


def neutral_equiv(engine: PhaseEngine, gamma, bound, a: Term, b: Term) -> bool:
    """Whether two positive neutrals of the same type are equal observations.

    Spines must coincide; positive arguments are compared syntactically and
    negative (thunked) arguments by jointly normalizing them.
    """
    match a, b:
        case Var(x), Var(y):
            return x == y
        case Proj(i, a1), Proj(j, b1):
            return i == j and neutral_equiv(engine, gamma, bound, a1, b1)
        case App(f, x), App(g, y):
            if not neutral_equiv(engine, gamma, bound, f, g):
                return False
            tf = engine.spine_type(gamma, f)
            return isinstance(tf, Fun) and _arg_equiv(engine, gamma, bound, tf.dom, x, y)
    return False


def _arg_equiv(engine: PhaseEngine, gamma, bound, t: Type, x: Term, y: Term) -> bool:
    if alpha_key(x) == alpha_key(y):
        return True
    if engine.positive(t):
        match t, x, y:
            case Sum(l, r), Inj(i, x1), Inj(j, y1):
                return i == j and _arg_equiv(engine, gamma, bound, l if i == 1 else r, x1, y1)
        return False
    engine.payload_depth += 1
    try:
        outs = engine.inv(gamma, (), (), bound, t, [x, y], 0)
    finally:
        engine.payload_depth -= 1
    return alpha_normal(outs[0]) == alpha_normal(outs[1])


# ---------------------------------------------------------------------------
# Entry points


@dataclass
class SaturationResult:
    terms: list[Invertible]
    phases: list[PhaseRecord]
    final_contexts: list[tuple[tuple[str, Type], ...]]
    subformulas: list[Type]
    trace: list[str] = field(default_factory=list)


def _guard(ctx, goal, sources, subformulas) -> int:
    # Each phase binds either a completion witness (at most one per
    # subformula) or a neutral occurring in a source.
    occurrences = sum(_count_spines(s) for s in sources)
    return 2 * (len(subformulas) + occurrences) + 2


def _count_spines(e: Term) -> int:
    match e:
        case App(a, b):
            return 1 + _count_spines(a) + _count_spines(b)
        case Proj(_, a):
            return 1 + _count_spines(a)
        case Pair(a, b):
            return _count_spines(a) + _count_spines(b)
        case Lam(_, a, _) | Inj(_, a) | Absurd(a):
            return _count_spines(a)
        case Match(s, _, b1, _, b2):
            return _count_spines(s) + _count_spines(b1) + _count_spines(b2)
    return 0


def saturate_terms(
    ctx: Sequence[tuple[str, Type]],
    goal: Type,
    sources: Sequence[Union[Term, FocusedTerm]],
    trace: bool = False,
) -> SaturationResult:
    """Jointly saturate one or more terms of the same judgment."""
    ctx = list(ctx)
    terms = []
    for s in sources:
        if not isinstance(s, (Var, Lam, App, Pair, Proj, Inj, Match, Absurd)) and type(s).__name__ != "UnitVal":
            s = defocus(s)
        terms.append(strip_annotations(elaborate_normal(ctx, s, goal)))
    subformulas = positive_subformulas([goal] + [t for _, t in ctx])
    policy = SaturationPolicy(subformulas, _guard(ctx, goal, terms, subformulas))
    if trace:
        policy.trace = []
    engine = PhaseEngine(policy)
    outs = engine.run(ctx, goal, terms)
    return SaturationResult(outs, policy.phases, policy.final_contexts, subformulas, policy.trace or [])


def saturate(ctx: Sequence[tuple[str, Type]], goal: Type, a: Union[Term, FocusedTerm]) -> Invertible:
    """The saturated normal form of a single term (its own selection)."""
    return saturate_terms(ctx, goal, [a]).terms[0]


def saturate_pair(ctx, goal: Type, a, b, trace: bool = False) -> SaturationResult:
    """Saturate two terms with the merged selection."""
    return saturate_terms(ctx, goal, [a, b], trace)


# ---------------------------------------------------------------------------
# Invertible commuting conversions


def icc_canon(a: Invertible, delta: Sequence[tuple[str, PosType]] = ()) -> Invertible:
    """Reorder every invertible phase of a into the canonical order.

    The order is: absurd on the leftmost empty hypothesis, then matches on
    positive hypotheses left to right, then goal introductions.
    """
    return _canon_inv(a, tuple(delta))


def _canon_inv(a: Invertible, delta) -> Invertible:
    for x, t in delta:
        if isinstance(t, PEmpty):
            return FAbsurd(x)
    for i, (x, t) in enumerate(delta):
        if isinstance(t, PSum):
            branches = []
            names = []
            for k, part in ((1, t.left), (2, t.right)):
                xk = _fresh_for(a, x, k)
                names.append(xk)
                sub = _split(a, x, k, xk)
                branches.append(_canon_inv(sub, delta[:i] + ((xk, part),) + delta[i + 1 :]))
            return FMatch(x, names[0], branches[0], names[1], branches[1])
    match a:
        case FLam(y, dom, body):
            return FLam(y, dom, _canon_inv(body, ((y, dom),)))
        case FPair(l, r):
            return FPair(_canon_inv(l, ()), _canon_inv(r, ()))
        case FUnit() | FAbsurd() | FHole():
            return a
        case FMatch(x, x1, b1, x2, b2):
            # a match on a variable outside the positive context: keep it
            return FMatch(x, x1, _canon_inv(b1, ()), x2, _canon_inv(b2, ()))
    return _canon_foc(a)


def _canon_foc(f) -> Invertible:
    match f:
        case FLet(x, n, p, body):
            return FLet(x, _canon_neg(n), p, _canon_inv(body, ((x, p),)))
        case FMultiLet(bs, body, new):
            bs2 = tuple(Binding(b.binder, _canon_neg(b.neutral), b.type) for b in bs)
            return FMultiLet(bs2, _canon_inv(body, tuple((b.binder, b.type) for b in bs)), new)
        case FConcPos(p):
            return FConcPos(_canon_pos(p))
        case FConcNeg(n):
            return FConcNeg(_canon_neg(n))
    return f


def _canon_neg(n):
    match n:
        case NApp(fn, arg):
            return NApp(_canon_neg(fn), _canon_pos(arg))
        case NProj(i, arg):
            return NProj(i, _canon_neg(arg))
    return n


def _canon_pos(p):
    match p:
        case PInj(i, arg):
            return PInj(i, _canon_pos(arg))
        case PShift(body):
            return PShift(_canon_inv(body, ()))
    return p


def _fresh_for(a, x: str, k: int) -> str:
    names = _focused_names(a)
    return fresh_name(f"{x}_{k}", names | {x})


def _focused_names(a) -> set[str]:
    out: set[str] = set()

    def walk(t) -> None:
        if isinstance(t, str):
            out.add(t)
            return
        if isinstance(t, tuple):
            for c in t:
                walk(c)
            return
        if hasattr(t, "__dataclass_fields__"):
            for name in t.__dataclass_fields__:
                walk(getattr(t, name))

    walk(a)
    return out


def _split(a: Invertible, x: str, k: int, xk: str) -> Invertible:
    """Select branch k of every match on x inside the invertible phase of a."""
    match a:
        case FMatch(y, y1, b1, y2, b2) if y == x:
            body, binder = (b1, y1) if k == 1 else (b2, y2)
            return rename(body, {binder: xk})
        case FMatch(y, y1, b1, y2, b2):
            return FMatch(
                y, y1, b1 if y1 == x else _split(b1, x, k, xk), y2, b2 if y2 == x else _split(b2, x, k, xk)
            )
        case FLam(y, dom, body):
            return a if y == x else FLam(y, dom, _split(body, x, k, xk))
        case FPair(l, r):
            return FPair(_split(l, x, k, xk), _split(r, x, k, xk))
    return a


def rename(a, ren: dict[str, str]):
    """Rename free variables of a focused term (the new names must be fresh)."""
    if not ren:
        return a
    match a:
        case FLam(y, dom, body):
            return FLam(y, dom, rename(body, _without(ren, y)))
        case FPair(l, r):
            return FPair(rename(l, ren), rename(r, ren))
        case FUnit() | FHole():
            return a
        case FAbsurd(y):
            return FAbsurd(ren.get(y, y))
        case FMatch(y, y1, b1, y2, b2):
            return FMatch(ren.get(y, y), y1, rename(b1, _without(ren, y1)), y2, rename(b2, _without(ren, y2)))
        case FLet(y, n, p, body):
            return FLet(y, rename(n, ren), p, rename(body, _without(ren, y)))
        case FMultiLet(bs, body, new):
            inner = ren
            for b in bs:
                inner = _without(inner, b.binder)
            bs2 = tuple(Binding(b.binder, rename(b.neutral, ren), b.type) for b in bs)
            return FMultiLet(bs2, rename(body, inner), tuple(ren.get(v, v) for v in new))
        case FConcPos(p):
            return FConcPos(rename(p, ren))
        case FConcNeg(n):
            return FConcNeg(rename(n, ren))
        case NVar(y):
            return NVar(ren.get(y, y))
        case PVar(y):
            return PVar(ren.get(y, y))
        case NApp(fn, arg):
            return NApp(rename(fn, ren), rename(arg, ren))
        case NProj(i, arg):
            return NProj(i, rename(arg, ren))
        case PInj(i, arg):
            return PInj(i, rename(arg, ren))
        case PShift(body):
            return PShift(rename(body, ren))
    raise TypeError(a)


def _without(ren: dict[str, str], y: str) -> dict[str, str]:
    if y in ren:
        ren = dict(ren)
        del ren[y]
    return ren


# ---------------------------------------------------------------------------
# Alpha-normalization and comparison


def alpha_normal(a, prefix: str = "%c"):
    """Rename bound variables canonically and sort simultaneous bindings.

    Free variables are left alone; bound ones become `%c0`, `%c1`, ... in
    order of binding.
    """
    return _AlphaNormalizer(prefix).run(a, {})


class _AlphaNormalizer:
    def __init__(self, prefix: str = "%c") -> None:
        self.n = 0
        self.prefix = prefix

    def bind(self, env: dict[str, str], x: str) -> tuple[str, dict[str, str]]:
        name = f"{self.prefix}{self.n}"
        self.n += 1
        return name, {**env, x: name}

    def run(self, a, env: dict[str, str]):
        match a:
            case FLam(y, dom, body):
                y2, env2 = self.bind(env, y)
                return FLam(y2, dom, self.run(body, env2))
            case FPair(l, r):
                return FPair(self.run(l, env), self.run(r, env))
            case FUnit() | FHole():
                return a
            case FAbsurd(y):
                return FAbsurd(env.get(y, y))
            case FMatch(y, y1, b1, y2, b2):
                scrut = env.get(y, y)
                z1, e1 = self.bind(env, y1)
                left = self.run(b1, e1)
                z2, e2 = self.bind(env, y2)
                return FMatch(scrut, z1, left, z2, self.run(b2, e2))
            case FLet(y, n, p, body):
                n2 = self.run(n, env)
                z, env2 = self.bind(env, y)
                return FLet(z, n2, p, self.run(body, env2))
            case FMultiLet(bs, body, _):
                # Neutrals of the same phase cannot mention each other, so they
                # can be normalized and ordered before naming their binders.
                normed = sorted(
                    (print_focused(_AlphaNormalizer(self.prefix + "'").run(b.neutral, env)), i) for i, b in enumerate(bs)
                )
                bs2 = []
                env2 = dict(env)
                for _, i in normed:
                    b = bs[i]
                    n2 = self.run(b.neutral, env)
                    z, env2 = self.bind(env2, b.binder)
                    bs2.append(Binding(z, n2, b.type))
                return FMultiLet(tuple(bs2), self.run(body, env2), ())
            case FConcPos(p):
                return FConcPos(self.run(p, env))
            case FConcNeg(n):
                return FConcNeg(self.run(n, env))
            case NVar(y):
                return NVar(env.get(y, y))
            case PVar(y):
                return PVar(env.get(y, y))
            case NApp(fn, arg):
                return NApp(self.run(fn, env), self.run(arg, env))
            case NProj(i, arg):
                return NProj(i, self.run(arg, env))
            case PInj(i, arg):
                return PInj(i, self.run(arg, env))
            case PShift(body):
                return PShift(self.run(body, env))
        raise TypeError(a)


def sat_equal(a: Invertible, b: Invertible, delta: Sequence[tuple[str, PosType]] = ()) -> bool:
    """Equality of saturated terms up to invertible reordering, renaming and binding order."""
    return _canonical(a, delta) == _canonical(b, delta)


def _canonical(a, delta):
    return alpha_normal(icc_canon(a, delta))
