"""Polarized types, focused terms, and the focusing translation.

Focused terms alternate invertible phases (lambda, pairs, unit, sum and
empty eliminations on variables) with focusing phases (let-binding a
negative neutral of positive type, or concluding with a neutral). The
translation from ordinary terms is driven by `PhaseEngine`, which walks the
type of the judgment and rewrites the source terms as it goes; the
saturation module reuses the same engine with a different binding policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

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
    all_names,
    beta_normalize,
    fresh_name,
    free_vars,
    print_term,
    print_type,
    subst,
    subst_many,
)
from .semantics import InternalFault

# ---------------------------------------------------------------------------
# Polarized types


@dataclass(frozen=True)
class NAtom:
    name: str

    def __hash__(self) -> int:
        return hash(("NAtom", self.name))


@dataclass(frozen=True)
class NArrow:
    dom: "PosType"
    cod: "NegType"

    def __hash__(self) -> int:
        return hash(("NArrow", self.dom, self.cod))


@dataclass(frozen=True)
class NProd:
    left: "NegType"
    right: "NegType"

    def __hash__(self) -> int:
        return hash(("NProd", self.left, self.right))


@dataclass(frozen=True)
class NUnit:
    def __hash__(self) -> int:
        return hash("NUnit")


@dataclass(frozen=True)
class ShiftToNeg:
    pos: "PosType"

    def __hash__(self) -> int:
        return hash(("ShiftToNeg", self.pos))


@dataclass(frozen=True)
class PAtom:
    name: str

    def __hash__(self) -> int:
        return hash(("PAtom", self.name))


@dataclass(frozen=True)
class PSum:
    left: "PosType"
    right: "PosType"

    def __hash__(self) -> int:
        return hash(("PSum", self.left, self.right))


@dataclass(frozen=True)
class PEmpty:
    def __hash__(self) -> int:
        return hash("PEmpty")


@dataclass(frozen=True)
class ShiftToPos:
    neg: "NegType"

    def __hash__(self) -> int:
        return hash(("ShiftToPos", self.neg))


NegType = Union[NAtom, NArrow, NProd, NUnit, ShiftToNeg]
PosType = Union[PAtom, PSum, PEmpty, ShiftToPos]
PolType = Union[NegType, PosType]

Polarity = Mapping[str, str]


class FocusError(KernelError):
    pass


def atom_is_positive(name: str, polarity: Optional[Polarity]) -> bool:
    return polarity is None or polarity.get(name, "+") == "+"


def is_positive(t: Type, polarity: Optional[Polarity] = None) -> bool:
    match t:
        case Sum() | Empty():
            return True
        case Atom(name):
            return atom_is_positive(name, polarity)
    return False


def polarize_pos(t: Type, polarity: Optional[Polarity] = None) -> PosType:
    match t:
        case Sum(a, b):
            return PSum(polarize_pos(a, polarity), polarize_pos(b, polarity))
        case Empty():
            return PEmpty()
        case Atom(name) if atom_is_positive(name, polarity):
            return PAtom(name)
    return ShiftToPos(polarize_neg(t, polarity))


def polarize_neg(t: Type, polarity: Optional[Polarity] = None) -> NegType:
    match t:
        case Fun(a, b):
            return NArrow(polarize_pos(a, polarity), polarize_neg(b, polarity))
        case Prod(a, b):
            return NProd(polarize_neg(a, polarity), polarize_neg(b, polarity))
        case Unit():
            return NUnit()
        case Atom(name) if not atom_is_positive(name, polarity):
            return NAtom(name)
    return ShiftToNeg(polarize_pos(t, polarity))


def polarize(t: Type, polarity: Optional[Polarity] = None) -> PolType:
    """Polarize with the fewest shifts, keeping the natural polarity of the head connective."""
    if is_positive(t, polarity):
        return polarize_pos(t, polarity)
    return polarize_neg(t, polarity)


def depolarize(t: PolType) -> Type:
    match t:
        case NAtom(name) | PAtom(name):
            return Atom(name)
        case NArrow(a, b):
            return Fun(depolarize(a), depolarize(b))
        case NProd(a, b):
            return Prod(depolarize(a), depolarize(b))
        case NUnit():
            return Unit()
        case PSum(a, b):
            return Sum(depolarize(a), depolarize(b))
        case PEmpty():
            return Empty()
        case ShiftToNeg(p):
            return depolarize(p)
        case ShiftToPos(n):
            return depolarize(n)
    raise TypeError(t)


def print_poltype(t: PolType) -> str:
    match t:
        case NAtom(name) | PAtom(name):
            return name
        case NUnit():
            return "1"
        case PEmpty():
            return "0"
        case NArrow(a, b):
            return f"{_pol_operand(a)} -> {print_poltype(b)}"
        case NProd(a, b):
            return f"{_pol_operand(a)} * {_pol_operand(b)}"
        case PSum(a, b):
            return f"{_pol_operand(a)} + {_pol_operand(b)}"
        case ShiftToNeg(p):
            return f"⇓{_pol_operand(p)}"
        case ShiftToPos(n):
            return f"⇑{_pol_operand(n)}"
    raise TypeError(t)


def _pol_operand(t: PolType) -> str:
    if isinstance(t, (NArrow, NProd, PSum)):
        return f"({print_poltype(t)})"
    return print_poltype(t)


# ---------------------------------------------------------------------------
# Focused terms


@dataclass(frozen=True)
class FLam:
    binder: str
    dom: PosType
    body: "Invertible"


@dataclass(frozen=True)
class FUnit:
    pass


@dataclass(frozen=True)
class FPair:
    left: "Invertible"
    right: "Invertible"


@dataclass(frozen=True)
class FAbsurd:
    var: str


@dataclass(frozen=True)
class FMatch:
    """Sum elimination on a variable; the branch binders may reuse its name."""

    var: str
    x1: str
    b1: "Invertible"
    x2: str
    b2: "Invertible"


@dataclass(frozen=True)
class FLet:
    binder: str
    neutral: "NegNeutral"
    type: PosType
    body: "Invertible"


@dataclass(frozen=True)
class Binding:
    binder: str
    neutral: "NegNeutral"
    type: PosType


@dataclass(frozen=True)
class FMultiLet:
    """Simultaneous let-binding of a saturation phase.

    `new` lists the variables introduced by the preceding invertible phase.
    """

    bindings: tuple[Binding, ...]
    body: "Invertible"
    new: tuple[str, ...] = ()


@dataclass(frozen=True)
class FConcNeg:
    neutral: "NegNeutral"


@dataclass(frozen=True)
class FConcPos:
    pos: "PosNeutral"


@dataclass(frozen=True)
class FHole:
    """Marks the position of a one-hole focused context."""


@dataclass(frozen=True)
class NVar:
    name: str


@dataclass(frozen=True)
class NApp:
    fn: "NegNeutral"
    arg: "PosNeutral"


@dataclass(frozen=True)
class NProj:
    index: int
    arg: "NegNeutral"


@dataclass(frozen=True)
class PInj:
    index: int
    arg: "PosNeutral"


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PShift:
    body: "Invertible"


Focusing = Union[FLet, FMultiLet, FConcNeg, FConcPos, FHole]
Invertible = Union[FLam, FUnit, FPair, FAbsurd, FMatch, Focusing]
NegNeutral = Union[NVar, NApp, NProj]
PosNeutral = Union[PInj, PVar, PShift]
FocusedTerm = Union[Invertible, NegNeutral, PosNeutral]


def print_focused(a: FocusedTerm) -> str:
    match a:
        case FLam(x, _, body):
            return f"\\{x}. {print_focused(body)}"
        case FUnit():
            return "()"
        case FPair(l, r):
            return f"⟨{print_focused(l)}, {print_focused(r)}⟩"
        case FAbsurd(x):
            return f"absurd {x}"
        case FMatch(x, x1, b1, x2, b2):
            return f"match {x} {{i1 {x1} -> {print_focused(b1)} | i2 {x2} -> {print_focused(b2)}}}"
        case FLet(x, n, _, body):
            return f"let {x} = {print_focused(n)} in {print_focused(body)}"
        case FMultiLet(bs, body, _):
            inner = "; ".join(f"{b.binder} = {print_focused(b.neutral)}" for b in bs)
            return f"let {{{inner}}} in {print_focused(body)}"
        case FConcNeg(n):
            return print_focused(n)
        case FConcPos(p):
            return print_focused(p)
        case FHole():
            return "[]"
        case NVar(x) | PVar(x):
            return x
        case NApp(n, p):
            return f"{print_focused(n)} {_print_pos_arg(p)}"
        case NProj(i, n):
            inner = print_focused(n)
            return f"p{i} {inner if isinstance(n, NVar) else '(' + inner + ')'}"
        case PInj(i, p):
            return f"i{i} {_print_pos_arg(p)}"
        case PShift(body):
            return f"up({print_focused(body)})"
    raise TypeError(a)


def _print_pos_arg(p: PosNeutral) -> str:
    if isinstance(p, PInj):
        return f"({print_focused(p)})"
    return print_focused(p)


# ---------------------------------------------------------------------------
# Defocusing


def defocus(a: FocusedTerm) -> Term:
    """Erase a focused term to an ordinary one, substituting let-bound neutrals."""
    return _defocus(a, {})


def _defocus(a: FocusedTerm, ren: dict[str, str]) -> Term:
    match a:
        case FLam(x, dom, body):
            return Lam(x, _defocus(body, _drop(ren, x)), depolarize(dom))
        case FUnit():
            return UNITV
        case FPair(l, r):
            return Pair(_defocus(l, ren), _defocus(r, ren))
        case FAbsurd(x):
            return Absurd(Var(ren.get(x, x)))
        case FMatch(x, x1, b1, x2, b2):
            scrut = Var(ren.get(x, x))
            # Branch binders that shadow the scrutinee are renamed apart so that
            # the unfocused term does not depend on shadowing.
            y1 = x1 if x1 != x else x1 + "'"
            y2 = x2 if x2 != x else x2 + "'"
            return Match(scrut, y1, _defocus(b1, {**ren, x1: y1}), y2, _defocus(b2, {**ren, x2: y2}))
        case FLet(x, n, _, body):
            return subst(_defocus(body, _drop(ren, x)), x, _defocus(n, ren))
        case FMultiLet(bs, body, _):
            inner = ren
            for b in bs:
                inner = _drop(inner, b.binder)
            return subst_many(_defocus(body, inner), {b.binder: _defocus(b.neutral, ren) for b in bs})
        case FConcNeg(n):
            return _defocus(n, ren)
        case FConcPos(p):
            return _defocus(p, ren)
        case NVar(x) | PVar(x):
            return Var(ren.get(x, x))
        case NApp(n, p):
            return App(_defocus(n, ren), _defocus(p, ren))
        case NProj(i, n):
            return Proj(i, _defocus(n, ren))
        case PInj(i, p):
            return Inj(i, _defocus(p, ren))
        case PShift(body):
            return _defocus(body, ren)
        case FHole():
            raise FocusError("cannot defocus a hole")
    raise TypeError(a)


def _drop(ren: dict[str, str], x: str) -> dict[str, str]:
    if x in ren:
        ren = dict(ren)
        del ren[x]
    return ren


# ---------------------------------------------------------------------------
# Typechecking focused terms


@dataclass(frozen=True)
class FocusedJudgment:
    """An invertible judgment with an empty negative context: Δ ⊢ N."""

    delta: tuple[tuple[str, PosType], ...]
    goal: NegType


def root_judgment(ctx: Sequence[tuple[str, Type]], goal: Type, polarity: Optional[Polarity] = None) -> FocusedJudgment:
    return FocusedJudgment(
        tuple((x, polarize_pos(t, polarity)) for x, t in ctx), polarize_neg(goal, polarity)
    )


# A negative-or-atomic context maps names to negative types or positive atoms.
NegCtx = tuple[tuple[str, Union[NegType, PAtom]], ...]


def _ctx_lookup(g: NegCtx, x: str):
    for name, t in reversed(g):
        if name == x:
            return t
    return None


def _focus_goal(goal: NegType) -> Union[PosType, NAtom]:
    if isinstance(goal, ShiftToNeg):
        return goal.pos
    if isinstance(goal, NAtom):
        return goal
    raise FocusError(f"invertible phase ends at non-shifted goal {print_poltype(goal)}")


class FocusedChecker:
    """Checks the four focused judgments; `saturated` additionally accepts MultiLet."""

    def __init__(self, saturated: bool = False):
        self.saturated = saturated

    def inv(self, g: NegCtx, delta: tuple[tuple[str, PosType], ...], a: Invertible, goal: NegType) -> None:
        match a:
            case FAbsurd(x):
                t = _delta_lookup(delta, x)
                if not isinstance(t, PEmpty):
                    raise FocusError(f"absurd {x}: {x} is not a hypothesis of type 0 in the positive context")
                return
            case FMatch(x, x1, b1, x2, b2):
                t = _delta_lookup(delta, x)
                if not isinstance(t, PSum):
                    raise FocusError(f"match {x}: {x} is not a sum hypothesis of the positive context")
                i = _delta_index(delta, x)
                self.inv(g, delta[:i] + ((x1, t.left),) + delta[i + 1 :], b1, goal)
                self.inv(g, delta[:i] + ((x2, t.right),) + delta[i + 1 :], b2, goal)
                return
            case FLam(x, dom, body):
                if not isinstance(goal, NArrow) or goal.dom != dom:
                    raise FocusError(f"lambda at goal {print_poltype(goal)}")
                self.inv(g, delta + ((x, dom),), body, goal.cod)
                return
            case FPair(l, r):
                if not isinstance(goal, NProd):
                    raise FocusError(f"pair at goal {print_poltype(goal)}")
                self.inv(g, delta, l, goal.left)
                self.inv(g, delta, r, goal.right)
                return
            case FUnit():
                if not isinstance(goal, NUnit):
                    raise FocusError(f"unit at goal {print_poltype(goal)}")
                return
        # Leaving the invertible phase: the positive context must be decomposed.
        g2 = list(g)
        for x, t in delta:
            match t:
                case ShiftToPos(n):
                    g2.append((x, n))
                case PAtom():
                    g2.append((x, t))
                case _:
                    raise FocusError(f"hypothesis {x} : {print_poltype(t)} not decomposed before focusing")
        self.foc(tuple(g2), a, _focus_goal(goal), tuple(x for x, _ in delta))

    def foc(self, g: NegCtx, f: Focusing, goal, new: tuple[str, ...] = ()) -> None:
        match f:
            case FLet(x, n, p, body):
                t = self.neg(g, n)
                if t != ShiftToNeg(p):
                    raise FocusError(f"let {x}: neutral has type {print_poltype(t)}, not ⇓{print_poltype(p)}")
                self.inv(g, ((x, p),), body, _goal_of(goal))
                return
            case FMultiLet(bs, body, _) if self.saturated:
                for b in bs:
                    t = self.neg(g, b.neutral)
                    if t != ShiftToNeg(b.type):
                        raise FocusError(f"let {b.binder}: neutral has type {print_poltype(t)}")
                self.inv(g, tuple((b.binder, b.type) for b in bs), body, _goal_of(goal))
                return
            case FConcPos(p):
                if isinstance(goal, NAtom):
                    raise FocusError("positive conclusion at a negative atom goal")
                self.pos(g, p, goal)
                return
            case FConcNeg(n):
                t = self.neg(g, n)
                if not isinstance(goal, NAtom) or t != goal:
                    raise FocusError(f"negative conclusion of type {print_poltype(t)}")
                return
        raise FocusError(f"not a focusing term: {type(f).__name__}")

    def neg(self, g: NegCtx, n: NegNeutral) -> NegType:
        match n:
            case NVar(x):
                t = _ctx_lookup(g, x)
                if t is None or isinstance(t, PAtom):
                    raise FocusError(f"{x} is not a negative hypothesis")
                return t
            case NApp(fn, arg):
                t = self.neg(g, fn)
                if not isinstance(t, NArrow):
                    raise FocusError(f"application of a neutral of type {print_poltype(t)}")
                self.pos(g, arg, t.dom)
                return t.cod
            case NProj(i, arg):
                t = self.neg(g, arg)
                if not isinstance(t, NProd):
                    raise FocusError(f"projection of a neutral of type {print_poltype(t)}")
                return t.left if i == 1 else t.right
        raise FocusError(f"not a negative neutral: {type(n).__name__}")

    def pos(self, g: NegCtx, p: PosNeutral, goal: PosType) -> None:
        match p:
            case PInj(i, arg):
                if not isinstance(goal, PSum):
                    raise FocusError(f"injection at {print_poltype(goal)}")
                self.pos(g, arg, goal.left if i == 1 else goal.right)
                return
            case PVar(x):
                t = _ctx_lookup(g, x)
                if not isinstance(goal, PAtom) or t != goal:
                    raise FocusError(f"variable {x} used at {print_poltype(goal)}")
                return
            case PShift(body):
                if not isinstance(goal, ShiftToPos):
                    raise FocusError(f"shifted term at {print_poltype(goal)}")
                self.inv(g, (), body, goal.neg)
                return
        raise FocusError(f"not a positive neutral: {type(p).__name__}")


def _goal_of(goal) -> NegType:
    return goal if isinstance(goal, NAtom) else ShiftToNeg(goal)


def _delta_lookup(delta, x):
    for name, t in reversed(delta):
        if name == x:
            return t
    return None


def _delta_index(delta, x) -> int:
    for i in range(len(delta) - 1, -1, -1):
        if delta[i][0] == x:
            return i
    raise FocusError(f"{x} not in context")


def focused_typecheck(
    sort: str,
    term: FocusedTerm,
    goal: PolType,
    gamma: NegCtx = (),
    delta: tuple[tuple[str, PosType], ...] = (),
    saturated: bool = False,
) -> PolType:
    """Check a focused term at one of the judgments 'inv', 'foc', 'neg' or 'pos'.

    Returns the goal on success and raises FocusError otherwise. For 'neg'
    the goal is compared with the synthesized type.
    """
    c = FocusedChecker(saturated)
    match sort:
        case "inv":
            c.inv(gamma, delta, term, goal)
        case "foc":
            c.foc(gamma, term, goal)
        case "neg":
            t = c.neg(gamma, term)
            if goal is not None and t != goal:
                raise FocusError(f"neutral has type {print_poltype(t)}, expected {print_poltype(goal)}")
            return t
        case "pos":
            c.pos(gamma, term, goal)
        case _:
            raise ValueError(f"unknown judgment {sort}")
    return goal


# ---------------------------------------------------------------------------
# The phase engine


def nf(e: Term) -> Term:
    return beta_normalize((), e)


def spine_head(e: Term) -> Optional[str]:
    while True:
        match e:
            case App(f, _):
                e = f
            case Proj(_, a):
                e = a
            case Var(x):
                return x
            case _:
                return None


@dataclass
class Selection:
    """What a focusing point binds: new classes of neutrals and aliases of bound ones."""

    classes: list[tuple[list[Term], Term, Type]] = field(default_factory=list)
    aliases: list[tuple[list[Term], Term]] = field(default_factory=list)


@dataclass(frozen=True)
class BoundNeutral:
    """A neutral bound by an enclosing phase; `value` is what it stands for in the current branch."""

    var: str
    rep: Term
    type: Type
    key: str
    value: Term


class Policy:
    """Decides what a focusing point binds. Subclasses implement `select`."""

    multi = False

    def select(self, engine: "PhaseEngine", gamma, new, bound, goal, sources) -> Selection:
        raise NotImplementedError

    def enter_phase(self, depth: int) -> None:
        pass


class PhaseEngine:
    """Type-directed traversal producing focused terms from ordinary ones.

    Several source terms can be processed at once; they share every binding
    decision and only part ways at conclusions. Source terms must be
    well-typed at the judgment and are kept beta-normal.
    """

    def __init__(self, policy: Policy, polarity: Optional[Polarity] = None, avoid: Iterable[str] = ()):
        self.policy = policy
        self.polarity = polarity
        self.used: set[str] = set(avoid)
        self.trace: list[str] = []
        self.phase_log: list[tuple] = []
        # > 0 while normalizing arguments of neutrals about to be let-bound
        self.payload_depth = 0

    # names

    def fresh(self, base: str = "v") -> str:
        stem = base.rstrip("0123456789'").lstrip("%") or "v"
        x = fresh_name(stem, self.used)
        self.used.add(x)
        return x

    def positive(self, t: Type) -> bool:
        return is_positive(t, self.polarity)

    # entry points

    def run(self, ctx: Sequence[tuple[str, Type]], goal: Type, sources: Sequence[Term]) -> list[Invertible]:
        for s in sources:
            self.used |= all_names(s)
        for x, _ in ctx:
            self.used.add(x)
        srcs = [nf(s) for s in sources]
        return self.inv((), tuple(ctx), (), (), goal, srcs, 0)

    # invertible phase, in the fixed order: absurd, sum eliminations, goal

    def inv(self, gamma, delta, new, bound, goal: Type, sources: list[Term], depth: int) -> list[Invertible]:
        for x, t in delta:
            if isinstance(t, Empty):
                return [FAbsurd(x) for _ in sources]
        for i, (x, t) in enumerate(delta):
            if isinstance(t, Sum):
                branches = []
                names = []
                for k, part in ((1, t.left), (2, t.right)):
                    xk = self.fresh(x)
                    names.append(xk)
                    srcs = [nf(subst(s, x, Inj(k, Var(xk)))) for s in sources]
                    d2 = delta[:i] + ((xk, part),) + delta[i + 1 :]
                    b2 = tuple(
                        BoundNeutral(b.var, b.rep, b.type, b.key, subst(b.value, x, Inj(k, Var(xk))))
                        for b in bound
                    )
                    branches.append(self.inv(gamma, d2, new, b2, goal, srcs, depth))
                return [
                    FMatch(x, names[0], branches[0][j], names[1], branches[1][j]) for j in range(len(sources))
                ]
        if delta:
            gamma = gamma + delta
            new = new + tuple(x for x, _ in delta)
            delta = ()
        match goal:
            case Fun(a, b):
                x = self.fresh("x")
                srcs = [nf(App(s, Var(x))) for s in sources]
                body = self.inv(gamma, ((x, a),), new, bound, b, srcs, depth)
                dom = polarize_pos(a, self.polarity)
                return [FLam(x, dom, o) for o in body]
            case Prod(a, b):
                left = self.inv(gamma, (), new, bound, a, [nf(Proj(1, s)) for s in sources], depth)
                right = self.inv(gamma, (), new, bound, b, [nf(Proj(2, s)) for s in sources], depth)
                return [FPair(l, r) for l, r in zip(left, right)]
            case Unit():
                return [FUnit() for _ in sources]
        return self.focus_point(gamma, new, bound, goal, sources, depth)

    # focusing phase

    def focus_point(self, gamma, new, bound, goal: Type, sources: list[Term], depth: int) -> list[Invertible]:
        while True:
            sel = self.policy.select(self, gamma, new, bound, goal, sources)
            if sel.aliases and not sel.classes:
                sources = [nf(self.replace(s, sel.aliases)) for s in sources]
                continue
            break
        if not sel.classes:
            return self.conclude(gamma, bound, goal, sources)
        self.policy.enter_phase(depth + 1)
        names = [self.fresh("y") for _ in sel.classes]
        repl = list(sel.aliases) + [(members, Var(y)) for (members, _, _), y in zip(sel.classes, names)]
        srcs = [nf(self.replace(s, repl)) for s in sources]
        new_bound = bound + tuple(
            BoundNeutral(y, rep, ty, alpha_key(rep), Var(y)) for (_, rep, ty), y in zip(sel.classes, names)
        )
        self.phase_log.append((gamma, new, tuple((y, ty) for (_, _, ty), y in zip(sel.classes, names))))
        self.payload_depth += 1
        try:
            neutrals = [self.to_neg(gamma, bound, rep) for (_, rep, _) in sel.classes]
        finally:
            self.payload_depth -= 1
        ptypes = [polarize_pos(ty, self.polarity) for (_, _, ty) in sel.classes]
        delta = tuple((y, ty) for y, (_, _, ty) in zip(names, sel.classes))
        body = self.inv(gamma, delta, (), new_bound, goal, srcs, depth + 1)
        if self.policy.multi:
            bs = tuple(Binding(y, n, p) for y, n, p in zip(names, neutrals, ptypes))
            return [FMultiLet(bs, o, tuple(new)) for o in body]
        out = body
        for y, n, p in reversed(list(zip(names, neutrals, ptypes))):
            out = [FLet(y, n, p, o) for o in out]
        return out

    def replace(self, e: Term, repl: list[tuple[list[Term], Term]]) -> Term:
        keys = {}
        for members, v in repl:
            for m in members:
                keys[alpha_key(m)] = (v, free_vars(m))
        return _replace(e, keys, frozenset())

    def conclude(self, gamma, bound, goal: Type, sources: list[Term]) -> list[Invertible]:
        if isinstance(goal, Atom) and not self.positive(goal):
            return [FConcNeg(self.to_neg(gamma, bound, s)) for s in sources]
        return [FConcPos(p) for p in self.pos(gamma, bound, goal, sources)]

    def pos(self, gamma, bound, goal: Type, sources: list[Term]) -> list[PosNeutral]:
        if not self.positive(goal):
            bodies = self.inv(gamma, (), (), bound, goal, sources, 0)
            return [PShift(b) for b in bodies]
        match goal:
            case Sum(a, b):
                for s in sources:
                    if not isinstance(s, Inj):
                        raise InternalFault(f"cannot conclude {print_term(s)} at {print_type(goal)}")
                indices = {s.index for s in sources}
                if len(indices) == 1:
                    (i,) = indices
                    inner = self.pos(gamma, bound, a if i == 1 else b, [s.arg for s in sources])
                    return [PInj(i, p) for p in inner]
                return [
                    PInj(s.index, self.pos(gamma, bound, a if s.index == 1 else b, [s.arg])[0]) for s in sources
                ]
            case Atom():
                out = []
                for s in sources:
                    if not (isinstance(s, Var) and _lookup(gamma, s.name) == goal):
                        raise InternalFault(f"cannot conclude {print_term(s)} at {print_type(goal)}")
                    out.append(PVar(s.name))
                return out
        raise InternalFault(f"cannot conclude at {print_type(goal)}: {', '.join(map(print_term, sources))}")

    def to_neg(self, gamma, bound, e: Term) -> NegNeutral:
        match e:
            case Var(x):
                return NVar(x)
            case Proj(i, a):
                return NProj(i, self.to_neg(gamma, bound, a))
            case App(f, a):
                tf = self.spine_type(gamma, f)
                if not isinstance(tf, Fun):
                    raise InternalFault(f"ill-typed neutral {print_term(e)}")
                return NApp(self.to_neg(gamma, bound, f), self.pos(gamma, bound, tf.dom, [a])[0])
        raise InternalFault(f"not a neutral: {print_term(e)}")

    # neutral analysis

    def spine_type(self, gamma, e: Term) -> Optional[Type]:
        match e:
            case Var(x):
                return _lookup(gamma, x)
            case Proj(i, a):
                t = self.spine_type(gamma, a)
                if isinstance(t, Prod):
                    return t.left if i == 1 else t.right
                return None
            case App(f, _):
                t = self.spine_type(gamma, f)
                if isinstance(t, Fun):
                    return t.cod
                return None
        return None

    def valid_arg(self, gamma, a: Term, t: Type) -> bool:
        """Whether a can already be read as a positive neutral of type t."""
        if not self.positive(t):
            return True
        match t, a:
            case Sum(l, r), Inj(i, b):
                return self.valid_arg(gamma, b, l if i == 1 else r)
            case Atom(), Var(x):
                return _lookup(gamma, x) == t
        return False

    def valid_spine(self, gamma, e: Term) -> bool:
        match e:
            case Var(x):
                return _lookup(gamma, x) is not None
            case Proj(_, a):
                return self.valid_spine(gamma, a)
            case App(f, a):
                tf = self.spine_type(gamma, f)
                return isinstance(tf, Fun) and self.valid_spine(gamma, f) and self.valid_arg(gamma, a, tf.dom)
        return False

    def candidate_spines(self, gamma, e: Term) -> Iterator[tuple[Term, Type]]:
        """Neutral subterms of positive type whose variables all live in gamma."""
        names = {x for x, _ in gamma}
        yield from self._candidates(gamma, names, e, frozenset())

    def _candidates(self, gamma, names, e: Term, local: frozenset) -> Iterator[tuple[Term, Type]]:
        if isinstance(e, (App, Proj)):
            fv = free_vars(e)
            if fv <= names and not (fv & local):
                t = self.spine_type(gamma, e)
                if t is not None and self.positive(t) and self.valid_spine(gamma, e):
                    yield e, t
        match e:
            case Lam(x, body, _):
                yield from self._candidates(gamma, names, body, local | {x})
            case Match(s, x1, b1, x2, b2):
                yield from self._candidates(gamma, names, s, local)
                yield from self._candidates(gamma, names, b1, local | {x1})
                yield from self._candidates(gamma, names, b2, local | {x2})
            case App(a, b) | Pair(a, b):
                yield from self._candidates(gamma, names, a, local)
                yield from self._candidates(gamma, names, b, local)
            case Proj(_, a) | Inj(_, a) | Absurd(a):
                yield from self._candidates(gamma, names, a, local)

    def blocker(self, gamma, e: Term, goal: Type) -> Optional[tuple[Term, Type]]:
        """The neutral that must be bound before e can conclude at goal, if any."""
        if not self.positive(goal) and not isinstance(goal, Atom):
            return None
        match e:
            case Inj(i, a) if isinstance(goal, Sum):
                return self.blocker(gamma, a, goal.left if i == 1 else goal.right)
            case Var(_):
                return None
        return self._head_blocker(gamma, e)

    def _head_blocker(self, gamma, e: Term) -> Optional[tuple[Term, Type]]:
        match e:
            case Match(s, _, _, _, _) | Absurd(s):
                return self._head_blocker(gamma, s)
            case App() | Proj():
                head = e
                while isinstance(head, (App, Proj)):
                    head = head.fn if isinstance(head, App) else head.arg
                if not isinstance(head, Var):
                    return self._head_blocker(gamma, head)
                # innermost invalid argument first
                found = self._arg_blocker(gamma, e)
                if found is not None:
                    return found
                t = self.spine_type(gamma, e)
                if t is not None and self.positive(t):
                    return e, t
                return None
        return None

    def _arg_blocker(self, gamma, e: Term) -> Optional[tuple[Term, Type]]:
        match e:
            case Proj(_, a):
                return self._arg_blocker(gamma, a)
            case App(f, a):
                found = self._arg_blocker(gamma, f)
                if found is not None:
                    return found
                tf = self.spine_type(gamma, f)
                if isinstance(tf, Fun) and not self.valid_arg(gamma, a, tf.dom):
                    return self._pos_blocker(gamma, a, tf.dom)
        return None

    def _pos_blocker(self, gamma, a: Term, t: Type) -> Optional[tuple[Term, Type]]:
        match t, a:
            case Sum(l, r), Inj(i, b):
                return self._pos_blocker(gamma, b, l if i == 1 else r)
        return self._head_blocker(gamma, a)


def _lookup(gamma, x: str):
    for name, t in reversed(gamma):
        if name == x:
            return t
    return None


def _replace(e: Term, keys: dict, local: frozenset) -> Term:
    if isinstance(e, (App, Proj)):
        hit = keys.get(alpha_key(e))
        if hit is not None and not (hit[1] & local):
            return hit[0]
    match e:
        case Lam(x, body, ann):
            return Lam(x, _replace(body, keys, local | {x}), ann)
        case Match(s, x1, b1, x2, b2):
            return Match(
                _replace(s, keys, local), x1, _replace(b1, keys, local | {x1}), x2, _replace(b2, keys, local | {x2})
            )
        case App(a, b):
            return App(_replace(a, keys, local), _replace(b, keys, local))
        case Pair(a, b):
            return Pair(_replace(a, keys, local), _replace(b, keys, local))
        case Proj(i, a):
            return Proj(i, _replace(a, keys, local))
        case Inj(i, a):
            return Inj(i, _replace(a, keys, local))
        case Absurd(a):
            return Absurd(_replace(a, keys, local))
    return e


# ---------------------------------------------------------------------------
# Focusing


class FocusPolicy(Policy):
    """Bind the neutral blocking the first source, one let at a time."""

    def select(self, engine, gamma, new, bound, goal, sources) -> Selection:
        for s in sources:
            found = engine.blocker(gamma, s, goal)
            if found is not None:
                term, ty = found
                return Selection(classes=[([term], term, ty)])
        return Selection()


def focus(
    ctx: Sequence[tuple[str, Type]],
    e: Term,
    goal: Type,
    polarity: Optional[Polarity] = None,
) -> Invertible:
    """Translate a well-typed term into a focused term at the root judgment."""
    from .kernel import elaborate_normal, strip_annotations

    e = strip_annotations(elaborate_normal(ctx, e, goal))
    engine = PhaseEngine(FocusPolicy(), polarity)
    return engine.run(ctx, goal, [e])[0]


def check_root(a: Invertible, ctx, goal: Type, polarity: Optional[Polarity] = None, saturated: bool = False) -> None:
    j = root_judgment(ctx, goal, polarity)
    focused_typecheck("inv", a, j.goal, (), j.delta, saturated)
