"""Counterexamples for inequivalent saturated terms.

Two saturated terms that are not equal are walked jointly down to the first
place where they differ. The walk records a shared one-hole context, the
equations that hold at the hole, and the two differing positive neutrals.
A finite model that counts the atomic variables at the hole, plus values
for the context variables that satisfy the equations, turns that
difference into two distinct booleans.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

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
    FocusedChecker,
    FocusPolicy,
    PhaseEngine,
    FocusedJudgment,
    FPair,
    FUnit,
    Invertible,
    NApp,
    NArrow,
    NegNeutral,
    NegType,
    NProd,
    NProj,
    NVar,
    PAtom,
    PEmpty,
    PInj,
    PolType,
    PosNeutral,
    PosType,
    PShift,
    PSum,
    PVar,
    ShiftToNeg,
    ShiftToPos,
    defocus,
    depolarize,
    focused_typecheck,
    polarize_pos,
    print_focused,
    root_judgment,
)
from .funless import dataty, defun_term, refun_term, reify
from .kernel import (
    UNIT,
    UNITV,
    Absurd,
    Annot,
    App,
    Empty,
    Fun,
    Hole,
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
    beta_normalize,
    elaborate_normal,
    fresh_name,
    parse_term,
    parse_type,
    plug,
    print_term,
    print_type,
    strip_annotations,
    subst_many,
    type_atoms,
    type_size,
)
from .saturation import alpha_normal, icc_canon, rename, sat_equal, saturate_pair
from .semantics import (
    STAR,
    InternalFault,
    Model,
    SemValue,
    VFun,
    VPair,
    VTag,
    _Evaluator,
    apply_model,
    cardinality,
    enumerate_values,
    eval_term,
    fin,
    fin_code,
    print_value,
)

BOOL = Sum(UNIT, UNIT)


class CanonicityError(KernelError):
    """The inputs are outside the fragment where witnesses are built."""


# ---------------------------------------------------------------------------
# Constraints


@dataclass(frozen=True)
class InjEq:
    """`var` was matched and is known to be `i<index> component`."""

    var: str
    index: int
    component: str


@dataclass(frozen=True)
class LetEq:
    """`var` was bound to the value of a negative neutral."""

    var: str
    neutral: NegNeutral


Equation = Union[InjEq, LetEq]


@dataclass
class ConstraintEnv:
    equations: list[Equation]
    gamma: list[tuple[str, PosType]]

    def validate(self) -> None:
        types = dict(self.gamma)
        injs: dict[str, tuple[int, str]] = {}
        lets: dict = {}
        for i, eq in enumerate(self.equations):
            match eq:
                case InjEq(x, k, comp):
                    if injs.get(x, (k, comp)) != (k, comp):
                        raise InternalFault(f"conflicting injections recorded for {x}")
                    injs[x] = (k, comp)
                    if not isinstance(types.get(x), PSum):
                        raise InternalFault(f"{x} is matched but is not a sum")
                case LetEq(x, n):
                    key = print_focused(alpha_normal(n, "%s"))
                    if lets.get(key, x) != x:
                        raise InternalFault(f"{lets[key]} and {x} bind the same neutral")
                    lets[key] = x
                    g = _neg_ctx(self.gamma[: self._index(x)])
                    if FocusedChecker(saturated=True).neg(g, n) != ShiftToNeg(types[x]):
                        raise InternalFault(f"ill-typed binding for {x}")

    def _index(self, x: str) -> int:
        for i, (y, _) in enumerate(self.gamma):
            if y == x:
                return i
        raise InternalFault(f"{x} is not bound")


def _neg_ctx(gamma: Sequence[tuple[str, PosType]]):
    out = []
    for x, t in gamma:
        match t:
            case ShiftToPos(n):
                out.append((x, n))
            case PAtom():
                out.append((x, t))
    return tuple(out)


# ---------------------------------------------------------------------------
# Decomposition


@dataclass(frozen=True)
class Step:
    """One move of the joint walk: lam, proj, match, let, inj or shift."""

    kind: str
    var: str = ""
    index: int = 0


@dataclass
class Decomposition:
    context: Invertible
    env: ConstraintEnv
    sources: tuple[PosNeutral, PosNeutral]
    type: PosType
    steps: tuple[Step, ...]
    judgment: FocusedJudgment
    left: Invertible
    right: Invertible

    @property
    def gamma(self) -> list[tuple[str, PosType]]:
        """The context at the hole: every bound variable except decomposed sums."""
        matched = {eq.var for eq in self.env.equations if isinstance(eq, InjEq)}
        return [(x, t) for x, t in self.env.gamma if x not in matched]


def _same(a, b) -> bool:
    return alpha_normal(a, "%s") == alpha_normal(b, "%s")


class _Walk:
    def __init__(self, judgment: FocusedJudgment):
        self.gamma: list[tuple[str, PosType]] = list(judgment.delta)
        self.eqs: list[Equation] = []
        self.steps: list[Step] = []
        self.sources: Optional[tuple] = None
        self.type: Optional[PosType] = None

    def lookup(self, x: str) -> PosType:
        for y, t in reversed(self.gamma):
            if y == x:
                return t
        raise InternalFault(f"{x} is not bound")

    def inv(self, a: Invertible, b: Invertible, goal: NegType) -> Invertible:
        match a, b:
            case FLam(x, dom, body), FLam(y, _, body2):
                self.gamma.append((x, dom))
                self.steps.append(Step("lam", x))
                return FLam(x, dom, self.inv(body, _rename(body2, y, x), goal.cod))
            case FPair(l1, r1), FPair(l2, r2):
                if not _same(l1, l2):
                    self.steps.append(Step("proj", index=1))
                    return FPair(self.inv(l1, l2, goal.left), r1)
                if not _same(r1, r2):
                    self.steps.append(Step("proj", index=2))
                    return FPair(l1, self.inv(r1, r2, goal.right))
                raise InternalFault("pair components agree")
            case FMatch(x, x1, a1, x2, a2), FMatch(y, y1, c1, y2, c2) if x == y:
                t = self.lookup(x)
                c1, c2 = _rename(c1, y1, x1), _rename(c2, y2, x2)
                if not _same(a1, c1):
                    k, comp, part = 1, x1, t.left
                elif not _same(a2, c2):
                    k, comp, part = 2, x2, t.right
                else:
                    raise InternalFault(f"both branches of the match on {x} agree")
                self.gamma.append((comp, part))
                self.eqs.append(InjEq(x, k, comp))
                self.steps.append(Step("match", x, k))
                if k == 1:
                    return FMatch(x, x1, self.inv(a1, c1, goal), x2, a2)
                return FMatch(x, x1, a1, x2, self.inv(a2, c2, goal))
            case FMultiLet(bs1, body1, new), FMultiLet(bs2, body2, _):
                if len(bs1) != len(bs2):
                    raise InternalFault("saturated terms bind different neutrals")
                for p, q in zip(bs1, bs2):
                    if p.type != q.type or not _same(p.neutral, q.neutral):
                        raise InternalFault("saturated terms bind different neutrals")
                    body2 = _rename(body2, q.binder, p.binder)
                self.let(bs1)
                return FMultiLet(bs1, self.inv(body1, body2, goal), new)
            case FLet(x, n, p, body1), FLet(y, n2, p2, body2):
                if p != p2 or not _same(n, n2):
                    raise InternalFault("focused terms bind different neutrals")
                self.let((Binding(x, n, p),))
                return FLet(x, n, p, self.inv(body1, _rename(body2, y, x), goal))
            case FConcPos(p), FConcPos(q):
                return FConcPos(self.pos(p, q, goal.pos))
            case FConcNeg(_), FConcNeg(_):
                raise CanonicityError("witnesses are only built for positive atoms")
        raise InternalFault(f"no difference found between {print_focused(a)} and {print_focused(b)}")

    def let(self, bs) -> None:
        for bnd in bs:
            self.gamma.append((bnd.binder, bnd.type))
            self.eqs.append(LetEq(bnd.binder, bnd.neutral))
        self.steps.append(Step("let", ",".join(bnd.binder for bnd in bs)))

    def pos(self, p: PosNeutral, q: PosNeutral, t: PosType):
        match p, q:
            case PInj(i, p1), PInj(j, q1) if i == j:
                self.steps.append(Step("inj", index=i))
                return PInj(i, self.pos(p1, q1, t.left if i == 1 else t.right))
            case PShift(s1), PShift(s2):
                self.steps.append(Step("shift"))
                return PShift(self.inv(s1, s2, t.neg))
            case PInj(), PInj():
                pass
            case PVar(x), PVar(y) if x != y:
                pass
            case _:
                raise InternalFault(f"no difference between {print_focused(p)} and {print_focused(q)}")
        self.sources = (p, q)
        self.type = t
        return FHole()


def _rename(a, old: str, new: str):
    return a if old == new else rename(a, {old: new})


def decompose(a: Invertible, b: Invertible, judgment: FocusedJudgment) -> Decomposition:
    """Walk two saturated terms of the same judgment to their first difference."""
    ca = alpha_normal(icc_canon(a, judgment.delta))
    cb = alpha_normal(icc_canon(b, judgment.delta))
    w = _Walk(judgment)
    context = w.inv(ca, cb, judgment.goal)
    if w.sources is None:
        raise InternalFault("no source of inequality")
    env = ConstraintEnv(w.eqs, w.gamma)
    env.validate()
    return Decomposition(context, env, w.sources, w.type, tuple(w.steps), judgment, ca, cb)


def plug_focused(ctx, p: PosNeutral):
    """Replace the hole of a focused one-hole context."""
    match ctx:
        case FHole():
            return p
        case FLam(x, dom, body):
            return FLam(x, dom, plug_focused(body, p))
        case FPair(l, r):
            return FPair(plug_focused(l, p), plug_focused(r, p))
        case FMatch(x, x1, b1, x2, b2):
            return FMatch(x, x1, plug_focused(b1, p), x2, plug_focused(b2, p))
        case FLet(x, n, t, body):
            return FLet(x, n, t, plug_focused(body, p))
        case FMultiLet(bs, body, new):
            return FMultiLet(bs, plug_focused(body, p), new)
        case FConcPos(q):
            return FConcPos(plug_focused(q, p))
        case PInj(i, q):
            return PInj(i, plug_focused(q, p))
        case PShift(body):
            return PShift(plug_focused(body, p))
    return ctx


# ---------------------------------------------------------------------------
# The neutral model


def neutral_model(d: Decomposition, atoms: Sequence[str] = ()) -> dict[str, Type]:
    """Interpret each atom by a ladder with one element per atomic variable at the hole."""
    counts = {x: 0 for x in atoms}
    for x in _judgment_atoms(d.judgment):
        counts.setdefault(x, 0)
    for _, t in d.gamma:
        if isinstance(t, PAtom):
            counts[t.name] = counts.get(t.name, 0) + 1
    return {x: fin(n) for x, n in sorted(counts.items())}


def _judgment_atoms(j: FocusedJudgment) -> set[str]:
    out = type_atoms(depolarize(j.goal))
    for _, t in j.delta:
        out |= type_atoms(depolarize(t))
    return out


def _ladder_size(m: Model, atom: str) -> int:
    t = m[atom]
    n = cardinality(t)
    if t != fin(n):
        raise CanonicityError(f"model value for {atom} is not a ladder type")
    return n


# ---------------------------------------------------------------------------
# Model application on focused terms


def _close_pol(m: Model, t: PolType) -> PolType:
    """Instantiate positive atoms by their polarized model types, keeping every shift."""
    match t:
        case PAtom(x):
            return polarize_pos(m[x])
        case PSum(a, b):
            return PSum(_close_pol(m, a), _close_pol(m, b))
        case ShiftToPos(n):
            return ShiftToPos(_close_pol(m, n))
        case ShiftToNeg(q):
            return ShiftToNeg(_close_pol(m, q))
        case NArrow(a, b):
            return NArrow(_close_pol(m, a), _close_pol(m, b))
        case NProd(a, b):
            return NProd(_close_pol(m, a), _close_pol(m, b))
    return t


_close_pos = _close_neg = _close_pol


def _code(k: int, n: int) -> PosNeutral:
    """The k-th element of the ladder of size n as a positive neutral."""
    if n == 1:
        return PShift(FUnit())
    if k == 0:
        return PInj(1, PShift(FUnit()))
    return PInj(2, _code(k - 1, n - 1))


class _ModelApplier:
    def __init__(self, m: Model):
        self.m = m
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"%m{self.n}"

    def site(self, x: str, t: PosType, body, sub: dict):
        """Rewrite body under a fresh binding of x : t."""
        sub = {k: v for k, v in sub.items() if k != x}
        if not isinstance(t, PAtom):
            return self.inv(body, sub)
        n = _ladder_size(self.m, t.name)
        return self.cascade(x, 0, n, lambda k: self.inv(body, {**sub, x: _code(k, n)}))

    def cascade(self, x: str, k: int, n: int, make):
        if n == 0:
            return FAbsurd(x)
        if n == 1:
            return make(k)
        y1, y2 = self.fresh(), self.fresh()
        return FMatch(x, y1, make(k), y2, self.cascade(y2, k + 1, n - 1, make))

    def inv(self, a, sub: dict):
        match a:
            case FLam(x, dom, body):
                self.types[x] = dom
                return FLam(x, _close_pos(self.m, dom), self.site(x, dom, body, sub))
            case FPair(l, r):
                return FPair(self.inv(l, sub), self.inv(r, sub))
            case FUnit() | FAbsurd() | FHole():
                return a
            case FMatch(x, x1, b1, x2, b2):
                t = self.types[x]
                self.types[x1], self.types[x2] = t.left, t.right
                return FMatch(x, x1, self.site(x1, t.left, b1, sub), x2, self.site(x2, t.right, b2, sub))
            case FLet(x, n, t, body):
                self.types[x] = t
                return FLet(x, self.neg(n, sub), _close_pos(self.m, t), self.site(x, t, body, sub))
            case FMultiLet(bs, body, new):
                bs2 = tuple(Binding(b.binder, self.neg(b.neutral, sub), _close_pos(self.m, b.type)) for b in bs)
                for b in bs:
                    self.types[b.binder] = b.type
                return FMultiLet(bs2, self.sites([(b.binder, b.type) for b in bs], body, sub), new)
            case FConcPos(p):
                return FConcPos(self.pos(p, sub))
            case FConcNeg(n):
                return FConcNeg(self.neg(n, sub))
        raise TypeError(a)

    def sites(self, binders, body, sub: dict):
        if not binders:
            return self.inv(body, sub)
        (x, t), rest = binders[0], binders[1:]
        sub = {k: v for k, v in sub.items() if k != x}
        if not isinstance(t, PAtom):
            return self.sites(rest, body, sub)
        n = _ladder_size(self.m, t.name)
        return self.cascade(x, 0, n, lambda k: self.sites(rest, body, {**sub, x: _code(k, n)}))

    def neg(self, n, sub: dict):
        match n:
            case NApp(f, p):
                return NApp(self.neg(f, sub), self.pos(p, sub))
            case NProj(i, f):
                return NProj(i, self.neg(f, sub))
        return n

    def pos(self, p, sub: dict):
        match p:
            case PVar(x) if x in sub:
                return sub[x]
            case PInj(i, q):
                return PInj(i, self.pos(q, sub))
            case PShift(body):
                return PShift(self.inv(body, sub))
        return p


def apply_model_focused(
    m: Model, a: Invertible, judgment: FocusedJudgment
) -> tuple[Invertible, FocusedJudgment]:
    """Instantiate atoms by ladder types, splitting every atomic binder into its cases.

    Returns the transformed term and the closed judgment it inhabits.
    """
    ap = _ModelApplier(m)
    ap.types = dict(judgment.delta)
    out = ap.sites(list(judgment.delta), a, {})
    closed = FocusedJudgment(
        tuple((x, _close_pos(m, t)) for x, t in judgment.delta), _close_neg(m, judgment.goal)
    )
    return out, closed


# ---------------------------------------------------------------------------
# Function removal on focused terms


def defun_focused(a: Invertible, judgment: FocusedJudgment) -> tuple[Invertible, FocusedJudgment]:
    """Move a focused term at a closed judgment to function-free types.

    The term is defocused, transported along the function-free isomorphism
    at every hypothesis and at the goal, normalized and focused again.
    """
    ctx = [(x, depolarize(t)) for x, t in judgment.delta]
    goal = depolarize(judgment.goal)
    e = defocus(a)
    e = subst_many(e, {x: Annot(refun_term(Var(x), t), t) for x, t in ctx})
    out_ctx = [(x, dataty(t)) for x, t in ctx]
    out_goal = dataty(goal)
    # The transported term is fully annotated but not always inferable, so
    # it goes to the phase engine without re-elaboration.
    e = beta_normalize(out_ctx, strip_annotations(defun_term(e, goal)))
    out = PhaseEngine(FocusPolicy()).run(out_ctx, out_goal, [e])[0]
    return out, root_judgment(out_ctx, out_goal)


# ---------------------------------------------------------------------------
# Values satisfying the constraints


def first_value(t: Type) -> Optional[SemValue]:
    """The first value of a closed type in canonical order, if any."""
    match t:
        case Unit():
            return STAR
        case Empty():
            return None
        case Prod(a, b):
            x, y = first_value(a), first_value(b)
            return None if x is None or y is None else VPair(x, y)
        case Sum(a, b):
            x = first_value(a)
            if x is not None:
                return VTag(1, x)
            y = first_value(b)
            return None if y is None else VTag(2, y)
        case Fun(a, b):
            dom = enumerate_values(a)
            if not dom:
                return VFun(())
            y = first_value(b)
            return None if y is None else VFun(tuple((x, y) for x in dom))
    raise KernelError(f"type is not closed: {print_type(t)}")


def _spine(n: NegNeutral) -> tuple[str, list]:
    ops: list = []
    while True:
        match n:
            case NVar(x):
                ops.reverse()
                return x, ops
            case NApp(f, p):
                ops.append(("app", p))
                n = f
            case NProj(i, f):
                ops.append(("proj", i))
                n = f


def _update(v: SemValue, ops: list, r: SemValue) -> SemValue:
    if not ops:
        return r
    (kind, x), rest = ops[0], ops[1:]
    if kind == "proj":
        if x == 1:
            return VPair(_update(v.left, rest, r), v.right)
        return VPair(v.left, _update(v.right, rest, r))
    return VFun(tuple((a, _update(b, rest, r) if a == x else b) for a, b in v.table))


def _select(v: SemValue, ops: list) -> SemValue:
    for kind, x in ops:
        v = (v.left if x == 1 else v.right) if kind == "proj" else v(x)
    return v


@dataclass
class Assignment:
    """Values for every variable of a decomposition under a model."""

    model: dict[str, Type]
    values: dict[str, SemValue]
    types: dict[str, Type]
    substitution: dict[str, Term] = field(default_factory=dict)


def build_substitution(d: Decomposition, m: Model, max_rounds: int = 1000) -> Assignment:
    """Choose values for the variables of d that satisfy all its equations.

    Atomic variables get pairwise distinct ladder codes, matched sums follow
    their recorded injection and negative variables are tables patched along
    each let-bound spine until every equation holds.
    """
    types = {x: apply_model(m, depolarize(t)) for x, t in d.env.gamma}
    pol = dict(d.env.gamma)
    codes: dict[str, SemValue] = {}
    seen: dict[str, int] = {}
    for x, t in d.env.gamma:
        if isinstance(t, PAtom):
            n = _ladder_size(m, t.name)
            codes[x] = fin_code(seen.get(t.name, 0), n)
            seen[t.name] = seen.get(t.name, 0) + 1
    tables: dict[str, SemValue] = {}
    for x, t in d.env.gamma:
        if isinstance(t, ShiftToPos):
            v = first_value(types[x])
            if v is None:
                raise InternalFault(f"no value for {x} : {print_type(types[x])}")
            tables[x] = v
        elif isinstance(t, PEmpty):
            raise InternalFault(f"{x} has the empty type at a consistent hole")
    injs = [eq for eq in d.env.equations if isinstance(eq, InjEq)]
    lets = [eq for eq in d.env.equations if isinstance(eq, LetEq)]
    ev = _Evaluator(m)

    def values() -> dict[str, SemValue]:
        env = {**codes, **tables}
        for eq in reversed(injs):
            env[eq.var] = VTag(eq.index, env[eq.component])
        return env

    def args(ops, env):
        return [(k, ev.run(defocus(x), env) if k == "app" else x) for k, x in ops]

    for _ in range(max_rounds):
        env = values()
        changed = False
        for eq in lets:
            head, ops = _spine(eq.neutral)
            new = _update(tables[head], args(ops, env), env[eq.var])
            if new != tables[head]:
                tables[head] = new
                changed = True
                env = values()
        if not changed:
            break
    else:
        raise InternalFault("constraint values do not stabilize")
    env = values()
    for eq in lets:
        head, ops = _spine(eq.neutral)
        if _select(env[head], args(ops, env)) != env[eq.var]:
            raise InternalFault(f"equation for {eq.var} is not satisfied")
    for x, t in pol.items():
        if x not in env:
            raise InternalFault(f"no value chosen for {x}")
    subst = {x: readable(reify(env[x], types[x])) for x, _ in d.judgment.delta}
    return Assignment(dict(m), env, types, subst)


# ---------------------------------------------------------------------------
# Witnesses


@dataclass
class Witness:
    model: dict[str, Type]
    substitution: dict[str, Term]
    context: Term
    left: SemValue
    right: SemValue
    decomposition: Optional[Decomposition] = None
    transport_checked: bool = False


def close_term(m: Model, e: Term) -> Term:
    """Apply a model to the type annotations of a term."""
    match e:
        case Lam(x, body, ann):
            return Lam(x, close_term(m, body), None if ann is None else apply_model(m, ann))
        case Annot(a, t):
            return Annot(close_term(m, a), apply_model(m, t))
        case App(a, b):
            return App(close_term(m, a), close_term(m, b))
        case Pair(a, b):
            return Pair(close_term(m, a), close_term(m, b))
        case Proj(i, a):
            return Proj(i, close_term(m, a))
        case Inj(i, a):
            return Inj(i, close_term(m, a))
        case Absurd(a):
            return Absurd(close_term(m, a))
        case Match(s, x1, b1, x2, b2):
            return Match(close_term(m, s), x1, close_term(m, b1), x2, close_term(m, b2))
    return e


class _Names:
    def __init__(self, avoid):
        self.avoid = set(avoid)

    def __call__(self) -> str:
        x = fresh_name("o", self.avoid)
        self.avoid.add(x)
        return x


def _equal_code(t: Term, k: int, n: int, fresh: _Names) -> Term:
    """Boolean test of a ladder value against its k-th element."""
    if n == 1:
        return Inj(1, UNITV)
    z = fresh()
    if k == 0:
        return Match(t, z, Inj(1, UNITV), z, Inj(2, UNITV))
    return Match(t, z, Inj(2, UNITV), z, _equal_code(Var(z), k - 1, n - 1, fresh))


def separating_context(d: Decomposition, asg: Assignment) -> Term:
    """The boolean observation `obs[(\\x1..xn. []) s1 .. sn]` for a decomposition."""
    root = list(d.judgment.delta)
    fresh = _Names(x for x, _ in root)
    # The annotation lets the plugged term be checked rather than inferred.
    t: Term = Annot(Hole(), apply_model(asg.model, depolarize(d.judgment.goal)))
    for x, _ in reversed(root):
        t = Lam(x, t, asg.types[x])
    for x, _ in root:
        t = App(t, asg.substitution[x])

    def observe(t: Term, steps: Sequence[Step]) -> Term:
        for i, s in enumerate(steps):
            match s.kind:
                case "lam":
                    t = App(t, readable(reify(asg.values[s.var], asg.types[s.var])))
                case "proj":
                    t = Proj(s.index, t)
                case "inj":
                    z = fresh()
                    rest = observe(Var(z), steps[i + 1 :])
                    other = Inj(1, UNITV)
                    if s.index == 1:
                        return Match(t, z, rest, z, other)
                    return Match(t, z, other, z, rest)
        return discriminate(t)

    def discriminate(t: Term) -> Term:
        p, _ = d.sources
        match p:
            case PInj():
                z = fresh()
                return Match(t, z, Inj(1, UNITV), z, Inj(2, UNITV))
            case PVar(x):
                n = _ladder_size(asg.model, d.type.name)
                return _equal_code(t, _code_index(asg.values[x], n), n, fresh)
        raise InternalFault("unexpected source of inequality")

    return observe(t, d.steps)


def readable(e: Term, avoid=()) -> Term:
    """Rename binders that the surface syntax cannot spell (such as `%f0`)."""
    used = set(avoid)

    def bind(x: str, env: dict) -> tuple[str, dict]:
        if not x.startswith("%"):
            used.add(x)
            return x, {k: v for k, v in env.items() if k != x}
        y = fresh_name("v", used)
        used.add(y)
        return y, {**env, x: y}

    def go(e: Term, env: dict) -> Term:
        match e:
            case Var(x):
                return Var(env.get(x, x))
            case Lam(x, body, ann):
                y, env2 = bind(x, env)
                return Lam(y, go(body, env2), ann)
            case App(a, b):
                return App(go(a, env), go(b, env))
            case Pair(a, b):
                return Pair(go(a, env), go(b, env))
            case Proj(i, a):
                return Proj(i, go(a, env))
            case Inj(i, a):
                return Inj(i, go(a, env))
            case Absurd(a):
                return Absurd(go(a, env))
            case Annot(a, t):
                return Annot(go(a, env), t)
            case Match(t, x1, b1, x2, b2):
                y1, e1 = bind(x1, env)
                y2, e2 = bind(x2, env)
                return Match(go(t, env), y1, go(b1, e1), y2, go(b2, e2))
        return e

    return go(e, {})


def _code_index(v: SemValue, n: int) -> int:
    for k in range(n):
        if fin_code(k, n) == v:
            return k
    raise InternalFault("value is not a ladder code")


def evaluate_plugged(w: Witness, ctx: Sequence[tuple[str, Type]], goal: Type, e: Term) -> SemValue:
    term = plug(w.context, close_term(w.model, elaborate_normal(ctx, e, goal)))
    return eval_term((), term, {}, BOOL)


def build_witness(
    ctx: Sequence[tuple[str, Type]],
    goal: Type,
    a: Invertible,
    b: Invertible,
    originals: Optional[tuple[Term, Term]] = None,
    checks: bool = True,
) -> Witness:
    """A verified separating context for two saturated terms that are not equal.

    With `originals`, the context is verified on those terms; otherwise on
    the defocused saturated terms. With `checks`, the model-application and
    function-removal transformations are also run and must keep the terms
    apart.
    """
    j = root_judgment(ctx, goal)
    d = decompose(a, b, j)
    m = neutral_model(d)
    checked = checks and _transport_cost(a, j, m) <= TRANSPORT_BUDGET
    if checked:
        _check_transport(a, b, j, m)
    asg = build_substitution(d, m)
    context = separating_context(d, asg)
    w = Witness(asg.model, asg.substitution, context, STAR, STAR, d, checked)
    left, right = originals if originals is not None else (defocus(a), defocus(b))
    w.left = evaluate_plugged(w, ctx, goal, left)
    w.right = evaluate_plugged(w, ctx, goal, right)
    verify_witness(w)
    return w


def verify_witness(w: Witness) -> None:
    for v in (w.left, w.right):
        if not (isinstance(v, VTag) and v.payload == STAR):
            raise InternalFault(f"separating context returned {print_value(v)}, not a boolean")
    if w.left == w.right:
        raise InternalFault("separating context does not separate the terms")


# Model application duplicates a term once per code at every atomic binder,
# and function removal turns a function type into a product over its domain;
# both are exponential, so these cross-checks only run on small instances.
TRANSPORT_BUDGET = 2000


def _atom_binders(a) -> int:
    match a:
        case FLam(_, dom, body):
            return isinstance(dom, PAtom) + _atom_binders(body)
        case FPair(l, r):
            return _atom_binders(l) + _atom_binders(r)
        case FMatch(_, _, b1, _, b2):
            return 2 + _atom_binders(b1) + _atom_binders(b2)
        case FLet(_, n, t, body):
            return isinstance(t, PAtom) + _atom_binders(n) + _atom_binders(body)
        case FMultiLet(bs, body, _):
            return sum(isinstance(b.type, PAtom) + _atom_binders(b.neutral) for b in bs) + _atom_binders(body)
        case FConcPos(p) | PInj(_, p):
            return _atom_binders(p)
        case FConcNeg(n):
            return _atom_binders(n)
        case NApp(f, p):
            return _atom_binders(f) + _atom_binders(p)
        case NProj(_, f):
            return _atom_binders(f)
        case PShift(body):
            return _atom_binders(body)
    return 0


def _transport_cost(a: Invertible, j: FocusedJudgment, m: Model) -> int:
    width = max([cardinality(t) for t in m.values()] + [1])
    try:
        split = width ** (_atom_binders(a) + len(j.delta))
        types = [apply_model(m, depolarize(t)) for _, t in j.delta] + [apply_model(m, depolarize(j.goal))]
        if any(cardinality(t) > TRANSPORT_BUDGET for t in types):
            return TRANSPORT_BUDGET + 1
        size = sum(type_size(dataty(t)) for t in types)
    except (KernelError, OverflowError):
        return TRANSPORT_BUDGET + 1
    return split * size


def _check_transport(a: Invertible, b: Invertible, j: FocusedJudgment, m: Model) -> None:
    am, jm = apply_model_focused(m, a, j)
    bm, _ = apply_model_focused(m, b, j)
    for t in (am, bm):
        focused_typecheck("inv", t, jm.goal, (), jm.delta, saturated=True)
    decompose(am, bm, jm)
    ad, jd = defun_focused(am, jm)
    bd, _ = defun_focused(bm, jm)
    ctx = [(x, depolarize(t)) for x, t in jd.delta]
    goal = depolarize(jd.goal)
    r = saturate_pair(ctx, goal, ad, bd)
    if sat_equal(*r.terms, jd.delta):
        raise InternalFault("function removal identified inequivalent terms")
    decompose(*r.terms, jd)


# ---------------------------------------------------------------------------
# Serialization


def serialize_witness(w: Witness) -> str:
    lines = ["model:"]
    lines += [f"  {x} -> {print_type(t)}" for x, t in sorted(w.model.items())]
    lines.append("substitution:")
    lines += [f"  {x} = {print_term(e)}" for x, e in w.substitution.items()]
    lines.append(f"context: {print_term(w.context)}")
    lines.append(f"left: {print_value(w.left)}")
    lines.append(f"right: {print_value(w.right)}")
    return "\n".join(lines)


def parse_witness(text: str) -> tuple[dict[str, Type], dict[str, Term], Term]:
    """Read back the model, substitution and context of a serialized witness."""
    model: dict[str, Type] = {}
    substitution: dict[str, Term] = {}
    context: Optional[Term] = None
    section = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("  ") and section == "model:":
            x, t = line.strip().split("->", 1)
            model[x.strip()] = parse_type(t)
        elif line.startswith("  ") and section == "substitution:":
            x, e = line.strip().split("=", 1)
            substitution[x.strip()] = parse_term(e)
        elif line.startswith("context:"):
            context = parse_term(line[len("context:") :])
            section = None
        else:
            section = line.strip()
    if context is None:
        raise KernelError("witness has no context line")
    return model, substitution, context
