"""Unfocused syntax of the simply-typed lambda calculus with sums and products.

Types, terms, a concrete-syntax parser and printer, a bidirectional
typechecker, capture-avoiding substitution and normal-order beta
normalization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Fun:
    dom: "Type"
    cod: "Type"

    def __hash__(self) -> int:
        return hash(("Fun", self.dom, self.cod))


@dataclass(frozen=True)
class Prod:
    left: "Type"
    right: "Type"

    def __hash__(self) -> int:
        return hash(("Prod", self.left, self.right))


@dataclass(frozen=True)
class Unit:
    def __hash__(self) -> int:
        return hash("Unit")


@dataclass(frozen=True)
class Sum:
    left: "Type"
    right: "Type"

    def __hash__(self) -> int:
        return hash(("Sum", self.left, self.right))


@dataclass(frozen=True)
class Empty:
    def __hash__(self) -> int:
        return hash("Empty")


Type = Union[Atom, Fun, Prod, Unit, Sum, Empty]

UNIT = Unit()
EMPTY = Empty()
BOOL = Sum(UNIT, UNIT)


def is_closed(t: Type) -> bool:
    return not type_atoms(t)


def type_atoms(t: Type) -> set[str]:
    match t:
        case Atom(name):
            return {name}
        case Fun(a, b) | Prod(a, b) | Sum(a, b):
            return type_atoms(a) | type_atoms(b)
        case _:
            return set()


def type_size(t: Type) -> int:
    """Number of connectives (atoms, 1 and 0 count as zero)."""
    match t:
        case Fun(a, b) | Prod(a, b) | Sum(a, b):
            return 1 + type_size(a) + type_size(b)
        case _:
            return 0


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    binder: str
    body: "Term"
    ann: Optional[Type] = None


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Proj:
    index: int
    arg: "Term"


@dataclass(frozen=True)
class UnitVal:
    pass


@dataclass(frozen=True)
class Inj:
    index: int
    arg: "Term"


@dataclass(frozen=True)
class Match:
    scrut: "Term"
    x1: str
    b1: "Term"
    x2: str
    b2: "Term"


@dataclass(frozen=True)
class Absurd:
    arg: "Term"


@dataclass(frozen=True)
class Annot:
    term: "Term"
    type: Type


@dataclass(frozen=True)
class Hole:
    """The hole of a one-hole context."""


Term = Union[Var, Lam, App, Pair, Proj, UnitVal, Inj, Match, Absurd, Annot, Hole]

UNITV = UnitVal()

Context = tuple[tuple[str, Type], ...]


def lookup(ctx: Sequence[tuple[str, Type]], x: str) -> Optional[Type]:
    for name, t in reversed(ctx):
        if name == x:
            return t
    return None


# ---------------------------------------------------------------------------
# Errors


class KernelError(Exception):
    pass


class ParseError(KernelError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class TypeCheckError(KernelError):
    pass


# ---------------------------------------------------------------------------
# Lexer and parser

KEYWORDS = {"case", "of", "absurd", "p1", "p2", "i1", "i2", "atoms", "context", "goal", "term"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)"
    r"|(?P<arrow>->)|(?P<hole>\[\])"
    r"|(?P<ident>[A-Za-z_%][A-Za-z0-9_'%]*)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<sym>[\\λ.:(),*+{}|;=])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and s in KEYWORDS:
                kind = "kw"
            elif kind == "sym" and s == "λ":
                s = "\\"
            out.append(Token(kind, s, line, col))
        for ch in m.group():
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str) -> ParseError:
        t = self.tok
        found = t.text or "end of input"
        return ParseError(f"{msg}, found {found!r}", t.line, t.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def eat(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected identifier")
        t = self.tok
        self.i += 1
        return t.text

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")

    # types: * binds tighter than +, which binds tighter than ->

    def type_(self) -> Type:
        left = self.sum_type()
        if self.at("->"):
            self.i += 1
            return Fun(left, self.type_())
        return left

    def sum_type(self) -> Type:
        left = self.prod_type()
        if self.at("+"):
            self.i += 1
            return Sum(left, self.sum_type())
        return left

    def prod_type(self) -> Type:
        left = self.base_type()
        if self.at("*"):
            self.i += 1
            return Prod(left, self.prod_type())
        return left

    def base_type(self) -> Type:
        t = self.tok
        if t.kind == "num" and t.text in ("0", "1"):
            self.i += 1
            return UNIT if t.text == "1" else EMPTY
        if t.kind == "ident":
            self.i += 1
            return Atom(t.text)
        if self.at("("):
            self.i += 1
            ty = self.type_()
            self.eat(")")
            return ty
        raise self.error("expected a type")

    # terms

    def term(self) -> Term:
        if self.at("\\"):
            self.i += 1
            x = self.ident()
            ann = None
            if self.at(":"):
                self.i += 1
                ann = self.type_()
            self.eat(".")
            return Lam(x, self.term(), ann)
        if self.at("case"):
            self.i += 1
            scrut = self.term()
            self.eat("of")
            self.eat("{")
            self.eat("i1")
            x1 = self.ident()
            self.eat("->")
            b1 = self.term()
            self.eat("|")
            self.eat("i2")
            x2 = self.ident()
            self.eat("->")
            b2 = self.term()
            self.eat("}")
            return Match(scrut, x1, b1, x2, b2)
        return self.app()

    def app(self) -> Term:
        e = self.unary()
        while self.starts_unary():
            e = App(e, self.unary())
        return e

    def starts_unary(self) -> bool:
        t = self.tok
        if t.kind == "ident" or t.kind == "hole":
            return True
        return t.text in ("(", "p1", "p2", "i1", "i2", "absurd") and t.kind != "eof"

    def unary(self) -> Term:
        t = self.tok
        if t.kind == "kw" and t.text in ("p1", "p2"):
            self.i += 1
            return Proj(int(t.text[1]), self.unary())
        if t.kind == "kw" and t.text in ("i1", "i2"):
            self.i += 1
            return Inj(int(t.text[1]), self.unary())
        if t.kind == "kw" and t.text == "absurd":
            self.i += 1
            return Absurd(self.unary())
        return self.atomic()

    def atomic(self) -> Term:
        t = self.tok
        if t.kind == "ident":
            self.i += 1
            return Var(t.text)
        if t.kind == "hole":
            self.i += 1
            return Hole()
        if self.at("("):
            self.i += 1
            if self.at(")"):
                self.i += 1
                return UNITV
            e = self.term()
            if self.at(","):
                self.i += 1
                r = self.term()
                self.eat(")")
                return Pair(e, r)
            if self.at(":"):
                self.i += 1
                ty = self.type_()
                self.eat(")")
                return Annot(e, ty)
            self.eat(")")
            return e
        raise self.error("expected a term")


def parse_type(text: str) -> Type:
    p = Parser(text)
    t = p.type_()
    p.expect_eof()
    return t


def parse_term(text: str) -> Term:
    p = Parser(text)
    e = p.term()
    p.expect_eof()
    return e


@dataclass(frozen=True)
class Judgment:
    atoms: tuple[str, ...]
    context: Context
    goal: Type
    terms: tuple[tuple[str, Term], ...]


def parse_judgment(text: str) -> Judgment:
    """Parse a judgment file: optional atoms and context, a goal, one or two terms."""
    p = Parser(text)
    atoms: Optional[list[str]] = None
    ctx: list[tuple[str, Type]] = []
    if p.at("atoms"):
        p.i += 1
        atoms = []
        while p.tok.kind == "ident":
            atoms.append(p.ident())
        p.eat(";")
    if p.at("context"):
        p.i += 1
        if not p.at(";"):
            while True:
                x = p.ident()
                p.eat(":")
                ctx.append((x, p.type_()))
                if not p.at(","):
                    break
                p.i += 1
        p.eat(";")
    p.eat("goal")
    goal = p.type_()
    p.eat(";")
    terms: list[tuple[str, Term]] = []
    while p.at("term"):
        p.i += 1
        name = p.ident()
        p.eat("=")
        terms.append((name, p.term()))
        p.eat(";")
    p.expect_eof()
    if not 1 <= len(terms) <= 2:
        raise ParseError("expected one or two term entries", p.tok.line, p.tok.col)
    used: set[str] = set(type_atoms(goal))
    for _, t in ctx:
        used |= type_atoms(t)
    if atoms is None:
        atoms = sorted(used)
    else:
        undeclared = used - set(atoms)
        if undeclared:
            raise ParseError(f"undeclared atom {sorted(undeclared)[0]!r}", 1, 1)
    return Judgment(tuple(atoms), tuple(ctx), goal, tuple(terms))


# ---------------------------------------------------------------------------
# Printing


def print_type(t: Type) -> str:
    match t:
        case Atom(name):
            return name
        case Unit():
            return "1"
        case Empty():
            return "0"
        case Fun(a, b):
            return f"{_type_operand(a, Fun)} -> {print_type(b) if isinstance(b, Fun) else _type_operand(b, Fun)}"
        case Sum(a, b):
            return f"{_type_operand(a, Sum)} + {_type_operand(b, Sum)}"
        case Prod(a, b):
            return f"{_type_operand(a, Prod)} * {_type_operand(b, Prod)}"
    raise TypeError(t)


_TYPE_LEVEL = {Fun: 0, Sum: 1, Prod: 2}


def _type_operand(t: Type, parent: type) -> str:
    level = _TYPE_LEVEL.get(type(t))
    if level is not None and level <= _TYPE_LEVEL[parent]:
        return f"({print_type(t)})"
    return print_type(t)


def print_term(e: Term) -> str:
    match e:
        case Lam(x, body, ann):
            head = f"\\{x}" if ann is None else f"\\{x}:{print_type(ann)}"
            return f"{head}. {print_term(body)}"
        case Match(s, x1, b1, x2, b2):
            return f"case {print_term(s)} of {{i1 {x1} -> {print_term(b1)} | i2 {x2} -> {print_term(b2)}}}"
        case App(f, a):
            return f"{_print_head(f)} {_print_atomic(a)}"
        case _:
            return _print_unary(e)


def _print_head(e: Term) -> str:
    if isinstance(e, App):
        return print_term(e)
    return _print_atomic(e)


def _print_unary(e: Term) -> str:
    match e:
        case Proj(i, a):
            return f"p{i} {_print_unary_arg(a)}"
        case Inj(i, a):
            return f"i{i} {_print_unary_arg(a)}"
        case Absurd(a):
            return f"absurd {_print_unary_arg(a)}"
    return _print_atomic(e)


def _print_unary_arg(e: Term) -> str:
    if isinstance(e, (Proj, Inj, Absurd)):
        return _print_unary(e)
    return _print_atomic(e)


def _print_atomic(e: Term) -> str:
    match e:
        case Var(x):
            return x
        case UnitVal():
            return "()"
        case Hole():
            return "[]"
        case Pair(a, b):
            return f"({print_term(a)}, {print_term(b)})"
        case Annot(t, ty):
            return f"({print_term(t)} : {print_type(ty)})"
    return f"({print_term(e)})"


def print_context(ctx: Iterable[tuple[str, Type]]) -> str:
    return ", ".join(f"{x} : {print_type(t)}" for x, t in ctx)


# ---------------------------------------------------------------------------
# Variables and substitution


def free_vars(e: Term) -> frozenset[str]:
    match e:
        case Var(x):
            return frozenset((x,))
        case Lam(x, body, _):
            return free_vars(body) - {x}
        case App(a, b) | Pair(a, b):
            return free_vars(a) | free_vars(b)
        case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
            return free_vars(a)
        case Match(s, x1, b1, x2, b2):
            return free_vars(s) | (free_vars(b1) - {x1}) | (free_vars(b2) - {x2})
    return frozenset()


def all_names(e: Term) -> set[str]:
    """Every variable name occurring in e, bound or free."""
    match e:
        case Var(x):
            return {x}
        case Lam(x, body, _):
            return {x} | all_names(body)
        case App(a, b) | Pair(a, b):
            return all_names(a) | all_names(b)
        case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
            return all_names(a)
        case Match(s, x1, b1, x2, b2):
            return all_names(s) | {x1, x2} | all_names(b1) | all_names(b2)
    return set()


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.rstrip("0123456789'") or "x"
    n = 0
    while True:
        cand = f"{stem}{n}"
        if cand not in avoid:
            return cand
        n += 1


def subst(e: Term, x: str, v: Term) -> Term:
    """e[x := v], renaming binders that would capture free variables of v."""
    return subst_many(e, {x: v})


def subst_many(e: Term, sub: dict[str, Term]) -> Term:
    if not sub:
        return e
    fv_sub: set[str] = set()
    for t in sub.values():
        fv_sub |= free_vars(t)
    return _subst(e, sub, fv_sub)


def _subst_binder(x: str, body: Term, sub: dict[str, Term], fv_sub: set[str]) -> tuple[str, Term]:
    inner = {k: v for k, v in sub.items() if k != x}
    if not inner:
        return x, body
    if x in fv_sub:
        y = fresh_name(x, fv_sub | all_names(body) | set(inner))
        body = _subst(body, {x: Var(y)}, {y})
        x = y
    return x, _subst(body, inner, fv_sub)


def _subst(e: Term, sub: dict[str, Term], fv_sub: set[str]) -> Term:
    match e:
        case Var(x):
            return sub.get(x, e)
        case Lam(x, body, ann):
            x2, body2 = _subst_binder(x, body, sub, fv_sub)
            return Lam(x2, body2, ann)
        case App(a, b):
            return App(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub))
        case Pair(a, b):
            return Pair(_subst(a, sub, fv_sub), _subst(b, sub, fv_sub))
        case Proj(i, a):
            return Proj(i, _subst(a, sub, fv_sub))
        case Inj(i, a):
            return Inj(i, _subst(a, sub, fv_sub))
        case Absurd(a):
            return Absurd(_subst(a, sub, fv_sub))
        case Annot(a, t):
            return Annot(_subst(a, sub, fv_sub), t)
        case Match(s, x1, b1, x2, b2):
            y1, c1 = _subst_binder(x1, b1, sub, fv_sub)
            y2, c2 = _subst_binder(x2, b2, sub, fv_sub)
            return Match(_subst(s, sub, fv_sub), y1, c1, y2, c2)
    return e


def plug(ctx: Term, e: Term) -> Term:
    """Replace the hole of a one-hole context. Binders in ctx may capture e."""
    match ctx:
        case Hole():
            return e
        case Lam(x, body, ann):
            return Lam(x, plug(body, e), ann)
        case App(a, b):
            return App(plug(a, e), plug(b, e))
        case Pair(a, b):
            return Pair(plug(a, e), plug(b, e))
        case Proj(i, a):
            return Proj(i, plug(a, e))
        case Inj(i, a):
            return Inj(i, plug(a, e))
        case Absurd(a):
            return Absurd(plug(a, e))
        case Annot(a, t):
            return Annot(plug(a, e), t)
        case Match(s, x1, b1, x2, b2):
            return Match(plug(s, e), x1, plug(b1, e), x2, plug(b2, e))
    return ctx


def strip_annotations(e: Term) -> Term:
    match e:
        case Annot(a, _):
            return strip_annotations(a)
        case Lam(x, body, ann):
            return Lam(x, strip_annotations(body), ann)
        case App(a, b):
            return App(strip_annotations(a), strip_annotations(b))
        case Pair(a, b):
            return Pair(strip_annotations(a), strip_annotations(b))
        case Proj(i, a):
            return Proj(i, strip_annotations(a))
        case Inj(i, a):
            return Inj(i, strip_annotations(a))
        case Absurd(a):
            return Absurd(strip_annotations(a))
        case Match(s, x1, b1, x2, b2):
            return Match(strip_annotations(s), x1, strip_annotations(b1), x2, strip_annotations(b2))
    return e


def term_size(e: Term) -> int:
    match e:
        case Lam(_, body, _):
            return 1 + term_size(body)
        case App(a, b) | Pair(a, b):
            return 1 + term_size(a) + term_size(b)
        case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
            return 1 + term_size(a)
        case Match(s, _, b1, _, b2):
            return 1 + term_size(s) + term_size(b1) + term_size(b2)
    return 1


def alpha_eq(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, ma: dict[str, int], mb: dict[str, int], depth: int) -> bool:
    match a, b:
        case Var(x), Var(y):
            return ma.get(x, x) == mb.get(y, y)
        case Lam(x, s, _), Lam(y, t, _):
            return _alpha(s, t, {**ma, x: depth}, {**mb, y: depth}, depth + 1)
        case App(a1, a2), App(b1, b2):
            return _alpha(a1, b1, ma, mb, depth) and _alpha(a2, b2, ma, mb, depth)
        case Pair(a1, a2), Pair(b1, b2):
            return _alpha(a1, b1, ma, mb, depth) and _alpha(a2, b2, ma, mb, depth)
        case Proj(i, s), Proj(j, t):
            return i == j and _alpha(s, t, ma, mb, depth)
        case Inj(i, s), Inj(j, t):
            return i == j and _alpha(s, t, ma, mb, depth)
        case Absurd(s), Absurd(t):
            return _alpha(s, t, ma, mb, depth)
        case Annot(s, t1), Annot(t, t2):
            return t1 == t2 and _alpha(s, t, ma, mb, depth)
        case Match(s, x1, a1, x2, a2), Match(t, y1, b1, y2, b2):
            return (
                _alpha(s, t, ma, mb, depth)
                and _alpha(a1, b1, {**ma, x1: depth}, {**mb, y1: depth}, depth + 1)
                and _alpha(a2, b2, {**ma, x2: depth}, {**mb, y2: depth}, depth + 1)
            )
        case UnitVal(), UnitVal():
            return True
        case Hole(), Hole():
            return True
    return False


def alpha_key(e: Term) -> str:
    """A string that is equal for two terms iff they are alpha-equivalent."""
    out: list[str] = []
    _key(e, {}, 0, out)
    return "".join(out)


def _key(e: Term, m: dict[str, int], depth: int, out: list[str]) -> None:
    match e:
        case Var(x):
            out.append(f"#{depth - 1 - m[x]}" if x in m else f"${x}")
        case Lam(x, body, _):
            out.append("(L ")
            _key(body, {**m, x: depth}, depth + 1, out)
            out.append(")")
        case App(a, b):
            out.append("(@ ")
            _key(a, m, depth, out)
            out.append(" ")
            _key(b, m, depth, out)
            out.append(")")
        case Pair(a, b):
            out.append("(, ")
            _key(a, m, depth, out)
            out.append(" ")
            _key(b, m, depth, out)
            out.append(")")
        case Proj(i, a):
            out.append(f"(p{i} ")
            _key(a, m, depth, out)
            out.append(")")
        case Inj(i, a):
            out.append(f"(i{i} ")
            _key(a, m, depth, out)
            out.append(")")
        case Absurd(a):
            out.append("(absurd ")
            _key(a, m, depth, out)
            out.append(")")
        case Annot(a, _):
            _key(a, m, depth, out)
        case Match(s, x1, b1, x2, b2):
            out.append("(case ")
            _key(s, m, depth, out)
            out.append(" ")
            _key(b1, {**m, x1: depth}, depth + 1, out)
            out.append(" ")
            _key(b2, {**m, x2: depth}, depth + 1, out)
            out.append(")")
        case UnitVal():
            out.append("()")
        case Hole():
            out.append("[]")


# ---------------------------------------------------------------------------
# Bidirectional typechecking


def typecheck(ctx: Sequence[tuple[str, Type]], e: Term, goal: Optional[Type] = None) -> Type:
    """Return the type of e, checking against goal when one is given."""
    ctx = tuple(ctx)
    if goal is not None:
        _check(ctx, e, goal)
        return goal
    return _synth(ctx, e)


def elaborate(ctx: Sequence[tuple[str, Type]], e: Term, goal: Type) -> Term:
    """Check e against goal and return it with every lambda binder annotated."""
    return _check(tuple(ctx), e, goal)


def elaborate_normal(ctx: Sequence[tuple[str, Type]], e: Term, goal: Type) -> Term:
    """Elaborate e, falling back to normal forms when a redex hides binder types.

    The beta-normal form is tried first, then the form produced by
    `commute_normal`, whose eliminations all have inferable heads.
    """
    try:
        return _check(tuple(ctx), e, goal)
    except TypeCheckError as err:
        for candidate in (_nf(e), commute_normal(e)):
            try:
                return _check(tuple(ctx), candidate, goal)
            except TypeCheckError:
                pass
        raise err from None


def _mismatch(e: Term, expected: str, got: Optional[Type] = None) -> TypeCheckError:
    msg = f"in {print_term(e)}: expected {expected}"
    if got is not None:
        msg += f", got {print_type(got)}"
    return TypeCheckError(msg)


def _infer(ctx: Context, e: Term) -> tuple[Term, Type]:
    match e:
        case Var(x):
            t = lookup(ctx, x)
            if t is None:
                raise TypeCheckError(f"unbound variable {x}")
            return e, t
        case App(f, a):
            f2, tf = _infer(ctx, f)
            if not isinstance(tf, Fun):
                raise _mismatch(f, "a function", tf)
            return App(f2, _check(ctx, a, tf.dom)), tf.cod
        case Proj(i, a):
            a2, ta = _infer(ctx, a)
            if not isinstance(ta, Prod):
                raise _mismatch(a, "a product", ta)
            return Proj(i, a2), ta.left if i == 1 else ta.right
        case Annot(a, t):
            return Annot(_check(ctx, a, t), t), t
        case Lam(x, body, ann) if ann is not None:
            body2, tb = _infer(ctx + ((x, ann),), body)
            return Lam(x, body2, ann), Fun(ann, tb)
        case UnitVal():
            return e, UNIT
        case Pair(a, b):
            a2, ta = _infer(ctx, a)
            b2, tb = _infer(ctx, b)
            return Pair(a2, b2), Prod(ta, tb)
        case Match(s, x1, b1, x2, b2):
            s2, ts = _infer(ctx, s)
            if not isinstance(ts, Sum):
                raise _mismatch(s, "a sum", ts)
            try:
                c1, t1 = _infer(ctx + ((x1, ts.left),), b1)
            except TypeCheckError:
                c2, t2 = _infer(ctx + ((x2, ts.right),), b2)
                c1 = _check(ctx + ((x1, ts.left),), b1, t2)
                return Match(s2, x1, c1, x2, c2), t2
            c2 = _check(ctx + ((x2, ts.right),), b2, t1)
            return Match(s2, x1, c1, x2, c2), t1
        case Hole():
            raise TypeCheckError("cannot typecheck a hole")
    raise TypeCheckError(f"cannot infer a type for {print_term(e)}; add an annotation")


def _synth(ctx: Context, e: Term) -> Type:
    return _infer(ctx, e)[1]


def _check(ctx: Context, e: Term, t: Type) -> Term:
    match e:
        case Lam(x, body, ann):
            if not isinstance(t, Fun):
                raise _mismatch(e, print_type(t), None)
            if ann is not None and ann != t.dom:
                raise _mismatch(e, f"binder of type {print_type(t.dom)}", ann)
            return Lam(x, _check(ctx + ((x, t.dom),), body, t.cod), t.dom)
        case Pair(a, b):
            if not isinstance(t, Prod):
                raise _mismatch(e, print_type(t))
            return Pair(_check(ctx, a, t.left), _check(ctx, b, t.right))
        case Inj(i, a):
            if not isinstance(t, Sum):
                raise _mismatch(e, print_type(t))
            return Inj(i, _check(ctx, a, t.left if i == 1 else t.right))
        case UnitVal():
            if t != UNIT:
                raise _mismatch(e, print_type(t), UNIT)
            return e
        case Match(s, x1, b1, x2, b2):
            s2, ts = _infer(ctx, s)
            if not isinstance(ts, Sum):
                raise _mismatch(s, "a sum", ts)
            c1 = _check(ctx + ((x1, ts.left),), b1, t)
            c2 = _check(ctx + ((x2, ts.right),), b2, t)
            return Match(s2, x1, c1, x2, c2)
        case Absurd(a):
            a2, ta = _infer(ctx, a)
            if ta != EMPTY:
                raise _mismatch(a, "0", ta)
            return Absurd(a2)
    e2, te = _infer(ctx, e)
    if te != t:
        raise _mismatch(e, print_type(t), te)
    return e2


# ---------------------------------------------------------------------------
# Beta normalization


def whnf(e: Term) -> Term:
    while True:
        match e:
            case App(f, a):
                f2 = whnf(f)
                if isinstance(f2, Lam):
                    e = subst(f2.body, f2.binder, a)
                    continue
                return App(f2, a)
            case Proj(i, a):
                a2 = whnf(a)
                if isinstance(a2, Pair):
                    e = a2.left if i == 1 else a2.right
                    continue
                return Proj(i, a2)
            case Match(s, x1, b1, x2, b2):
                s2 = whnf(s)
                if isinstance(s2, Inj):
                    e = subst(b1, x1, s2.arg) if s2.index == 1 else subst(b2, x2, s2.arg)
                    continue
                return Match(s2, x1, b1, x2, b2)
            case Annot(a, _):
                e = a
                continue
        return e


def _nf(e: Term) -> Term:
    e = whnf(e)
    match e:
        case Lam(x, body, ann):
            return Lam(x, _nf(body), ann)
        case App(f, a):
            return App(_nf(f), _nf(a))
        case Pair(a, b):
            return Pair(_nf(a), _nf(b))
        case Proj(i, a):
            return Proj(i, _nf(a))
        case Inj(i, a):
            return Inj(i, _nf(a))
        case Absurd(a):
            return Absurd(_nf(a))
        case Match(s, x1, b1, x2, b2):
            return Match(_nf(s), x1, _nf(b1), x2, _nf(b2))
    return e


def beta_normalize(ctx: Sequence[tuple[str, Type]], e: Term) -> Term:
    """Normal-order beta normal form. The context is only used by callers for typing."""
    return _nf(e)


def commute_normal(e: Term) -> Term:
    """Beta-normalize, then commute eliminations past `absurd` and `case` heads.

    A beta-normal form can still contain `case absurd x of ...` or
    `(case s of ...) a`; these are well typed but have no inferable head.
    The commuting conversions used here are valid for beta-eta equivalence.
    """
    e = _nf(e)
    while True:
        nxt = _nf(_commute(strip_annotations(e)))
        if nxt == e:
            return e
        e = nxt


def _commute(e: Term) -> Term:
    match e:
        case Lam(x, b, t):
            return Lam(x, _commute(b), t)
        case Pair(a, b):
            return Pair(_commute(a), _commute(b))
        case Inj(i, a):
            return Inj(i, _commute(a))
        case App(f, a):
            arg = _commute(a)
            return _eliminate(_commute(f), lambda h: App(h, arg))
        case Proj(i, a):
            return _eliminate(_commute(a), lambda h: Proj(i, h))
        case Absurd(a):
            return _eliminate(_commute(a), Absurd)
        case Match(sc, x1, b1, x2, b2):
            c1, c2 = _commute(b1), _commute(b2)
            return _eliminate(_commute(sc), lambda h: Match(h, x1, c1, x2, c2))
    return e


def _eliminate(head: Term, frame: Callable[[Term], Term]) -> Term:
    match head:
        case Absurd():
            return head
        case Match(sc, y1, c1, y2, c2):
            avoid = all_names(frame(UNITV)) | all_names(head)
            z1 = fresh_name(y1, avoid)
            z2 = fresh_name(y2, avoid | {z1})
            return Match(
                sc,
                z1,
                _eliminate(subst(c1, y1, Var(z1)), frame),
                z2,
                _eliminate(subst(c2, y2, Var(z2)), frame),
            )
    return frame(head)


def is_redex(e: Term) -> bool:
    match e:
        case App(Lam(), _) | Proj(_, Pair()) | Match(Inj(), _, _, _, _):
            return True
    return False


def is_beta_normal(e: Term) -> bool:
    return next(redex_paths(e), None) is None


Path = tuple[int, ...]


def _children(e: Term) -> list[Term]:
    match e:
        case Lam(_, body, _):
            return [body]
        case App(a, b) | Pair(a, b):
            return [a, b]
        case Proj(_, a) | Inj(_, a) | Absurd(a) | Annot(a, _):
            return [a]
        case Match(s, _, b1, _, b2):
            return [s, b1, b2]
    return []


def _replace_child(e: Term, i: int, c: Term) -> Term:
    match e:
        case Lam(x, _, ann):
            return Lam(x, c, ann)
        case App(a, b):
            return App(c, b) if i == 0 else App(a, c)
        case Pair(a, b):
            return Pair(c, b) if i == 0 else Pair(a, c)
        case Proj(k, _):
            return Proj(k, c)
        case Inj(k, _):
            return Inj(k, c)
        case Absurd(_):
            return Absurd(c)
        case Annot(_, t):
            return Annot(c, t)
        case Match(s, x1, b1, x2, b2):
            parts = [s, b1, b2]
            parts[i] = c
            return Match(parts[0], x1, parts[1], x2, parts[2])
    raise ValueError("no children")


def redex_paths(e: Term, prefix: Path = ()) -> Iterator[Path]:
    """Positions of all beta redexes, in leftmost-outermost order."""
    if is_redex(e):
        yield prefix
    for i, c in enumerate(_children(e)):
        yield from redex_paths(c, prefix + (i,))


def contract(e: Term) -> Term:
    match e:
        case App(Lam(x, body, _), a):
            return subst(body, x, a)
        case Proj(i, Pair(a, b)):
            return a if i == 1 else b
        case Match(Inj(i, v), x1, b1, x2, b2):
            return subst(b1, x1, v) if i == 1 else subst(b2, x2, v)
    raise ValueError("not a redex")


def reduce_at(e: Term, path: Path) -> Term:
    if not path:
        return contract(e)
    kids = _children(e)
    return _replace_child(e, path[0], reduce_at(kids[path[0]], path[1:]))


def normalize_with(e: Term, choose: Callable[[list[Path]], int], max_steps: int = 100_000) -> Term:
    """Reduce to normal form, letting `choose` pick which redex fires at each step."""
    e = strip_annotations(e)
    for _ in range(max_steps):
        paths = list(redex_paths(e))
        if not paths:
            return e
        e = reduce_at(e, paths[choose(paths)])
    raise RuntimeError("reduction step budget exceeded")
