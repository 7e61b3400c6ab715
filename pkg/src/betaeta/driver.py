"""End-to-end equivalence decisions and the differential testing harness."""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .kernel import (
    EMPTY,
    UNIT,
    UNITV,
    Absurd,
    Annot,
    App,
    Atom,
    Empty,
    Fun,
    Inj,
    KernelError,
    TypeCheckError,
    _synth,
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
    print_context,
    print_term,
    print_type,
    term_size,
)
from .canonicity import Witness, build_witness, evaluate_plugged
from .focusing import print_focused, root_judgment
from .saturation import sat_equal, saturate_pair
from .semantics import (
    BUDGET,
    BudgetExceeded,
    InternalFault,
    apply_model,
    cardinality,
    evaluation_cost,
    judgment_atoms,
    ladder_models,
    oracle_equiv,
)

# ---------------------------------------------------------------------------
# Enumeration


def enumerate_types(atoms: Iterable[str], max_connectives: int) -> list[Type]:
    """All types with at most the given number of connectives, smallest first.

    Units and 0 count as connectives; atoms do not.
    """
    atoms = sorted(set(atoms))
    by_size: list[list[Type]] = []
    for n in range(max_connectives + 1):
        level: list[Type] = []
        if n == 0:
            level.extend(Atom(a) for a in atoms)
        if n == 1:
            level.extend([UNIT, EMPTY])
        if n >= 1:
            for k in range(n):
                for a in by_size[k]:
                    for b in by_size[n - 1 - k]:
                        level.extend([Fun(a, b), Prod(a, b), Sum(a, b)])
        by_size.append(level)
    out = [t for level in by_size[1:] for t in level]
    return [Atom(a) for a in atoms] + out if atoms else out


def subformulas(t: Type) -> list[Type]:
    out = [t]
    match t:
        case Fun(a, b) | Prod(a, b) | Sum(a, b):
            out += subformulas(a) + subformulas(b)
    return out


class _TermEnumerator:
    """Beta-normal terms by exact size, with deterministic binder names.

    Elimination heads are variables, or case analyses whose result type is
    a subformula of the judgment.
    """

    def __init__(self, ctx: Sequence[tuple[str, Type]], goal: Type):
        self.ctx = tuple(ctx)
        seen: list[Type] = []
        for t in [goal] + [t for _, t in ctx]:
            for s in subformulas(t):
                if s not in seen:
                    seen.append(s)
        self.subformulas = tuple(seen)
        self.check_memo: dict = {}
        self.synth_memo: dict = {}

    def binder(self, ctx) -> str:
        return f"x{len(ctx)}"

    def check(self, ctx, t: Type, n: int) -> list[Term]:
        key = (ctx, t, n)
        hit = self.check_memo.get(key)
        if hit is not None:
            return hit
        out: list[Term] = []
        if n >= 1:
            match t:
                case Fun(a, b):
                    x = self.binder(ctx)
                    out += [Lam(x, body, a) for body in self.check(ctx + ((x, a),), b, n - 1)]
                case Prod(a, b):
                    for k in range(1, n - 1):
                        for l in self.check(ctx, a, k):
                            out += [Pair(l, r) for r in self.check(ctx, b, n - 1 - k)]
                case Unit():
                    if n == 1:
                        out.append(UNITV)
                case Sum(a, b):
                    out += [Inj(1, e) for e in self.check(ctx, a, n - 1)]
                    out += [Inj(2, e) for e in self.check(ctx, b, n - 1)]
            for e, ty in self.synth(ctx, n):
                if ty == t and not isinstance(e, (Match, Annot)):
                    out.append(e)
            out += self.matches(ctx, t, n)
            out += [Absurd(e) for e, ty in self.synth(ctx, n - 1) if isinstance(ty, Empty)]
        self.check_memo[key] = out
        return out

    def matches(self, ctx, t: Type, n: int) -> list[Term]:
        out = []
        x = self.binder(ctx)
        for k in range(1, n - 2):
            for s, ty in self.synth(ctx, k):
                if not isinstance(ty, Sum):
                    continue
                for k1 in range(1, n - k - 1):
                    k2 = n - 1 - k - k1
                    for b1 in self.check(ctx + ((x, ty.left),), t, k1):
                        for b2 in self.check(ctx + ((x, ty.right),), t, k2):
                            out.append(Match(s, x, b1, x, b2))
        return out

    @staticmethod
    def annotate(ctx, m: Match, u: Type) -> Term:
        try:
            _synth(ctx, m)
            return m
        except TypeCheckError:
            return Annot(m, u)

    def synth(self, ctx, n: int) -> list[tuple[Term, Type]]:
        key = (ctx, n)
        hit = self.synth_memo.get(key)
        if hit is not None:
            return hit
        out: list[tuple[Term, Type]] = []
        if n == 1:
            seen = set()
            for x, t in reversed(ctx):
                if x not in seen:
                    seen.add(x)
                    out.append((Var(x), t))
            out.reverse()
        elif n >= 2:
            for e, t in self.synth(ctx, n - 1):
                if isinstance(t, Prod):
                    out.append((Proj(1, e), t.left))
                    out.append((Proj(2, e), t.right))
            for k in range(1, n - 1):
                for f, t in self.synth(ctx, k):
                    if isinstance(t, Fun):
                        out += [(App(f, a), t.cod) for a in self.check(ctx, t.dom, n - 1 - k)]
            for u in self.subformulas:
                if isinstance(u, (Fun, Prod, Sum, Empty)):
                    out += [(self.annotate(ctx, m, u), u) for m in self.matches(ctx, u, n)]
        self.synth_memo[key] = out
        return out


def enumerate_terms(ctx: Sequence[tuple[str, Type]], goal: Type, max_size: int, budget: int = BUDGET) -> list[Term]:
    """Beta-normal terms of the judgment with at most max_size nodes, up to alpha."""
    en = _TermEnumerator(ctx, goal)
    out: list[Term] = []
    keys: set[str] = set()
    for n in range(1, max_size + 1):
        for e in en.check(tuple(ctx), goal, n):
            k = alpha_key(e)
            if k not in keys:
                keys.add(k)
                out.append(e)
                if len(out) > budget:
                    raise BudgetExceeded(f"more than {budget} terms")
    return out


# ---------------------------------------------------------------------------
# Decisions


@dataclass
class Verdict:
    equivalent: bool
    witness: Optional[Witness] = None
    trace: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return "EQUIVALENT" if self.equivalent else "INEQUIVALENT"


def decide_equiv(
    ctx: Sequence[tuple[str, Type]],
    e1: Term,
    e2: Term,
    goal: Type,
    trace_saturation: bool = False,
    checks: bool = True,
) -> Verdict:
    """Decide beta-eta equivalence; inequivalence comes with a verified witness."""
    ctx = list(ctx)
    start = time.perf_counter()
    a = beta_normalize(ctx, elaborate_normal(ctx, e1, goal))
    b = beta_normalize(ctx, elaborate_normal(ctx, e2, goal))
    r = saturate_pair(ctx, goal, a, b, trace=trace_saturation)
    delta = root_judgment(ctx, goal).delta
    trace = {
        "phases": len(r.phases),
        "selection_sizes": [len(p.selected) for p in r.phases],
        "saturated": [print_focused(t) for t in r.terms],
        "log": r.trace,
    }
    if sat_equal(r.terms[0], r.terms[1], delta):
        trace["seconds"] = time.perf_counter() - start
        return Verdict(True, None, trace)
    w = build_witness(ctx, goal, r.terms[0], r.terms[1], originals=(e1, e2), checks=checks)
    trace["seconds"] = time.perf_counter() - start
    return Verdict(False, w, trace)


# ---------------------------------------------------------------------------
# Differential testing


@dataclass(frozen=True)
class CorpusSpec:
    """Bounds for a deterministic sample of judgments and term pairs."""

    atoms: tuple[str, ...] = ("X",)
    max_hyps: int = 2
    max_connectives: int = 4
    max_term_size: int = 7
    judgments: int = 60
    terms_per_judgment: int = 8
    seed: int = 0
    oracle_size: int = 3
    budget: int = BUDGET
    attempts: int = 2000


@dataclass(frozen=True)
class Case:
    ctx: tuple[tuple[str, Type], ...]
    goal: Type
    left: Term
    right: Term


def _oracle_cost(ctx, goal: Type, terms: Sequence[Term], size: int) -> int:
    """Work of an oracle query over every ladder model up to the given size."""
    total = 0
    for m in ladder_models(judgment_atoms(ctx, goal), range(size + 1)):
        valuations = 1
        for _, t in ctx:
            valuations *= cardinality(apply_model(m, t))
        work = max(evaluation_cost(e, m) for e in terms) + _table_size(apply_model(m, goal))
        total += valuations * work * 2
    return total


def _table_size(t: Type) -> int:
    """Entries materialized when a value of closed type t is compared."""
    match t:
        case Fun(a, b):
            return cardinality(a) * _table_size(b)
        case Prod(a, b):
            return _table_size(a) + _table_size(b)
        case Sum(a, b):
            return max(_table_size(a), _table_size(b))
    return 1


def corpus(spec: CorpusSpec) -> list[Case]:
    """Sample judgments and pair up some of their terms, deterministically."""
    rng = random.Random(spec.seed)
    types = enumerate_types(spec.atoms, spec.max_connectives)
    cases: list[Case] = []
    seen: set = set()
    found = 0
    for _ in range(spec.attempts):
        if found >= spec.judgments:
            break
        k = rng.randint(0, spec.max_hyps)
        ctx = tuple((f"h{i}", rng.choice(types)) for i in range(k))
        goal = rng.choice(types)
        if (ctx, goal) in seen:
            continue
        seen.add((ctx, goal))
        try:
            terms = enumerate_terms(ctx, goal, spec.max_term_size, budget=5000)
        except BudgetExceeded:
            continue
        if len(terms) < 2:
            continue
        if len(terms) > spec.terms_per_judgment:
            picks = sorted(rng.sample(range(len(terms)), spec.terms_per_judgment))
            terms = [terms[i] for i in picks]
        try:
            if _oracle_cost(ctx, goal, terms, spec.oracle_size) > spec.budget:
                continue
        except BudgetExceeded:
            continue
        found += 1
        cases += [Case(ctx, goal, a, b) for a, b in itertools.combinations(terms, 2)]
    return cases


@dataclass
class PairResult:
    index: int
    verdict: str
    oracle: str
    status: str
    seconds: float
    witness_size: int = 0
    error: str = ""
    witness_verified: bool = False


@dataclass
class Report:
    results: list[PairResult]
    divergences: list[tuple[PairResult, Case]]
    minimized: list[Case]

    def lines(self) -> list[str]:
        out = [f"PAIR {r.index} {r.verdict} {r.oracle} {r.status}" for r in self.results]
        counts = {s: sum(r.status == s for r in self.results) for s in ("agree", "DIVERGE", "skip", "error")}
        out.append(
            f"SUMMARY pairs={len(self.results)} agree={counts['agree']} diverge={counts['DIVERGE']} "
            f"skip={counts['skip']} error={counts['error']}"
        )
        for case in self.minimized:
            out.append(
                f"REPRO {print_context(case.ctx)} |- {print_type(case.goal)} : "
                f"{print_term(case.left)} vs {print_term(case.right)}"
            )
        return out


def check_case(index: int, case: Case, oracle_size: int = 3, budget: int = BUDGET) -> PairResult:
    start = time.perf_counter()
    try:
        v = decide_equiv(case.ctx, case.left, case.right, case.goal)
    except BudgetExceeded as err:
        return PairResult(index, "BUDGET", "-", "skip", time.perf_counter() - start, error=str(err))
    except (KernelError, InternalFault, RecursionError) as err:
        return PairResult(index, "FAULT", "-", "error", time.perf_counter() - start, error=repr(err))
    extra: tuple[int, ...] = ()
    verified = False
    if not v.equivalent:
        extra = tuple(cardinality(t) for t in v.witness.model.values())
        verified = _witness_holds(case, v.witness)
    try:
        o = oracle_equiv(case.ctx, case.left, case.right, oracle_size, case.goal, extra, budget)
    except BudgetExceeded as err:
        return PairResult(index, v.label, "BUDGET", "skip", time.perf_counter() - start, max(extra, default=0), str(err))
    label = "EQUIVALENT" if o else "INEQUIVALENT"
    status = "agree" if o == v.equivalent else "DIVERGE"
    return PairResult(
        index, v.label, label, status, time.perf_counter() - start, max(extra, default=0), "", verified
    )


def _witness_holds(case: Case, w: Witness) -> bool:
    """Re-evaluate the separating context on the original terms."""
    try:
        left = evaluate_plugged(w, case.ctx, case.goal, case.left)
        right = evaluate_plugged(w, case.ctx, case.goal, case.right)
    except (KernelError, InternalFault):
        return False
    return left != right and left == w.left and right == w.right


def _check_star(args) -> PairResult:
    return check_case(*args)


def differential_run(spec: CorpusSpec = CorpusSpec(), workers: int = 1, cases: Optional[list[Case]] = None) -> Report:
    """Compare the decision procedure with the semantic oracle on a corpus."""
    cases = corpus(spec) if cases is None else cases
    jobs = [(i, c, spec.oracle_size, spec.budget) for i, c in enumerate(cases)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_check_star, jobs, chunksize=8))
    else:
        results = [check_case(*j) for j in jobs]
    results.sort(key=lambda r: r.index)
    divergences = [(r, cases[r.index]) for r in results if r.status == "DIVERGE"]
    return Report(results, divergences, [minimize(c, spec) for _, c in divergences])


def minimize(case: Case, spec: CorpusSpec) -> Case:
    """The smallest diverging pair among the terms of the same judgment."""
    best = case
    size = term_size(case.left) + term_size(case.right)
    try:
        terms = enumerate_terms(case.ctx, case.goal, max(term_size(case.left), term_size(case.right)), budget=2000)
    except BudgetExceeded:
        return case
    for a, b in itertools.combinations(terms, 2):
        n = term_size(a) + term_size(b)
        if n >= size:
            continue
        c = Case(case.ctx, case.goal, a, b)
        if check_case(0, c, spec.oracle_size, spec.budget).status == "DIVERGE":
            best, size = c, n
    return best
