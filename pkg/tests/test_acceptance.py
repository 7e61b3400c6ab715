"""The eight acceptance criteria. Each test prints one PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
"""

from __future__ import annotations

import itertools
import random
import time

from conftest import ACCEPTANCE, load_judgment
from helpers import beta_expand, closed_types

from betaeta.canonicity import close_term, parse_witness, serialize_witness, verify_witness
from betaeta.driver import decide_equiv, enumerate_terms, enumerate_types
from betaeta.focusing import defocus, focus, root_judgment
from betaeta.funless import dataty, defun_value, is_funless, refun_value, reify, reify_funless
from betaeta.kernel import (
    BOOL,
    alpha_eq,
    beta_normalize,
    elaborate_normal,
    normalize_with,
    plug,
    print_type,
    typecheck,
)
from betaeta.saturation import alpha_normal, consistent, icc_canon, is_saturated, saturate_pair
from betaeta.semantics import (
    BudgetExceeded,
    cardinality,
    enumerate_values,
    eval_term,
    oracle_equiv,
)


def record(n: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (title, ok, detail)
    print(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _unique_terms(cases):
    seen = {}
    for c in cases:
        for e in (c.left, c.right):
            key = (tuple(c.ctx), c.goal, e)
            seen.setdefault(key, (c.ctx, c.goal, e))
    return list(seen.values())


def test_criterion_1_golden_equivalence():
    j = load_judgment("inconsistent_context.judgment")
    (_, a), (_, b) = j.terms
    t0 = time.perf_counter()
    v = decide_equiv(j.context, a, b, j.goal)
    dt = time.perf_counter() - t0
    ok = v.equivalent and v.witness is None and dt < 1.0
    record(1, "golden equivalence", ok, f"verdict={v.label} seconds={dt:.3f}")


def test_criterion_2_golden_inequivalence():
    j = load_judgment("two_observations.judgment")
    (_, a), (_, b) = j.terms
    t0 = time.perf_counter()
    v = decide_equiv(j.context, a, b, j.goal)
    dt = time.perf_counter() - t0
    w = v.witness
    ok = not v.equivalent and w is not None and dt < 1.0
    detail = f"verdict={v.label} seconds={dt:.3f}"
    if ok:
        verify_witness(w)
        model, _, context = parse_witness(serialize_witness(w))
        two = cardinality(model["X"]) == 2
        # Re-evaluate from the printed witness alone.
        outs = []
        for e in (a, b):
            closed = plug(context, close_term(model, e))
            typecheck([], closed, BOOL)
            outs.append(eval_term([], closed, {}, BOOL))
        ok = two and outs[0] != outs[1] and {outs[0], outs[1]} == set(enumerate_values(BOOL))
        detail += f" model.X={print_type(model['X'])} booleans={outs[0]},{outs[1]}"
    record(2, "golden inequivalence", ok, detail)


def test_criterion_3_oracle_agreement(default_report):
    r = default_report
    n = len(r.results)
    agree = sum(x.status == "agree" for x in r.results)
    seconds = sum(x.seconds for x in r.results)
    ok = n >= 500 and agree == n and not r.divergences
    record(3, "oracle agreement", ok, f"pairs={n} agree={agree} cpu_seconds={seconds:.1f}")
    assert seconds < 600


def test_criterion_4_saturation_consistency(default_cases):
    contexts = violations = 0
    for c in default_cases:
        a = beta_normalize(c.ctx, elaborate_normal(c.ctx, c.left, c.goal))
        b = beta_normalize(c.ctx, elaborate_normal(c.ctx, c.right, c.goal))
        r = saturate_pair(c.ctx, c.goal, a, b)
        for g in r.final_contexts:
            contexts += 1
            if not (is_saturated(g, r.subformulas) and consistent(g)):
                violations += 1
    ok = contexts > 0 and violations == 0
    record(4, "saturation consistency", ok, f"final_contexts={contexts} violations={violations}")


def test_criterion_5_funless_bijection():
    types = closed_types(4)
    violations = values = terms = 0
    for t in types:
        d = dataty(t)
        if not is_funless(d) or cardinality(t) != cardinality(d):
            violations += 1
        for v in enumerate_values(t):
            values += 1
            violations += refun_value(defun_value(v, t), t) != v
        for w in enumerate_values(d):
            violations += defun_value(refun_value(w, t), t) != w
        if is_funless(t):
            for e in enumerate_terms([], t, 9):
                terms += 1
                v = eval_term([], e, {}, t)
                violations += not alpha_eq(reify_funless(v), e)
                violations += not alpha_eq(reify(v, t), e)
    ok = violations == 0
    record(5, "fun-less bijection", ok, f"types={len(types)} values={values} terms={terms} violations={violations}")


def _negative_judgments(rng: random.Random, count: int):
    types = [t for t in enumerate_types(["X"], 3) if "+" not in print_type(t) and "0" not in print_type(t)]
    for _ in range(count):
        ctx = [(f"h{i}", rng.choice(types)) for i in range(rng.randint(0, 2))]
        yield ctx, rng.choice(types)


def test_criterion_6_focusing_soundness(default_cases):
    terms = _unique_terms(default_cases)
    bad = 0
    for ctx, goal, e in terms:
        if not oracle_equiv(ctx, e, defocus(focus(ctx, e, goal)), 3, goal):
            bad += 1
    pol = {"X": "-"}
    pairs = neg_bad = 0
    for ctx, goal in _negative_judgments(random.Random(0), 150):
        try:
            inhabitants = enumerate_terms(ctx, goal, 6, budget=400)
        except BudgetExceeded:
            continue
        j = root_judgment(ctx, goal, pol)
        canon = [alpha_normal(icc_canon(focus(ctx, e, goal, pol), j.delta)) for e in inhabitants]
        for (a, ca), (b, cb) in itertools.combinations(zip(inhabitants, canon), 2):
            try:
                same = oracle_equiv(ctx, a, b, 3, goal)
            except BudgetExceeded:
                continue
            pairs += 1
            neg_bad += same != (ca == cb)
    ok = bad == 0 and neg_bad == 0 and pairs > 0
    record(6, "focusing soundness", ok, f"terms={len(terms)} bad={bad} negative_pairs={pairs} negative_bad={neg_bad}")


def test_criterion_7_confluence(default_cases):
    terms = _unique_terms(default_cases)
    rng = random.Random(7)
    runs = bad = 0
    for ctx, goal, e in terms:
        # Corpus terms are beta-normal, so every expansion must reduce back to e.
        expanded = beta_expand(e, rng, steps=4)
        ref = beta_normalize(ctx, expanded)
        bad += not alpha_eq(ref, e)
        bad += not alpha_eq(beta_normalize(ctx, ref), ref)
        for seed in range(100):
            pick = random.Random(seed)
            out = normalize_with(expanded, lambda paths: pick.randrange(len(paths)))
            runs += 1
            bad += not alpha_eq(out, ref)
    ok = bad == 0
    record(7, "confluence and normalization", ok, f"terms={len(terms)} strategy_runs={runs} bad={bad}")


def test_criterion_8_finite_model_property(default_report):
    ineq = [r for r in default_report.results if r.verdict == "INEQUIVALENT"]
    unverified = [r.index for r in ineq if not r.witness_verified]
    ok = bool(ineq) and not unverified
    record(8, "finite model property", ok, f"inequivalent={len(ineq)} unverified={len(unverified)}")

