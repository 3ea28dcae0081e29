"""Acceptance criteria 1-10, one test each.

Every test records a PASS/FAIL line that is repeated in the terminal summary.
"""

from __future__ import annotations

import io
import json
import math
import sys
import time

import numpy as np
import pytest

import randgen as rg
from conftest import CORPUS, record
from regcalc import cli, limits
from regcalc.expr import ExprError, diff, evaluate, parse, to_text
from regcalc.fnfile import load
from regcalc.lhospital import FAILED, lhospital_limit, stolz_limit
from regcalc.lsmeasure import ftc_check, lhospital_integral
from regcalc.mvt import WitnessNotFound, cauchy_witness, rolle_witness, sandwich_check
from regcalc.regulated import materialize
from regcalc.stieltjes import DerivativeFn, d_alpha


def rel_err(u: float, v: float) -> float:
    return abs(u - v) / max(abs(u), abs(v), 1e-300)


def test_criterion_1_quartic_cells():
    fns = load(CORPUS / "quartic-cells.fn")
    t0 = time.perf_counter()
    rep = lhospital_limit(fns.function("f"), fns.function("g"), fns.function("id"), "b")
    elapsed = time.perf_counter() - t0
    A = rep.conclusion
    ok = A is not None and abs(A - 1) <= 1e-6 and rep.agree and elapsed < 5.0
    record(1, ok, f"A={A!r} agree={rep.agree} oracle={rep.oracle.value!r} time={elapsed:.2f}s")
    assert ok


def test_criterion_2_cube_root():
    fns = load(CORPUS / "cube-root.fn")
    f, alpha = fns.function("f"), fns.function("alpha")
    rep = lhospital_limit(f, alpha, alpha, "b")
    A = rep.conclusion
    rng = np.random.default_rng(52)
    xs = list(rng.uniform(0.05, 200.0, 44)) + [1.0, 2.0, 3.0, 7.0, 10.0, 101.0]
    worst = 0.0
    for x in xs:
        n = math.ceil(x / 2) - 1  # x in (2n, 2n+2]
        want = np.cbrt((1 - (2 * n + 1) / x) ** 2)
        worst = max(worst, abs(d_alpha(f, alpha, x).value - want))
    ok = A is not None and abs(A) <= 1e-6 and worst <= 1e-7
    record(2, ok, f"A={A!r} max formula error={worst:.2e} over {len(xs)} points")
    assert ok


def test_criterion_3_jumps():
    fns = load(CORPUS / "jumps.fn")
    f, alpha = fns.function("f"), fns.function("alpha")
    rep = lhospital_limit(f, alpha, alpha, "b")
    A = rep.conclusion
    worst = max(abs(d_alpha(f, alpha, float(n)).value - (1 + 1 / (n + 1))) for n in range(1, 21))
    ok = A is not None and abs(A - 1) <= 1e-6 and worst <= 1e-9
    record(3, ok, f"A={A!r} max |D f(n) - (1 + 1/(n+1))|={worst:.1e}")
    assert ok


def test_criterion_4_point_values():
    fns = load(CORPUS / "oscillating.fn")
    ident = fns.function("id")
    d_abs = d_alpha(fns.function("absf"), ident, 0.0).value
    d_g = d_alpha(fns.function("g"), ident, 0.0).value
    ok = abs(d_abs) <= 1e-7 and abs(d_g - 1) <= 1e-7
    record(4, ok, f"D|t|(0)={d_abs!r} D g(0)={d_g!r}")
    assert ok


def test_criterion_5_negative_control():
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(["lhospital", str(CORPUS / "sign-change.fn"), "--f", "f", "--g", "g", "--alpha", "id", "--json"], out, err)
    doc = json.loads(out.getvalue())
    rep = doc["report"]
    sign = [h for h in rep["hypotheses"] if h["name"] == "D_alpha g has constant sign"]
    ok = code == 1 and sign and sign[0]["status"] == FAILED and rep["oracle"]["status"] == limits.NO_LIMIT
    record(5, bool(ok), f"exit={code} sign={sign[0]['status'] if sign else None} oracle={rep['oracle']['status']}")
    assert ok


def test_criterion_6_witnesses():
    rng = np.random.default_rng(6)
    found = {"rolle": 0, "cauchy": 0}
    sandwich_ok = 0
    N = 500
    for _ in range(N):
        f, alpha = rg.mvt_instance(rng)
        try:
            w = rolle_witness(f, alpha, 0.0, 1.0)
            found["rolle"] += w.product <= 1e-9 and w.grid_resolution <= 8192
        except WitnessNotFound:
            pass
    for _ in range(N):
        f, g, alpha = rg.sandwich_instance(rng)
        try:
            w = cauchy_witness(f, g, alpha, 0.0, 1.0)
            found["cauchy"] += w.product <= 1e-9 and w.grid_resolution <= 8192
        except WitnessNotFound:
            pass
        sandwich_ok += sandwich_check(f, g, alpha, 0.0, 1.0).ok
    ok = found["rolle"] >= 0.99 * N and found["cauchy"] >= 0.99 * N and sandwich_ok == N
    record(6, ok, f"rolle {found['rolle']}/{N} cauchy {found['cauchy']}/{N} sandwich {sandwich_ok}/{N}")
    assert ok


def test_criterion_7_ftc():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst, passed = 0.0, 0
    cases = [rg.ftc_pair(rng) + (0.0, 1.0) for _ in range(199)]
    jumping = load(CORPUS / "jumps.fn")
    cases.append((jumping.function("f"), jumping.function("alpha"), 0.5, 20.5))
    for h, alpha, s, t in cases:
        res = ftc_check(h, alpha, s, t)
        worst = max(worst, res.residual / (1 + abs(res.lhs)))
        passed += res.ok
    elapsed = time.perf_counter() - t0
    ok = passed == len(cases) and elapsed < 60.0
    record(7, ok, f"{passed}/{len(cases)} within rel 1e-6 (worst {worst:.1e}) in {elapsed:.1f}s")
    assert ok


def _same_class(A: float, oracle) -> bool:
    if oracle.diverged:
        return A == (math.inf if oracle.status == limits.DIVERGED_POS else -math.inf)
    if not oracle.converged or not math.isfinite(A):
        return False
    # a zero limit has no relative scale; 1e-9 absolute stands in for it
    return abs(A - oracle.value) <= 1e-6 * max(abs(A), abs(oracle.value)) or abs(A - oracle.value) <= 1e-9


def test_criterion_8_stolz():
    lines, ok = [], True
    for stem, want in (("constant", 1.0), ("harmonic", 0.0), ("odd", math.inf)):
        seqs = load(CORPUS / f"stolz-{stem}.seq").sequences
        rep = stolz_limit(seqs["f"], seqs["g"], probe=10**6)
        checks = [h for h in rep.hypotheses if h.name.startswith("D F = f_{m+2}")]
        built = bool(checks) and checks[0].evidence["F"]["ok"] and checks[0].evidence["G"]["ok"]
        errs = [checks[0].evidence[k]["max_rel_err"] for k in "FG"] if checks else [math.nan]
        match = rep.conclusion is not None and _same_class(rep.conclusion, rep.oracle)
        exact = rep.conclusion is not None and (rep.conclusion == want or abs(rep.conclusion - want) <= 1e-6)
        ok &= bool(built and match and exact)
        lines.append(f"{stem}: A={rep.conclusion!r} direct={rep.oracle.status} {rep.oracle.value!r} construction err={max(errs):.1e}")
    record(8, ok, "; ".join(lines))
    assert ok


def test_criterion_9_cross_rule():
    # the integral rule concludes from u/v, i.e. the same D f / D g ratio, so its
    # independent evidence is the ratio of integrals (its oracle); both are held
    # to 1e-6 against the limit rule and against the closed-form A
    rng = np.random.default_rng(9)
    worst = {"conclusions": 0.0, "integral oracle": 0.0, "exact": 0.0}
    agreeing, N = 0, 50
    for _ in range(N):
        f, g, alpha, exact = rg.composed(rng)
        lim = lhospital_limit(f, g, alpha, "b")
        integ = lhospital_integral(DerivativeFn(f, alpha), DerivativeFn(g, alpha), alpha, "b")
        if lim.conclusion is None or integ.conclusion is None or integ.oracle is None or not integ.oracle.converged:
            continue
        errs = {
            "conclusions": rel_err(lim.conclusion, integ.conclusion),
            "integral oracle": rel_err(lim.conclusion, integ.oracle.value),
            "exact": rel_err(lim.conclusion, exact),
        }
        for k, v in errs.items():
            worst[k] = max(worst[k], v)
        agreeing += all(v <= 1e-6 for v in errs.values()) and bool(integ.agree)
    ok = agreeing == N
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record(9, ok, f"{agreeing}/{N} instances agree (worst rel: {detail})")
    assert ok


def _fd_check(e, x: float) -> bool | None:
    """True/False for the derivative check at x, None when x sits too close to a singularity."""
    h = 1e-5
    try:
        d = evaluate(diff(e), x)
        fd = (evaluate(e, x + h) - evaluate(e, x - h)) / (2 * h)
        fd_half = (evaluate(e, x + h / 2) - evaluate(e, x - h / 2)) / h
        fx = evaluate(e, x)
    except (ExprError, ArithmeticError, OverflowError, ValueError):
        return None
    if not all(map(math.isfinite, (d, fd, fd_half, fx))):
        return None
    # rounding in f(x ± h) swamps the quotient when |f(x)| is huge next to h
    if abs(fx) * sys.float_info.epsilon / h > 1e-7:
        return None
    # two step sizes disagree: a kink or pole is within reach of the stencil
    if abs(fd - fd_half) > 1e-6 * (1 + abs(fd)):
        return None
    return abs(d - fd) <= 1e-5 * (1 + abs(d))


def _fd_on_domain(e, rng, tries: int = 20) -> bool | None:
    """The derivative check at the first random x where e is smooth enough; None if none is found."""
    for _ in range(tries):
        r = _fd_check(e, float(rng.uniform(-3, 3)))
        if r is not None:
            return r
    return None


def _one_sided_equivalence(f) -> bool:
    pts = rg.knot_grid(f)
    lm = np.array([f.left_limit(x) for x in pts])
    rp = np.array([f.right_limit(x) for x in pts])
    p1 = bool(np.all(np.diff(lm) > 0))
    p2 = bool(np.all(np.diff(rp) > 0))
    i, j = np.triu_indices(len(pts), 1)
    p3 = bool(np.all(rp[i] < lm[j]))
    return p1 == p2 == p3


def _idempotent(f) -> bool:
    fm, fp = materialize(f, -1), materialize(f, 1)
    for q in f.knots(0.0, 1.0):
        lm, rp = f.left_limit(q), f.right_limit(q)
        for g in (fm, fp):
            if abs(g.left_limit(q) - lm) > 1e-9 or abs(g.right_limit(q) - rp) > 1e-9:
                return False
        if abs(fm(q) - lm) > 1e-9 or abs(fp(q) - rp) > 1e-9:
            return False
    return True


def test_criterion_10_property_suites():
    rng = np.random.default_rng(10)
    trees = [rg.random_tree(rng) for _ in range(10_000)]
    round_trip = sum(parse(to_text(e)) == e for e in trees)
    # diff vs FD needs differentiable trees: draw until 10^4 have a smooth point
    fd_checked = fd_ok = discarded = 0
    while fd_checked < 10_000:
        r = _fd_on_domain(rg.random_tree(rng), rng)
        if r is None:
            discarded += 1
            continue
        fd_checked += 1
        fd_ok += r
    fns = [rg.regulated_fn(rng) for _ in range(200)]
    idem = sum(_idempotent(f) for f in fns)
    equiv = sum(_one_sided_equivalence(f) for f in fns)
    ok = round_trip == len(trees) and fd_ok == fd_checked and idem == 200 and equiv == 200
    record(
        10,
        ok,
        f"round-trip {round_trip}/{len(trees)}; diff vs FD {fd_ok}/{fd_checked} "
        f"({discarded} trees without a smooth point discarded); "
        f"idempotence {idem}/200; one-sided monotonicity equivalence {equiv}/200",
    )
    assert ok


@pytest.mark.parametrize("n", [1, 20])
def test_jumping_spot_values_are_jump_ratios(n):
    fns = load(CORPUS / "jumps.fn")
    res = d_alpha(fns.function("f"), fns.function("alpha"), float(n))
    assert res.method == "jump_ratio"
