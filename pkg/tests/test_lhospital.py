import math

import numpy as np
import pytest

import randgen as rg
from conftest import CORPUS
from regcalc.fnfile import load
from regcalc.lhospital import (
    FAILED,
    VERIFIED,
    Seq,
    lhospital_limit,
    monotone_certify,
    reflected_problem,
    stolz_limit,
    stolz_spline,
)
from regcalc.limits import NO_LIMIT
from regcalc.regulated import HorizonExhausted, PiecewiseFn, identity
from regcalc.stieltjes import d_alpha


def statuses(rep):
    return {h.name: h.status for h in rep.hypotheses}


def test_quartic_cells_warn_that_the_ratio_only_settles_on_integers():
    fns = load(CORPUS / "quartic-cells.fn")
    rep = lhospital_limit(fns.function("f"), fns.function("g"), fns.function("id"))
    assert rep.ok and rep.conclusion == pytest.approx(1.0, abs=1e-6)
    assert any("shifted sequence" in w for w in rep.warnings)
    assert rep.details["case"] == "g->+inf"


def test_cube_root_alpha_is_a_zero_over_infinity_case():
    fns = load(CORPUS / "cube-root.fn")
    f, alpha = fns.function("f"), fns.function("alpha")
    rep = lhospital_limit(f, alpha, alpha)
    assert rep.ok and rep.agree
    assert abs(rep.conclusion) <= 1e-6
    # alpha' does not exist at odd integers, D_alpha f does and vanishes there
    assert d_alpha(f, alpha, 3.0).value == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("alpha_name, failing", [("id", "D_alpha g has constant sign"), ("g", "alpha strictly monotone")])
def test_sign_change_is_rejected(alpha_name, failing):
    fns = load(CORPUS / "sign-change.fn")
    rep = lhospital_limit(fns.function("f"), fns.function("g"), fns.function(alpha_name))
    assert not rep.ok and rep.conclusion is None
    assert statuses(rep)[failing] == FAILED
    if alpha_name == "id":
        assert rep.oracle.status == NO_LIMIT


def test_finite_endpoint_zero_over_zero():
    f = PiecewiseFn.from_expr("sin(x)", 0, 1)
    g = PiecewiseFn.from_expr("x", 0, 1)
    rep = lhospital_limit(f, g, identity(0, 1), "a")
    assert rep.ok and rep.details["case"] == "0/0"
    assert rep.conclusion == pytest.approx(1.0, rel=1e-9) and rep.agree


def test_neither_zero_nor_infinite_is_refused():
    f = PiecewiseFn.from_expr("1 + x", 0, 1)
    g = PiecewiseFn.from_expr("2 + x", 0, 1)
    rep = lhospital_limit(f, g, identity(0, 1), "b")
    assert statuses(rep)["0/0 or |g| -> inf"] == FAILED
    assert rep.conclusion is None


def test_decreasing_alpha_is_replaced_by_its_negative():
    fns = load(CORPUS / "jumps.fn")
    f, alpha = fns.function("f"), fns.function("alpha")
    rep = lhospital_limit(f, alpha, -1.0 * alpha)
    assert rep.ok and rep.conclusion == pytest.approx(1.0, abs=1e-6)
    assert any("-alpha" in w for w in rep.warnings)


def test_reflection_turns_the_left_end_into_the_right_end():
    f = PiecewiseFn.from_expr("exp(x) - 1", -1, 0)
    g = PiecewiseFn.from_expr("x", -1, 0)
    direct = lhospital_limit(f, g, identity(-1, 0), "b")
    rf, rg_, ra = reflected_problem(f, g, identity(-1, 0))
    mirrored = lhospital_limit(rf, rg_, ra, "a")
    assert direct.conclusion == pytest.approx(1.0, rel=1e-9)
    assert mirrored.conclusion == pytest.approx(direct.conclusion, rel=1e-9)


def test_random_jumping_instances():
    rng = np.random.default_rng(4)
    for _ in range(10):
        f, g, alpha, A = rg.composed(rng)
        rep = lhospital_limit(f, g, alpha, "b")
        assert rep.ok and rep.agree
        assert rep.conclusion == pytest.approx(A, rel=1e-7, abs=1e-9)


def test_report_json_is_plain():
    fns = load(CORPUS / "jumps.fn")
    doc = lhospital_limit(fns.function("f"), fns.function("alpha"), fns.function("alpha")).to_json()
    assert doc["rule"] == "lhospital"
    assert all(h["status"] == VERIFIED for h in doc["hypotheses"])
    assert doc["oracle"]["status"] == "converged"


# ---------------------------------------------------------------------------
# monotone rule


@pytest.mark.parametrize(
    "f, g, alpha, shift, want",
    [
        ("sq", "lin", "id", False, "strictly increasing"),
        ("fs", "gs", "id", True, "strictly increasing"),
        ("sine", "ident", "ident", False, "strictly decreasing"),
    ],
)
def test_monotone_certificates(f, g, alpha, shift, want):
    fns = load(CORPUS / "monotone.fn")
    rep = monotone_certify(fns.function(f), fns.function(g), fns.function(alpha), "a", shift=shift)
    assert rep.ok and rep.conclusion == want
    assert rep.agree and rep.oracle["violations"] == 0


def test_monotone_rule_needs_vanishing_ends():
    fns = load(CORPUS / "monotone.fn")
    rep = monotone_certify(fns.function("fs"), fns.function("gs"), fns.function("id"), "a")
    assert rep.conclusion is None
    assert statuses(rep)["f⁻, g⁻ -> 0 at a"] == FAILED


def test_monotone_rule_with_a_jumping_alpha():
    rng = np.random.default_rng(11)
    f, g, alpha, _ = rg.composed(rng)
    rep = monotone_certify(f, g, alpha, "b")
    # whatever is certified must be what the ratio does
    if rep.conclusion is not None:
        assert rep.agree


# ---------------------------------------------------------------------------
# Stolz-Cesaro


def test_spline_construction():
    s = Seq.from_expr("1/n")
    F = stolz_spline(s)
    ident = identity(0, math.inf)
    for m in (0, 1, 5, 40):
        # F(m + 1) = S_{m+2}, the partial sum up to m + 2
        assert F(m + 1.0) == pytest.approx(sum(1 / j for j in range(1, m + 3)), rel=1e-12)
        assert d_alpha(F, ident, m + 0.5, method="numeric").value == pytest.approx(s(m + 2), rel=1e-9)
        assert d_alpha(F, ident, m + 1.0, method="numeric").value == pytest.approx((s(m + 2) + s(m + 3)) / 2, rel=1e-9)


@pytest.mark.parametrize(
    "f, g, want",
    [("1", "1", 1.0), ("2*n + 1", "1", math.inf), ("1/n", "1", 0.0), ("n", "n^2", 0.0), ("3*n^2", "n^2 + 1", 3.0)],
)
def test_stolz_limits(f, g, want):
    rep = stolz_limit(Seq.from_expr(f), Seq.from_expr(g))
    assert rep.ok and rep.agree
    assert rep.conclusion == pytest.approx(want, abs=1e-6)


def test_stolz_from_a_table():
    seqs = load(CORPUS / "stolz-table.seq").sequences
    rep = stolz_limit(seqs["f"], seqs["g"])
    assert rep.details["probe"] == 4096
    assert rep.ok and rep.conclusion == pytest.approx(1.0, rel=1e-6)


def test_stolz_needs_positive_g():
    rep = stolz_limit(Seq.from_expr("1"), Seq.from_expr("n - 3"))
    assert statuses(rep)["g_n > 0"] == FAILED and rep.conclusion is None


def test_tables_end():
    s = Seq.from_table({1: 1.0, 2: 2.0})
    assert s(2) == 2.0
    with pytest.raises(HorizonExhausted):
        s(3)
    with pytest.raises(ValueError):
        Seq.from_table({1: 1.0, 3: 2.0})
