import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import randgen as rg
from conftest import CORPUS
from regcalc.fnfile import load
from regcalc.mvt import (
    PreconditionError,
    SignHypothesisFailed,
    WitnessNotFound,
    cauchy_coefficients,
    cauchy_witness,
    rolle_witness,
    sandwich_check,
)
from regcalc.regulated import PiecewiseFn, identity
from regcalc.stieltjes import d_alpha

seeds = st.integers(0, 2**32 - 1)


def test_rolle_for_a_jumping_derivative():
    # D f is never 0 on (-2, 1) but takes both signs, so the product is negative
    fns = load(CORPUS / "kink.fn")
    w = rolle_witness(fns.function("f"), fns.function("id"), -2.0, 1.0)
    assert w.product == pytest.approx(-8.0)
    assert {w.lhs_value, w.rhs_value} == {-2.0, 4.0}


def test_rolle_needs_matched_ends():
    f = PiecewiseFn.from_expr("x", -1, 2)
    with pytest.raises(PreconditionError):
        rolle_witness(f, identity(-1, 2), 0.0, 1.0)


def test_unreachable_tolerance_reports_the_search():
    f = PiecewiseFn.from_expr("(x - 0.5)^2", -1, 2)
    with pytest.raises(WitnessNotFound) as info:
        rolle_witness(f, identity(-1, 2), 0.0, 1.0, tol=-1.0, max_resolution=256)
    assert info.value.resolution == 256 and info.value.trace


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_rolle_witness_on_random_instances(seed):
    f, alpha = rg.mvt_instance(np.random.default_rng(seed))
    w = rolle_witness(f, alpha, 0.0, 1.0)
    assert 0.0 < w.u < 1.0 and 0.0 < w.v < 1.0
    assert w.product <= 1e-9
    # the reported values are D_alpha f at the witnesses
    assert w.lhs_value == pytest.approx(d_alpha(f, alpha, w.u).value)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_cauchy_witness_on_random_instances(seed):
    f, g, alpha = rg.sandwich_instance(np.random.default_rng(seed))
    w = cauchy_witness(f, g, alpha, 0.0, 1.0)
    assert w.product <= 1e-9
    c1, c2 = cauchy_coefficients(f, g, 0.0, 1.0)
    want = c1 * d_alpha(f, alpha, w.u).value - c2 * d_alpha(g, alpha, w.u).value
    assert w.lhs_value == pytest.approx(want, abs=1e-9)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_sandwich_on_random_instances(seed):
    f, g, alpha = rg.sandwich_instance(np.random.default_rng(seed))
    res = sandwich_check(f, g, alpha, 0.0, 1.0)
    assert res.ok
    assert res.lo <= res.hi


def test_sandwich_refuses_sign_changes():
    f = PiecewiseFn.from_expr("x", -1, 2)
    g = PiecewiseFn.from_expr("(x - 0.5)^2", -1, 2)
    with pytest.raises(SignHypothesisFailed):
        sandwich_check(f, g, identity(-1, 2), 0.0, 1.0)


def test_monotone_ratio_gives_the_sharper_bound():
    f = PiecewiseFn.from_expr("x^3", 0, 3)
    g = PiecewiseFn.from_expr("x^2", 0, 3)
    res = sandwich_check(f, g, identity(0, 3), 1.0, 2.0)
    # D f / D g = 3x/2 is increasing; (8 - 1)/(4 - 1) lies between 1.5 and 3
    assert res.monotone and res.ok_monotone
    assert res.ratio_s == pytest.approx(1.5) and res.ratio_t == pytest.approx(3.0)
    assert res.mid == pytest.approx(7 / 3)
