import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import randgen as rg
from conftest import CORPUS
from regcalc.fnfile import load
from regcalc.lhospital import FAILED
from regcalc.lsmeasure import (
    ACViolation,
    Atom,
    LSMeasure,
    QuadratureFailed,
    bound_check,
    ftc_check,
    integrate,
    lhospital_integral,
    measure_interval,
    monotone_integral,
)
from regcalc.regulated import DomainError, PiecewiseFn, identity
from regcalc.stieltjes import DerivativeFn

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def measure_fns():
    return load(CORPUS / "measure.fn")


def test_atoms_and_density(measure_fns):
    m = LSMeasure(measure_fns.function("step"))
    assert m.atoms(0.0, 1.0) == [Atom(0.5, 1.0)]
    assert m.atom_mass(0.5) == 1.0 and m.atom_mass(0.25) == 0.0
    assert m.density(0.3) == pytest.approx(1.0)
    ok, direct, summed = m.check(0.0, 1.0)
    assert ok and direct == pytest.approx(2.0) and summed == pytest.approx(2.0)


def test_measure_of_intervals(measure_fns):
    m = LSMeasure(measure_fns.function("step"))
    # the ends of the domain are allowed, the atom counts only inside
    assert measure_interval(m, 0.0, 1.0) == pytest.approx(2.0)
    assert measure_interval(m, 0.0, 0.5) == pytest.approx(0.5)
    assert measure_interval(m, 0.25, 0.75) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        measure_interval(m, -0.5, 0.5)


def test_integrals_against_a_step(measure_fns):
    one, sq = measure_fns.function("one"), measure_fns.function("sq")
    m = LSMeasure(measure_fns.function("step"))
    assert integrate(one, m, 0.0, 1.0) == pytest.approx(2.0, rel=1e-10)
    # ∫ x^2 dx over (0, 1) plus the atom at 1/2
    assert integrate(sq, m, 0.0, 1.0) == pytest.approx(1 / 3 + 0.25, rel=1e-10)
    assert integrate(sq, m, 0.0, 1.0, atom_value=lambda x: 7.0) == pytest.approx(1 / 3 + 7.0, rel=1e-10)


def test_atoms_add_to_the_density_part():
    alpha = load(CORPUS / "jumps.fn").function("alpha")
    m = LSMeasure(alpha)
    # alpha has slope 1 and a unit jump at each integer
    one = PiecewiseFn.from_expr("1", 0, math.inf)
    assert integrate(one, m, 0.5, 1.5) == pytest.approx(2.0)
    assert measure_interval(m, 0.5, 2.5) == pytest.approx(integrate(one, m, 0.5, 2.5))
    assert measure_interval(m, 0.5, 2.5) == pytest.approx(4.0)


def test_jumping_measure_of_an_interval():
    fns = load(CORPUS / "jumps.fn")
    m = LSMeasure(fns.function("f"))
    # length 2 plus jumps 1 + 1/2 and 1 + 1/3
    want = 2.0 + 1.5 + 4 / 3
    assert measure_interval(m, 0.5, 2.5) == pytest.approx(want)
    assert integrate(PiecewiseFn.from_expr("1", 0, math.inf), m, 0.5, 2.5) == pytest.approx(want)


def test_ftc_on_the_corpus(measure_fns):
    sq, step = measure_fns.function("sq"), measure_fns.function("step")
    res = ftc_check(sq, step, 0.0, 1.0)
    assert res.ok and res.lhs == pytest.approx(1.0)
    res = ftc_check(step, step, 0.0, 1.0)
    assert res.ok and res.lhs == pytest.approx(2.0)


def test_ftc_refuses_jumps_the_measure_does_not_see(measure_fns):
    with pytest.raises(ACViolation) as info:
        ftc_check(measure_fns.function("jumpy"), measure_fns.function("id"), 0.0, 1.0)
    assert info.value.x == 0.5 and info.value.jump == pytest.approx(1.0)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_ftc_on_random_pairs(seed):
    rng = np.random.default_rng(seed)
    h, alpha = rg.ftc_pair(rng)
    s, t = sorted(rng.uniform(0.0, 1.0, 2).tolist())
    if t - s < 1e-3:
        s, t = 0.0, 1.0
    assert ftc_check(h, alpha, s, t).ok


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_bound_on_random_pairs(seed):
    h, alpha = rg.ftc_pair(np.random.default_rng(seed))
    res = bound_check(h, alpha, 0.0, 1.0, resolution=48)
    assert res.ok and res.pairs > 0
    assert res.worst <= 1e-9 * (1 + res.M)


def test_bound_is_tight_for_a_line():
    f = PiecewiseFn.from_expr("3*x", 0, 1)
    res = bound_check(f, identity(0, 1), 0.0, 1.0, resolution=16)
    assert res.M == pytest.approx(3.0)
    assert res.ok and abs(res.worst) <= 1e-9


def test_quadrature_failure_is_reported():
    f = PiecewiseFn.from_expr("1/sqrt(x)", 0, 1)
    m = LSMeasure(PiecewiseFn.from_expr("x + sin(1/x)", 0, 1))
    with pytest.raises(QuadratureFailed) as info:
        integrate(f, m, 0.0, 1.0)
    assert info.value.cell == 0


# ---------------------------------------------------------------------------
# L'Hospital rules with integrals


def test_integral_rule_with_convergent_tails(measure_fns):
    # ∫_(x,1) 2t dt / ∫_(x,1) dt = 1 + x -> 2 at 1
    rep = lhospital_integral(measure_fns.function("two_x"), measure_fns.function("one"), measure_fns.function("id"), "b")
    assert rep.details["statement"] == 1
    assert rep.ok and rep.agree
    assert rep.conclusion == pytest.approx(2.0, rel=1e-8)


@pytest.mark.slow
def test_integral_rule_for_the_jumping_example():
    fns = load(CORPUS / "jumps.fn")
    f, alpha = fns.function("f"), fns.function("alpha")
    one = PiecewiseFn.from_expr("1", 0, math.inf)
    rep = lhospital_integral(DerivativeFn(f, alpha), one, alpha, "b")
    assert rep.details["statement"] == 2
    assert rep.ok and rep.agree
    assert rep.conclusion == pytest.approx(1.0, abs=1e-6)


def test_integral_rule_needs_one_sign():
    u = PiecewiseFn.from_expr("1", 0, 1)
    v = PiecewiseFn.from_expr("x - 0.5", 0, 1)
    rep = lhospital_integral(u, v, identity(0, 1), "b")
    assert {h.name: h.status for h in rep.hypotheses}["v has constant sign"] == FAILED
    assert rep.conclusion is None


def test_monotone_integral_rule(measure_fns):
    u = PiecewiseFn.from_expr("cos(x)", 0, 1)
    rep = monotone_integral(u, measure_fns.function("one"), measure_fns.function("id"))
    # sin(x)/x decreases on (0, 1)
    assert rep.ok and rep.conclusion == "strictly decreasing"
    assert rep.agree and rep.oracle["violations"] == 0


def test_monotone_integral_rule_with_an_atom(measure_fns):
    rep = monotone_integral(measure_fns.function("two_x"), measure_fns.function("one"), measure_fns.function("step"))
    assert rep.ok and rep.conclusion == "strictly increasing"
    assert rep.agree
