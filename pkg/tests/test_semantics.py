"""Exact evaluation, quantifier domains, and the extended-real laws."""

import random
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from wpengine.parser import parse_aexpr, parse_bexpr, parse_exp
from wpengine.semantics import (
    QDomain,
    calkin_wilf,
    default_domain,
    eval_aexpr,
    eval_bexpr,
    eval_exp,
    state,
)
from wpengine.syntax import Arith, Guard, Inf, RatLit, Scale, Sup, Var, VarRef
from wpengine.xreal import XReal, ZERO, inf as xinf, sup as xsup, xsum


def test_eval_monus_truncates():
    assert eval_aexpr(parse_aexpr("3 - 5"), state()) == 0
    assert eval_aexpr(parse_aexpr("5 - 3"), state()) == 2


def test_eval_aexpr_examples():
    assert eval_aexpr(parse_aexpr("x + x"), state(x=F(1, 2))) == 1
    assert eval_aexpr(parse_aexpr("7/2 * x"), state(x=2)) == 7


def test_eval_bexpr_examples():
    assert eval_bexpr(parse_bexpr("1 < 2"), state())
    assert eval_bexpr(parse_bexpr("!(x < x)"), state(x=3))
    assert eval_bexpr(parse_bexpr("x = 1 && y < 1"), state(x=1, y=0))


def test_eval_exp_quantifier_free():
    assert eval_exp(parse_exp("[x < 1] * 5 + 3"), state(x=0)) == XReal.of(8)
    assert eval_exp(parse_exp("[x < 1] * 5 + 3"), state(x=1)) == XReal.of(3)


def test_sup_best_below_sqrt2():
    f = parse_exp("sup v: [v*v < 2] * v")
    assert eval_exp(f, state(), calkin_wilf(16)) == XReal.of(F(4, 3))


def test_zero_annihilates_unbounded_sup():
    f = Scale(RatLit(F(0)), parse_exp("sup v: v"))
    for size in (0, 4, 16):
        assert eval_exp(f, state(), calkin_wilf(size)) == ZERO


def test_empty_domain_extremes():
    dom = QDomain([])
    assert eval_exp(parse_exp("sup v: v"), state(), dom) == ZERO
    assert eval_exp(parse_exp("inf v: v + 1"), state(), dom) == XReal.INF


def test_calkin_wilf_prefix():
    assert list(calkin_wilf(0)) == [F(0)]
    assert list(calkin_wilf(3)) == [F(0), F(1), F(1, 2), F(2)]
    assert list(calkin_wilf(1, {F(7, 5)})) == [F(0), F(1), F(7, 5)]
    # deduplication
    assert list(calkin_wilf(3, {F(1, 2)})) == [F(0), F(1), F(1, 2), F(2)]


def test_default_domain_includes_constants():
    f = parse_exp("[x < 7/3] * 1")
    dom = default_domain(f, state(x=F(9, 4)), k=4)
    assert F(7, 3) in dom and F(9, 4) in dom


def test_state_semantics():
    sigma = state(x=1)
    assert sigma[Var("unbound")] == 0
    tau = sigma.set(Var("x"), 0)
    assert tau == state()
    assert sigma != tau
    assert sigma.set(Var("y"), F(1, 2))[Var("y")] == F(1, 2)
    # persistence
    assert sigma[Var("x")] == 1


def test_quantifier_free_independent_of_domain():
    rng = random.Random(3)
    from checks_support import rand_qf_exp_for_tests

    for _ in range(30):
        f = rand_qf_exp_for_tests(rng)
        sigma = state(x=rng.randint(0, 3), y=F(rng.randint(0, 6), 2))
        values = {eval_exp(f, sigma, calkin_wilf(k)) for k in (0, 3, 9)}
        assert len(values) == 1


def test_monotone_in_domain_for_sup_prefix():
    rng = random.Random(4)
    from checks_support import rand_qf_exp_for_tests

    for _ in range(30):
        body = rand_qf_exp_for_tests(rng, extra=[Var("v")])
        f = Sup(Var("v"), body)
        sigma = state(x=rng.randint(0, 3), y=1)
        small = eval_exp(f, sigma, calkin_wilf(3))
        large = eval_exp(f, sigma, calkin_wilf(9))
        assert small <= large
        g = Inf(Var("v"), body)
        assert eval_exp(g, sigma, calkin_wilf(3)) >= eval_exp(g, sigma, calkin_wilf(9))


def test_guard_idempotence():
    rng = random.Random(5)
    from checks_support import rand_qf_exp_for_tests

    for _ in range(30):
        body = rand_qf_exp_for_tests(rng)
        phi = parse_bexpr("x < 2")
        once = Guard(phi, body)
        twice = Guard(phi, Guard(phi, body))
        sigma = state(x=rng.randint(0, 3), y=F(rng.randint(0, 5), 3))
        dom = calkin_wilf(4)
        assert eval_exp(once, sigma, dom) == eval_exp(twice, sigma, dom)


# ---------------------------------------------------------------------------
# Extended-real laws behind the prenex rules
# ---------------------------------------------------------------------------

xreals = st.one_of(
    st.builds(lambda n, d: XReal.of(F(n, d)), st.integers(0, 9), st.integers(1, 9)),
    st.just(XReal.INF),
)
xreal_sets = st.lists(xreals, min_size=1, max_size=5)
finite_scalars = st.builds(lambda n, d: XReal.of(F(n, d)),
                           st.integers(0, 9), st.integers(1, 9))


@settings(max_examples=200, deadline=None)
@given(finite_scalars, xreal_sets)
def test_scalar_distributes_over_sup(c, values):
    assert c * xsup(values) == xsup([c * a for a in values])


@settings(max_examples=200, deadline=None)
@given(finite_scalars, xreal_sets)
def test_scalar_distributes_over_inf(c, values):
    assert c * xinf(values) == xinf([c * a for a in values])


@settings(max_examples=200, deadline=None)
@given(xreal_sets, xreal_sets)
def test_sup_of_sums(left, right):
    want = xsup(left) + xsup(right)
    got = xsup([a + b for a in left for b in right])
    assert got == want


@settings(max_examples=200, deadline=None)
@given(xreal_sets, xreal_sets)
def test_inf_of_sums(left, right):
    want = xinf(left) + xinf(right)
    got = xinf([a + b for a in left for b in right])
    assert got == want


def test_singleton_sup_inf():
    for a in (ZERO, XReal.of(F(7, 2)), XReal.INF):
        assert xsup([a]) == xinf([a]) == a


def test_zero_times_infinity():
    assert ZERO * XReal.INF == ZERO
    assert XReal.INF * ZERO == ZERO
    assert XReal.of(2) * XReal.INF == XReal.INF
    assert XReal.INF + ZERO == XReal.INF
    assert XReal.of(3) < XReal.INF
    assert not XReal.INF < XReal.INF


def test_xreal_serialization():
    assert str(XReal.of(F(7, 2))) == "7/2"
    assert str(XReal.INF) == "inf"
    assert str(ZERO) == "0"
