"""Prenex, summation, and cut normal forms."""

import random
from fractions import Fraction as F

import pytest

from wpengine.errors import SummandBlowup
from wpengine.normalform import DNF, dnf_recover, to_dnf, to_prenex, to_snf
from wpengine.parser import parse_bexpr, parse_exp
from wpengine.semantics import QDomain, calkin_wilf, eval_exp, state
from wpengine.syntax import (
    And,
    Arith,
    Inf,
    Mul,
    Plus,
    RatLit,
    Scale,
    Sup,
    Var,
    VarRef,
    print_bexpr,
    print_exp,
    true_,
)
from wpengine.xreal import XReal, ZERO


def test_prenex_pull_over_plus():
    f = Plus(Sup(Var("v"), Arith(VarRef(Var("v")))), Arith(RatLit(F(1))))
    assert print_exp(to_prenex(f).to_exp()) == "sup v': v' + 1"


def test_prenex_pull_over_scale_inf():
    f = Scale(VarRef(Var("a")), Inf(Var("v"), Arith(VarRef(Var("v")))))
    assert print_exp(to_prenex(f).to_exp()) == "inf v': a * v'"


def test_prenex_quantifier_free_identity():
    f = parse_exp("[x < 1] * 2 + y")
    pre = to_prenex(f)
    assert pre.prefix == ()
    assert pre.matrix == f


def test_prenex_left_before_right():
    f = Plus(Sup(Var("v"), Arith(VarRef(Var("v")))),
             Inf(Var("w"), Arith(VarRef(Var("w")))))
    pre = to_prenex(f)
    assert [(q.__name__, v.name) for q, v in pre.prefix] == \
        [("Sup", "v'"), ("Inf", "w'")]


def test_prenex_distinct_prefix_variables():
    inner = Sup(Var("v"), Arith(VarRef(Var("v"))))
    f = Plus(inner, inner)
    pre = to_prenex(f)
    names = [v for _, v in pre.prefix]
    assert len(names) == len(set(names))


def test_snf_base_case():
    snf = to_snf(parse_exp("x"))
    assert len(snf.summands) == 1
    phi, a = snf.summands[0]
    assert phi == true_()
    assert a == VarRef(Var("x"))
    # a sum of two plain terms gives one guarded summand each
    assert len(to_snf(parse_exp("x + 1")).summands) == 2


def test_snf_guard_distribution():
    f = parse_exp("[x < 1] * ([y < 1] * 3 + z)")
    snf = to_snf(f)
    rendered = [(print_bexpr(phi), print_exp(Arith(a))) for phi, a in snf.summands]
    assert rendered == [("x < 1 && y < 1", "3"), ("x < 1", "z")]


def test_snf_scale_distribution():
    f = Scale(VarRef(Var("c")), parse_exp("[x < 1] * y"))
    snf = to_snf(f)
    assert len(snf.summands) == 1
    phi, a = snf.summands[0]
    assert a == Mul(VarRef(Var("c")), VarRef(Var("y")))


def test_snf_semantic_equivalence():
    rng = random.Random(11)
    from wpengine.checks import rand_exp

    for _ in range(40):
        f = rand_exp(rng, [Var("x"), Var("y")], 3)
        snf = to_snf(f)
        for _ in range(5):
            sigma = state(x=F(rng.randint(0, 4), rng.randint(1, 3)),
                          y=rng.randint(0, 3))
            dom = calkin_wilf(5, {F(rng.randint(0, 5), rng.randint(1, 4))})
            assert eval_exp(f, sigma, dom) == eval_exp(snf.to_exp(), sigma, dom)


def test_dnf_of_plain_variable():
    d = to_dnf(parse_exp("x"))
    assert d.cut_var == Var("$cut")
    de = d.to_exp()
    sigma = state(x=2)
    dom = calkin_wilf(6)
    assert eval_exp(de, sigma.set(d.cut_var, 1), dom) == XReal.of(1)
    assert eval_exp(de, sigma.set(d.cut_var, 2), dom) == ZERO


def test_dnf_of_zero():
    d = to_dnf(parse_exp("0"))
    de = d.to_exp()
    for r in (F(0), F(1), F(5, 2)):
        assert eval_exp(de, state().set(d.cut_var, r), calkin_wilf(4)) == ZERO


def test_dnf_sup_guarded():
    f = parse_exp("sup v: [v < 3] * v")
    d = to_dnf(f)
    dom = calkin_wilf(8, {F(5, 2)})
    de = d.to_exp()
    assert eval_exp(de, state().set(d.cut_var, 2), dom) == XReal.of(1)
    assert eval_exp(de, state().set(d.cut_var, 3), dom) == ZERO


def test_dnf_enumerates_all_sign_patterns():
    f = parse_exp("[x < 1] * 2 + [y < 1] * 3")
    d = to_dnf(f)
    # 2 summands: 4 conjuncts, no simplification of exclusive guards
    def count_conjuncts(phi) -> int:
        match phi:
            case And(l, r):
                return count_conjuncts(l) + count_conjuncts(r)
            case _:
                return 1

    assert count_conjuncts(d.matrix) == 4


def test_dnf_summand_cap():
    f = parse_exp("[x < 1] * 1 + [x < 2] * 1 + [x < 3] * 1")
    with pytest.raises(SummandBlowup):
        to_dnf(f, summand_cap=2)


def test_recover_constant():
    rec = dnf_recover(to_dnf(parse_exp("2")))
    dom = QDomain([F(0), F(1), F(3, 2), F(7, 4), F(2)])
    assert eval_exp(rec, state(), dom) == XReal.of(F(7, 4))


def test_recover_zero():
    rec = dnf_recover(to_dnf(parse_exp("0")))
    assert eval_exp(rec, state(), calkin_wilf(6)) == ZERO


def test_recover_attains_value_when_domain_hits():
    rec = dnf_recover(to_dnf(parse_exp("x")))
    sigma = state(x=F(3, 2))
    dom = QDomain([F(0), F(1), F(5, 4), F(3, 2)])
    # the largest domain element strictly below 3/2
    assert eval_exp(rec, sigma, dom) == XReal.of(F(5, 4))


def test_dnf_cut_var_fresh_and_distinct():
    f = parse_exp("sup v: [v < x] * v")
    d = to_dnf(f)
    assert d.cut_var not in {v for _, v in d.prefix}
    assert d.cut_var.reserved
