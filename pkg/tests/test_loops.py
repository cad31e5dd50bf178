"""Loop compilation: characteristic assertions, encoded-state helpers,
the one-step template, paths, and the full encoding."""

import random
from fractions import Fraction as F

import pytest

from wpengine.errors import ContainsLoop, FreeVarsOutsideVarSet
from wpengine.goedel import encode_state, encode_state_seq, logical_var
from wpengine.loops import (
    body_wp_template,
    char_assertion,
    encode_loop,
    goedel_apply,
    goedel_subst,
    path_expectation,
    primed,
)
from wpengine.parser import parse_exp, parse_program
from wpengine.semantics import ORACLE, calkin_wilf, eval_exp, state
from wpengine.syntax import (
    RatLit,
    Var,
    While,
    print_exp,
    subst_exp_many,
)
from wpengine.wp import VarSet, kleene_iterate, path_sum, wp_loop_free
from wpengine.xreal import XReal, ZERO

GEO = parse_program("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }")
POST_X = parse_exp("x")
VS = VarSet.of("c", "x")
DOM = calkin_wilf(0)

import functools


@functools.lru_cache(maxsize=1)
def geo_path():
    v1, v2 = logical_var("length"), logical_var("v")
    return v1, v2, path_expectation(GEO, POST_X, VS, v1, v2)


def oracle(f, sigma):
    return eval_exp(f, sigma, DOM, mode=ORACLE)


def test_char_assertion():
    ca = char_assertion(state(x=1, c=0), VS)
    assert print_exp(ca) == "[c = 0 && x = 1] * 1"
    assert eval_exp(ca, state(x=1, c=0)) == XReal.of(1)
    assert eval_exp(ca, state(x=2, c=0)) == ZERO
    # indicator of the class modulo the variable set
    assert eval_exp(ca, state(x=1, c=0, other=5)) == XReal.of(1)


def test_goedel_subst_decodes_and_substitutes():
    num = logical_var("n")
    term = goedel_subst(parse_exp("x + y"), VarSet.of("x", "y"), num)
    code = encode_state(state(x=1, y=2), VarSet.of("x", "y")).num
    sigma = state(z=5).set(num, code)
    assert oracle(term, sigma) == XReal.of(3)


def test_goedel_subst_constant_unchanged():
    num = logical_var("n")
    term = goedel_subst(parse_exp("7/2"), VS, num)
    code = encode_state(state(c=1, x=0), VS).num
    assert oracle(term, state().set(num, code)) == XReal.of(F(7, 2))


def test_goedel_apply_examples():
    num = logical_var("n")
    term = goedel_apply(parse_exp("[!(c = 1)] * x"), VS, num)
    code = encode_state(state(c=0, x=3), VS).num
    assert oracle(term, state().set(num, code)) == XReal.of(3)
    code2 = encode_state(state(c=1, x=3), VS).num
    assert oracle(term, state().set(num, code2)) == ZERO


def test_goedel_apply_ambient_independence():
    rng = random.Random(23)
    num = logical_var("n")
    term = goedel_apply(parse_exp("[!(c = 1)] * x"), VS, num)
    code = encode_state(state(c=0, x=3), VS).num
    values = set()
    for _ in range(10):
        ambient = state(c=rng.randint(0, 1), x=rng.randint(0, 9),
                        q=rng.randint(0, 3)).set(num, code)
        values.add(oracle(term, ambient))
    assert values == {XReal.of(3)}


def test_goedel_apply_requires_covered_vars():
    with pytest.raises(FreeVarsOutsideVarSet):
        goedel_apply(parse_exp("q + x"), VS, logical_var("n"))


def test_goedel_subst_apply_roundtrip():
    """Substituting an encoded state agrees with evaluating there: 50 pairs."""
    rng = random.Random(29)
    from wpengine.checks import rand_qf_exp

    num = logical_var("n")
    for _ in range(10):
        f = rand_qf_exp(rng, [Var("c"), Var("x")], 2)
        applied = goedel_apply(f, VS, num)
        for _ in range(5):
            target = state(c=rng.randint(0, 1),
                           x=F(rng.randint(0, 6), rng.randint(1, 3)))
            code = encode_state(target, VS).num
            sigma = state(c=9, x=9).set(num, code)
            assert oracle(applied, sigma) == eval_exp(f, target)


def test_body_template_geometric():
    g = body_wp_template(GEO, VS)
    cp, xp = primed(Var("c")), primed(Var("x"))
    # one-step transition values out of (c=1, x=0)
    into_01 = subst_exp_many(g, [(cp, RatLit(F(0))), (xp, RatLit(F(1)))])
    assert eval_exp(into_01, state(c=1, x=0)) == XReal.of(F(1, 2))
    into_11 = subst_exp_many(g, [(cp, RatLit(F(1))), (xp, RatLit(F(1)))])
    assert eval_exp(into_11, state(c=1, x=0)) == XReal.of(F(1, 2))
    # the skip branch keeps the state
    stay = subst_exp_many(g, [(cp, RatLit(F(0))), (xp, RatLit(F(5)))])
    assert eval_exp(stay, state(c=0, x=5)) == XReal.of(1)
    mismatch = subst_exp_many(g, [(cp, RatLit(F(1))), (xp, RatLit(F(0)))])
    assert eval_exp(mismatch, state(c=0, x=0)) == ZERO


def test_body_template_matches_wp_of_indicator():
    """Instantiating the primes equals the one-step transformer directly."""
    rng = random.Random(37)
    from wpengine.loops import char_assertion
    from wpengine.syntax import Ite, Skip

    g = body_wp_template(GEO, VS)
    c_iter = Ite(GEO.cond, GEO.body, Skip())
    for _ in range(25):
        target = state(c=rng.randint(0, 1), x=rng.randint(0, 4))
        source = state(c=rng.randint(0, 1), x=rng.randint(0, 4))
        instantiated = subst_exp_many(
            g, [(primed(v), RatLit(target[v])) for v in VS])
        direct = wp_loop_free(c_iter, char_assertion(target, VS))
        assert eval_exp(instantiated, source) == eval_exp(direct, source)


def test_body_template_rejects_nested_loop():
    nested = While(GEO.cond, GEO)
    with pytest.raises(ContainsLoop):
        body_wp_template(nested, VS)


def test_path_trivial_single_state():
    v1, v2, path = geo_path()
    code = encode_state_seq([state(c=0, x=5)], VS)
    sigma = state().set(v1, 1).set(v2, code.num)
    assert oracle(path, sigma) == XReal.of(5)


def test_path_two_step_value():
    v1, v2, path = geo_path()
    code = encode_state_seq([state(c=1, x=0), state(c=0, x=1)], VS)
    sigma = state().set(v1, 2).set(v2, code.num)
    assert oracle(path, sigma) == XReal.of(F(1, 2))


def test_path_degenerate_lengths():
    v1, v2, path = geo_path()
    code = encode_state_seq([state(c=1, x=0), state(c=0, x=1)], VS)
    for bad_len in (F(3, 2), F(0)):
        sigma = state().set(v1, bad_len).set(v2, code.num)
        assert oracle(path, sigma) == ZERO


def test_encode_loop_requires_loop_free_body():
    nested = While(GEO.cond, GEO)
    with pytest.raises(ContainsLoop):
        encode_loop(nested, POST_X, VS)


def test_encode_loop_requires_covering_varset():
    with pytest.raises(ValueError):
        encode_loop(GEO, POST_X, VarSet.of("x"))


def test_plan_matches_oracles_geometric():
    encoding = encode_loop(GEO, POST_X, VS)
    s0 = state(c=1, x=0)
    for k in range(9):
        plan = encoding.plan_eval(s0, k)
        assert plan == kleene_iterate(GEO, POST_X, s0, k)
        assert plan == path_sum(GEO, POST_X, s0, VS, k)


def test_plan_guard_initially_false():
    encoding = encode_loop(GEO, POST_X, VS)
    for k in range(1, 6):
        assert encoding.plan_eval(state(c=0, x=7), k) == XReal.of(7)


def test_plan_monotone_and_converges():
    encoding = encode_loop(GEO, POST_X, VS)
    s0 = state(c=1, x=0)
    values = [encoding.plan_eval(s0, k) for k in range(12)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    limit = encoding.plan_sup(s0, 30)
    assert abs(limit.finite - 2) < F(1, 10 ** 6)
    # the loop's concise closed form: x + [c = 1] * 2
    concise = parse_exp("x + [c = 1] * 2")
    assert abs(limit.finite - eval_exp(concise, s0).finite) < F(1, 10 ** 6)


def test_pruned_enumeration_matches_unrestricted():
    """Support-pruned sequence enumeration equals the full small-domain sum.

    For a loop whose reachable values stay within a small grid, summing over
    all sequences drawn from the grid must give the same value: transitions
    outside the one-step support contribute zero factors.
    """
    prog = parse_program("while (c = 1) { {c := 0} [1/3] {x := 1 - x} }")
    post = parse_exp("x + 1")
    vs = VarSet.of("c", "x")
    encoding = encode_loop(prog, post, vs)
    sigma = state(c=1, x=0)

    import itertools

    from wpengine.semantics import State

    grid = [State({Var("c"): F(c), Var("x"): F(x)})
            for c in (0, 1) for x in (0, 1)]
    dom = calkin_wilf(0)
    rec = lambda f, s: eval_exp(f, s, dom, mode=ORACLE)
    for k in range(1, 5):
        full = ZERO
        for tail in itertools.product(grid, repeat=k - 1):
            seq = [sigma.restrict(vs)] + list(tail)
            codes = [encoding.state_code(s) for s in seq]
            full = full + encoding.path_value(codes, sigma, dom, rec)
        assert full == encoding.plan_eval(sigma, k)
        assert full == kleene_iterate(prog, post, sigma, k)


def test_pure_term_built_on_demand():
    encoding = encode_loop(GEO, POST_X, VS)
    assert encoding._pure is None
    pure = encoding.pure
    from wpengine.syntax import Sup, free_vars

    assert isinstance(pure, Sup)
    assert isinstance(pure.body, Sup)
    # closed over helpers: only program variables remain free
    assert free_vars(pure) <= {Var("c"), Var("x")}
