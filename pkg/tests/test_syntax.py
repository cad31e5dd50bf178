"""Parsing, printing, substitution, and variable analysis."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from debruijn import nameless, subst_nameless
from wpengine.errors import IllegalProduct, ParseError, ProbabilityOutOfRange
from wpengine.parser import (
    parse_aexpr,
    parse_bexpr,
    parse_exp,
    parse_fo,
    parse_program,
    parse_state,
)
from wpengine.semantics import calkin_wilf, eval_bexpr, eval_exp, state
from wpengine.syntax import (
    Add,
    And,
    Arith,
    Assign,
    Atom,
    Exists,
    Forall,
    Guard,
    Inf,
    Ite,
    Lt,
    Monus,
    Mul,
    Not,
    PChoice,
    Plus,
    RatLit,
    Scale,
    Seq,
    Skip,
    Sup,
    Var,
    VarRef,
    While,
    eq_,
    free_vars,
    fresh_var,
    le_,
    or_,
    print_exp,
    print_fo,
    print_program,
    subst_exp,
    true_,
)


def test_parse_skip():
    assert parse_program("skip") == Skip()


def test_parse_pchoice():
    prog = parse_program("{x := 0} [1/3] {x := 1}")
    assert prog == PChoice(Assign(Var("x"), RatLit(F(0))), F(1, 3),
                           Assign(Var("x"), RatLit(F(1))))


def test_parse_geometric_loop():
    prog = parse_program("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }")
    assert isinstance(prog, While)
    assert prog.cond == eq_(VarRef(Var("c")), RatLit(F(1)))
    assert isinstance(prog.body, Seq)
    assert isinstance(prog.body.first, PChoice)
    assert prog.body.second == Assign(Var("x"), Add(VarRef(Var("x")), RatLit(F(1))))


def test_parse_exp_examples():
    e = parse_exp("x + [c = 1] * 2")
    assert e == Plus(Arith(VarRef(Var("x"))),
                     Guard(eq_(VarRef(Var("c")), RatLit(F(1))), Arith(RatLit(F(2)))))
    e2 = parse_exp("sup v: [v*v < 2] * v")
    v = Var("v")
    assert e2 == Sup(v, Guard(Lt(Mul(VarRef(v), VarRef(v)), RatLit(F(2))),
                              Arith(VarRef(v))))


def test_illegal_product():
    with pytest.raises(IllegalProduct):
        parse_exp("(sup v: v) * (inf w: w)")


def test_bare_guard_rejected():
    with pytest.raises(ParseError):
        parse_exp("[x < 1]")


def test_probability_range():
    with pytest.raises(ProbabilityOutOfRange):
        parse_program("{skip} [3/2] {skip}")


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_program("x := ;")
    assert err.value.line == 1
    assert err.value.column == 6


def test_reserved_names_rejected_in_programs():
    with pytest.raises(ParseError):
        parse_program("$x := 1")
    # but fine in expectations
    assert parse_exp("$s + 1") == Plus(Arith(VarRef(Var("$s"))), Arith(RatLit(F(1))))


def test_monus_is_minus():
    a = parse_aexpr("3 - 5")
    assert a == Monus(RatLit(F(3)), RatLit(F(5)))


def test_comments():
    prog = parse_program("skip // trailing words\n; x := 1")
    assert prog == Seq(Skip(), Assign(Var("x"), RatLit(F(1))))


def test_sugar_lowering():
    core = parse_bexpr("x = 1")
    assert core == eq_(VarRef(Var("x")), RatLit(F(1)))
    assert parse_bexpr("x <= y") == le_(VarRef(Var("x")), VarRef(Var("y")))
    assert parse_bexpr("x > y") == Lt(VarRef(Var("y")), VarRef(Var("x")))
    assert parse_bexpr("true") == true_()
    lowered = parse_bexpr("x < 1 || y < 1")
    assert lowered == or_(Lt(VarRef(Var("x")), RatLit(F(1))),
                          Lt(VarRef(Var("y")), RatLit(F(1))))


def test_sugar_or_equivalence():
    """Or lowers to the double-negation form, pointwise."""
    phi = parse_bexpr("x < 1")
    psi = parse_bexpr("y < 1")
    lowered = Not(And(Not(phi), Not(psi)))
    for sx in range(3):
        for sy in range(3):
            sigma = state(x=sx, y=sy)
            assert eval_bexpr(or_(phi, psi), sigma) == eval_bexpr(lowered, sigma)


def test_free_vars():
    assert free_vars(parse_exp("sup v: v + x")) == {Var("x")}
    assert free_vars(parse_exp("[y < 1] * z")) == {Var("y"), Var("z")}


def test_fresh_var_priming():
    assert fresh_var({Var("v"), Var("v'")}) == Var("v''")
    assert fresh_var(set()) == Var("v")
    assert fresh_var({Var("x")}, base="x") == Var("x'")


def test_subst_direct():
    f = parse_exp("x + 1")
    got = subst_exp(f, Var("x"), parse_aexpr("2 * y"))
    assert got == Plus(Arith(Mul(RatLit(F(2)), VarRef(Var("y")))),
                       Arith(RatLit(F(1))))


def test_subst_bound_untouched():
    f = parse_exp("sup x: x")
    assert subst_exp(f, Var("x"), RatLit(F(5))) == f


def test_subst_capture_avoidance():
    f = parse_exp("sup v: v + x")
    got = subst_exp(f, Var("x"), VarRef(Var("v")))
    assert got == parse_exp("sup v': v' + v")
    # the nameless reference agrees
    assert nameless(got) == subst_nameless(nameless(f), "x", ("free", "v"))


# ---------------------------------------------------------------------------
# Round-trip and substitution properties
# ---------------------------------------------------------------------------

names = st.sampled_from(["x", "y", "z", "v", "w"])
rats = st.builds(F, st.integers(0, 9), st.integers(1, 9))


def aexprs(depth):
    leaf = st.one_of(st.builds(RatLit, rats),
                     st.builds(lambda n: VarRef(Var(n)), names))
    if depth == 0:
        return leaf
    sub = aexprs(depth - 1)
    return st.one_of(leaf, st.builds(Add, sub, sub), st.builds(Mul, sub, sub),
                     st.builds(Monus, sub, sub))


def bexprs(depth):
    comparison = st.one_of(
        st.builds(Lt, aexprs(1), aexprs(1)),
        st.builds(eq_, aexprs(1), aexprs(1)),
        st.builds(le_, aexprs(1), aexprs(1)),
    )
    if depth == 0:
        return comparison
    sub = bexprs(depth - 1)
    return st.one_of(comparison, st.builds(And, sub, sub), st.builds(Not, sub))


def exps(depth):
    # stays within the parser's image: the concrete syntax reads a
    # parenthesized sum of terms back as a sum of expectations, so compound
    # arithmetic enters only through scale factors and guards
    leaf = st.builds(Arith, st.one_of(st.builds(RatLit, rats),
                                      st.builds(lambda n: VarRef(Var(n)), names)))
    if depth == 0:
        return leaf
    sub = exps(depth - 1)
    quantified = st.builds(
        lambda ctor, n, body: ctor(Var(n), body),
        st.sampled_from([Sup, Inf]), names, sub,
    )
    return st.one_of(
        leaf,
        st.builds(Guard, bexprs(1), sub),
        st.builds(Scale, aexprs(1), sub),
        st.builds(Plus, sub, sub),
        quantified,
    )


def programs(depth):
    assign = st.builds(lambda n, a: Assign(Var(n), a), names, aexprs(1))
    leaf = st.one_of(st.just(Skip()), assign)
    if depth == 0:
        return leaf
    sub = programs(depth - 1)
    prob = st.builds(F, st.integers(0, 4), st.just(4))
    return st.one_of(
        leaf,
        st.builds(Seq, st.one_of(st.just(Skip()), assign), sub),
        st.builds(lambda a, p, b: PChoice(a, p, b), sub, prob, sub),
        st.builds(Ite, bexprs(1), sub, sub),
        st.builds(While, bexprs(1), sub),
    )


@settings(max_examples=120, deadline=None)
@given(exps(4))
def test_print_parse_roundtrip_exp(f):
    assert parse_exp(print_exp(f)) == f


@settings(max_examples=120, deadline=None)
@given(programs(4))
def test_print_parse_roundtrip_program(prog):
    assert parse_program(print_program(prog)) == prog


def fos(depth):
    atom = st.one_of(st.builds(Atom, st.builds(Lt, aexprs(1), aexprs(1))),
                     st.builds(Atom, st.builds(eq_, aexprs(1), aexprs(1))))
    if depth == 0:
        return atom
    sub = fos(depth - 1)
    from wpengine.syntax import FOAnd, FOImplies, FONot, FOOr, Nat

    return st.one_of(
        atom,
        st.builds(Nat, st.builds(Var, names)),
        st.builds(FOAnd, sub, sub),
        st.builds(FOOr, sub, sub),
        st.builds(FOImplies, sub, sub),
        st.builds(FONot, sub),
        st.builds(lambda n, b: Exists(Var(n), b), names, sub),
        st.builds(lambda n, b: Forall(Var(n), b), names, sub),
    )


@settings(max_examples=120, deadline=None)
@given(fos(4))
def test_print_parse_roundtrip_fo(p):
    assert parse_fo(print_fo(p)) == p


@settings(max_examples=80, deadline=None)
@given(exps(3), st.sampled_from(["x", "v"]), aexprs(1))
def test_subst_matches_nameless_reference(f, name, value):
    got = subst_exp(f, Var(name), value)
    want = subst_nameless(nameless(f), name, nameless(Arith(value))[1])
    assert nameless(got) == want


@settings(max_examples=60, deadline=None)
@given(exps(3), st.sampled_from(["x", "v"]), aexprs(1),
       st.integers(0, 5), st.integers(0, 6))
def test_substitution_lemma(f, name, value, dom_size, seed):
    """eval(f[x/a], s) = eval(f, s[x -> eval(a, s)]) for every finite domain."""
    from wpengine.semantics import eval_aexpr

    import random

    rng = random.Random(seed)
    sigma = state(**{n: F(rng.randint(0, 4), rng.randint(1, 3))
                     for n in ["x", "y", "z", "v", "w"]})
    x = Var(name)
    dom = calkin_wilf(dom_size)
    lhs = eval_exp(subst_exp(f, x, value), sigma, dom)
    rhs = eval_exp(f, sigma.set(x, eval_aexpr(value, sigma)), dom)
    assert lhs == rhs


def test_parse_state():
    sigma = parse_state("c=1,x=7/2")
    assert sigma[Var("c")] == 1
    assert sigma[Var("x")] == F(7, 2)
    assert sigma[Var("unbound")] == 0
    assert parse_state("") == state()


def test_print_program_roundtrip_geometric():
    text = "while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }"
    prog = parse_program(text)
    assert parse_program(print_program(prog)) == prog


@settings(max_examples=40, deadline=None)
@given(st.builds(Arith, aexprs(3)), st.integers(0, 4))
def test_compound_arith_leaves_roundtrip_semantically(f, seed):
    """Arith-with-structure prints to text that reparses to an equal value."""
    import random

    rng = random.Random(seed)
    sigma = state(**{n: F(rng.randint(0, 4), rng.randint(1, 3))
                     for n in ["x", "y", "z", "v", "w"]})
    reparsed = parse_exp(print_exp(f))
    assert eval_exp(reparsed, sigma) == eval_exp(f, sigma)
