"""Syntactic sums and products over encoded partial aggregates.

``Sum[f, v]`` and ``Product[f, v]`` are single expectations denoting the
sum (resp. product) of ``f`` instantiated at the aggregation variable
``0..v``.  The pure terms guess a sequence of partial aggregates as one
encoded number: the sequence starts at the neutral element, every step
extends the previous aggregate by a rational drawn from the lower cut of
the corresponding instance of ``f`` (through the cut normal form of ``f``),
and the outer supremum squeezes the final aggregate up to the true value.

The pure terms are emitted in full but are astronomically infeasible to
evaluate by restricted quantifier search; each carries an evaluation plan
(an intrinsic tag on the root) that computes the same value directly by
iterating the aggregation index, which is the testable semantics.

The unrestricted product of two expectations is the two-factor product
aggregate; the alternative cut product multiplies the suprema of the two
lower cuts directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .normalform import to_dnf
from .semantics import State, eval_aexpr
from .syntax import (
    Add,
    AExpr,
    And as BAnd,
    Arith,
    Atom,
    Exp,
    FOImplies,
    FOOr,
    Guard,
    Inf,
    Lt,
    Mul,
    Plus,
    RatLit,
    Scale,
    Sup,
    Var,
    VarRef,
    aexpr,
    all_vars,
    eq_,
    fo_and_all,
    fresh_var,
    quantify,
    rename_bexpr,
    subst_bexpr,
    vars_aexpr,
    with_intrinsic,
)
from .goedel import fo_prenex, fo_to_exp, expand_nat_atoms, logical_var, relem_formula
from .xreal import ONE, XReal, ZERO, is_natural

SUM_VAR = Var("$s")
PROD_VAR = Var("$p")


class AggregatePlan:
    """Direct evaluation of a sum or product aggregate.

    Iterates the aggregation index from 0 to the bound (evaluated in the
    state), binding the index in the state rather than substituting a
    literal; the two give the same value, and binding keeps intrinsic tags
    on the body intact.  A non-natural bound yields 0, matching the falsity
    of the embedded naturalness guards.
    """

    survives_rewrite = False

    def __init__(self, body: Exp, agg_var: Var, bound: AExpr, kind: str):
        assert kind in ("sum", "product")
        self.body = body
        self.agg_var = agg_var
        self.bound = bound
        self.kind = kind

    def evaluate(self, node, sigma: State, dom, rec) -> XReal:
        bound = eval_aexpr(self.bound, sigma)
        if not is_natural(bound):
            return ZERO
        n = bound.numerator
        total = ZERO if self.kind == "sum" else ONE
        for j in range(n + 1):
            value = rec(self.body, sigma.set(self.agg_var, Fraction(j)))
            if self.kind == "sum":
                total = total + value
            else:
                total = total * value
                if total == ZERO:
                    return ZERO
        return total

    def __repr__(self):
        return f"AggregatePlan({self.kind})"


@dataclass(frozen=True)
class SumExp:
    body: Exp
    bound: AExpr
    pure: Exp


@dataclass(frozen=True)
class ProdExp:
    body: Exp
    bound: AExpr
    pure: Exp


def _aggregate_pure(body: Exp, bound: AExpr, kind: str, agg: Var) -> Exp:
    """The encoded-aggregate skeleton shared by sums and products.

    Guess the final aggregate v' and a code num; demand that num encodes a
    sequence starting at the neutral element whose successive entries grow
    by (sum) or scale by (product) a member of the lower cut of the body
    instance at each index, and that entry bound+1 equals v'.  The body's
    cut form supplies the cut membership test.
    """
    dnf = to_dnf(body)
    vp = logical_var("v'")
    num = logical_var("num")
    u = logical_var("u")
    z = logical_var("z")
    cut = dnf.cut_var
    neutral = RatLit(Fraction(0 if kind == "sum" else 1))
    combine = Add if kind == "sum" else Mul
    matrix = subst_bexpr(dnf.matrix, agg, VarRef(u))
    step_guard = FOOr(Atom(matrix), Atom(eq_(VarRef(cut), RatLit(Fraction(0)))))
    bracket = fo_and_all(
        [
            relem_formula(VarRef(num), RatLit(Fraction(0)), neutral),
            relem_formula(VarRef(num), Add(bound, RatLit(Fraction(1))), VarRef(vp)),
            FOImplies(
                fo_and_all(
                    [
                        Atom(Lt(VarRef(u), Add(bound, RatLit(Fraction(1))))),
                        relem_formula(VarRef(num), VarRef(u), VarRef(z)),
                        step_guard,
                    ]
                ),
                relem_formula(
                    VarRef(num),
                    Add(VarRef(u), RatLit(Fraction(1))),
                    combine(VarRef(z), VarRef(cut)),
                ),
            ),
        ]
    )
    embedded = fo_to_exp(fo_prenex(expand_nat_atoms(bracket)))
    inner = Inf(u, Inf(z, Sup(cut, quantify(list(dnf.prefix), embedded))))
    return Sup(vp, Sup(num, Scale(VarRef(vp), inner)))


def make_sum(body: Exp, bound, agg_var: Var = SUM_VAR) -> SumExp:
    """Sum of ``body`` instances at aggregation indices 0..bound.

    ``body`` uses the aggregation variable (by convention the reserved
    ``$s``); ``bound`` is a variable or term.  The returned pure term
    carries a plan whose evaluation at a state with a natural bound n
    equals the n+1-term sum.
    """
    bound = aexpr(bound)
    if agg_var in vars_aexpr(bound):
        raise ValueError("the bound must not mention the aggregation variable")
    pure = _aggregate_pure(body, bound, "sum", agg_var)
    tagged = with_intrinsic(pure, AggregatePlan(body, agg_var, bound, "sum"))
    return SumExp(body, bound, tagged)


def make_product(body: Exp, bound, agg_var: Var = PROD_VAR) -> ProdExp:
    """Product of ``body`` instances at aggregation indices 0..bound."""
    bound = aexpr(bound)
    if agg_var in vars_aexpr(bound):
        raise ValueError("the bound must not mention the aggregation variable")
    pure = _aggregate_pure(body, bound, "product", agg_var)
    tagged = with_intrinsic(pure, AggregatePlan(body, agg_var, bound, "product"))
    return ProdExp(body, bound, tagged)


def odot(f: Exp, g: Exp) -> Exp:
    """Unrestricted product of two expectations.

    Encoded as the two-factor product aggregate of the mix that selects
    ``f`` at index 0 and ``g`` at index 1, over an aggregation variable
    fresh for both operands; its plan evaluates to the pointwise product
    (with 0 * inf = 0).
    """
    agg = logical_var("p")
    mix = Plus(
        Guard(eq_(VarRef(agg), RatLit(Fraction(0))), f),
        Guard(eq_(VarRef(agg), RatLit(Fraction(1))), g),
    )
    return make_product(mix, RatLit(Fraction(1)), agg_var=agg).pure


class CutProductPlan:
    """Structured semantics of the cut product: multiply the factor values."""

    survives_rewrite = False

    def __init__(self, left: Exp, right: Exp):
        self.left = left
        self.right = right

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        return rec(self.left, sigma) * rec(self.right, sigma)


def dedekind_product(f: Exp, g: Exp, summand_cap: int = 16) -> Exp:
    """Product via suprema of the two lower cuts.

    Frame both factors in cut normal form over distinct cut variables,
    merge the prefixes (the operands are renamed apart by the cut
    construction's fresh prefixes), and take the supremum of the product of
    the two cut variables under the conjoined matrices.  Empty cuts
    annihilate, so 0 * inf = 0 holds.
    """
    d1 = to_dnf(f, summand_cap)
    d2 = to_dnf(g, summand_cap)
    avoid = (
        set(all_vars(f)) | set(all_vars(g))
        | {v for _, v in d1.prefix} | {v for _, v in d2.prefix}
        | {d1.cut_var, d2.cut_var}
    )
    cut2 = d2.cut_var
    if cut2 == d1.cut_var:
        cut2 = fresh_var(avoid, base="$cut")
        d2 = type(d2)(d2.prefix, cut2,
                      subst_bexpr(d2.matrix, d2.cut_var, VarRef(cut2)))
    shared = {v for _, v in d1.prefix} & {v for _, v in d2.prefix}
    if shared:
        mapping = {}
        for v in shared:
            v2 = fresh_var(avoid | set(mapping.values()), base=v.name)
            mapping[v] = v2
        d2 = type(d2)(
            tuple((q, mapping.get(v, v)) for q, v in d2.prefix),
            cut2,
            rename_bexpr(d2.matrix, mapping),
        )
    body = quantify(
        list(d1.prefix) + list(d2.prefix),
        Scale(
            Mul(VarRef(d1.cut_var), VarRef(cut2)),
            Guard(BAnd(d1.matrix, d2.matrix), Arith(RatLit(Fraction(1)))),
        ),
    )
    pure = Sup(d1.cut_var, Sup(cut2, body))
    return with_intrinsic(pure, CutProductPlan(f, g))
