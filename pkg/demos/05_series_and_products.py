"""Sums, products, and multiplying expectations that may not multiply.

The syntax forbids multiplying two arbitrary expectations, yet products are
expressible: a product (or sum) over indices 0..n is a single expectation
that guesses the encoded sequence of partial aggregates, and the two-factor
instance gives an unrestricted product.  An alternative route multiplies
the suprema of the two lower cuts.  Each construction carries an evaluation
plan; the emitted term itself is the deliverable.
"""

from fractions import Fraction

from wpengine import ORACLE, calkin_wilf, eval_exp, parse_exp, print_exp, state
from wpengine.semantics import QDomain
from wpengine.series import dedekind_product, make_product, make_sum, odot
from wpengine.syntax import Var

DOM = calkin_wilf(4)


def value(f, sigma):
    return eval_exp(f, sigma, DOM, mode=ORACLE)


harmonic = make_sum(parse_exp("1/$s"), Var("x"))
print("partial sums of sum over j of 1/j:")
for n in range(1, 9):
    print(f"  n={n}: {value(harmonic.pure, state(x=n))}")

factorial = make_product(parse_exp("[$p = 0] * 1 + [1 <= $p] * $p"), Var("n"))
print("\nproducts of 1 * 1 * 2 * ... * n:")
for n in range(7):
    print(f"  n={n}: {value(factorial.pure, state(n=n))}")

print("\nthe emitted sum term starts with (first 220 characters):")
print(" ", print_exp(harmonic.pure)[:220], "...")
print("  total length:", len(print_exp(harmonic.pure)), "characters")

f = parse_exp("[x < 1] * 5")
g = parse_exp("sup v: [v < 2] * v")
both = odot(f, g)
print("\nunrestricted product ([x<1]*5) (x) (sup v: [v<2]*v):")
print("  structured value at x=0:", value(both, state(x=0)))
rich = calkin_wilf(8, {Fraction(3, 2), Fraction(7, 4)})
print("  with the sup restricted to a domain reaching 7/4:",
      eval_exp(both, state(x=0), rich, mode=ORACLE))

cut = dedekind_product(parse_exp("2"), parse_exp("3"))
print("\ncut product of the constants 2 and 3:")
print("  structured:", value(cut, state()))
small = QDomain([Fraction(0), Fraction(1), Fraction(7, 4), Fraction(5, 2),
                 Fraction(11, 4), Fraction(3)])
print("  restricted over {0,1,7/4,5/2,11/4,3}:", eval_exp(cut, state(), small))
print("  (the restricted value is the best product of domain elements below the cuts)")

zero = dedekind_product(parse_exp("0"), parse_exp("sup v: v"))
print("\nempty cuts annihilate: 0 (x) unbounded =", value(zero, state()))
