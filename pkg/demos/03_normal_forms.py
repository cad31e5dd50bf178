"""Normal forms: prenex, guarded-sum, and the lower-cut indicator.

Quantifiers pull to the front (renaming on the way out), the matrix
flattens to a sum of guarded terms, and from that shape the expectation
can be traded for a {0,1}-valued indicator of its own lower cut, from
which the value is recovered as a supremum.
"""

from fractions import Fraction

from wpengine import parse_exp, print_exp, eval_exp, state, calkin_wilf
from wpengine.normalform import dnf_recover, to_dnf, to_prenex, to_snf
from wpengine.semantics import QDomain
from wpengine.syntax import Arith, print_aexpr, print_bexpr

f = parse_exp("[x < 1] * ((sup v: [v < 3] * v) + 2)")
print("f =", print_exp(f))

pre = to_prenex(f)
print("prenex:", print_exp(pre.to_exp()))

snf = to_snf(f)
print("guarded summands:")
for phi, a in snf.summands:
    print(f"  [{print_bexpr(phi)}] * {print_aexpr(a, 2)}")

d = to_dnf(parse_exp("x"))
print("\ncut form of the expectation x (cut variable", str(d.cut_var) + "):")
print(" ", print_exp(d.to_exp()))
sigma = state(x=2)
dom = calkin_wilf(8)
for r in (Fraction(1), Fraction(2)):
    value = eval_exp(d.to_exp(), sigma.set(d.cut_var, r), dom)
    print(f"  at cut={r}: {value}  (cut < x is {r < 2})")

rec = dnf_recover(to_dnf(parse_exp("2")))
small = QDomain([Fraction(0), Fraction(1), Fraction(3, 2), Fraction(7, 4), Fraction(2)])
print("\nrecovering 2 from its cut over the domain {0, 1, 3/2, 7/4, 2}:")
print("  restricted value:", eval_exp(rec, state(), small),
      "(the largest domain element strictly below 2)")
