"""Packing sequences, rationals, and program states into single numbers.

A sequence of naturals is recovered from a pair (a, b) by taking remainders
a mod (1 + (i+1)b); the pair folds into one number with the pairing
polynomial.  Rationals ride on pairs of coprime numerator/denominator,
states are sequences of rationals, and state sequences stack once more.
Every encoding has a first-order formula and a concrete decision procedure,
and the two agree wherever the formula is small enough to model-check.
"""

from fractions import Fraction

from wpengine import state, print_fo
from wpengine.goedel import (
    beta_decode,
    beta_encode,
    cantor_pair,
    cantor_unpair,
    elem_formula,
    encode_rat_seq,
    encode_seq,
    encode_state,
    encode_state_seq,
    decode_state_seq,
    relem_holds,
    robinson_nat_formula,
    seq_minimal_bruteforce,
)
from wpengine.semantics import QDomain, eval_fo
from wpengine.syntax import Var, alit
from wpengine.wp import VarSet

print("pairing: (3, 5) ->", cantor_pair(3, 5), "->", cantor_unpair(cantor_pair(3, 5)))

seq = [3, 1, 4]
pair = beta_encode(seq)
print(f"\nremainder encoding of {seq}: base pair (a={pair.a}, b={pair.b})")
print("decoded:", [beta_decode(pair, i) for i in range(3)])
code = encode_seq(seq)
print("as a single number:", code.num)

least = seq_minimal_bruteforce([1, 2])
print(f"\ncanonical code of [1, 2] is {encode_seq([1, 2]).num}, "
      f"the least admissible code is {least}")
print("(the canonical encoder is deterministic, not minimal; see the notes)")

rats = [Fraction(1, 2), Fraction(3)]
rat_code = encode_rat_seq(rats)
print(f"\nrationals {[str(q) for q in rats]} encode to {rat_code.num}")
print("element check 1/2 at 0:", relem_holds(rat_code.num, 0, Fraction(1, 2)))
print("element check 1/3 at 0:", relem_holds(rat_code.num, 0, Fraction(1, 3)))

vs = VarSet.of("c", "x")
sigma = state(c=1, x=Fraction(7, 2))
st_code = encode_state(sigma, vs)
print(f"\nstate c=1, x=7/2 encodes to a {len(str(st_code.num))}-digit number")
run = [state(c=1, x=0), state(c=0, x=1)]
seq_code = encode_state_seq(run, vs)
print(f"a two-state run encodes to a {len(str(seq_code.num))}-digit number")
print("decoded run:", [f"c={s[Var('c')]},x={s[Var('x')]}"
                       for s in decode_state_seq(seq_code)])

# the formulas behind the oracles, model-checked at toy scale
formula = elem_formula(alit(cantor_pair(7, 2)), alit(0), alit(1))
dom = QDomain([Fraction(k) for k in range(12)])
print("\nelement formula at a toy code, decided by bounded search:",
      eval_fo(formula, state(), dom))
print("the same relation by the decision procedure:",
      beta_decode(beta_encode([1]), 0) == 1)

nat = robinson_nat_formula(Var("k"))
print("\nnaturalness of k via the squares identity (construction only):")
print(" ", print_fo(nat)[:110], "...")
