"""Loop-free preexpectations and the forward/backward duality.

The backward transformer rewrites a postexpectation through a program; the
forward semantics runs the program into an exact distribution over final
states.  For loop-free programs the two views must agree to the last digit,
and everything here is rational arithmetic, so they do.
"""

from wpengine import parse_exp, parse_program, print_exp, eval_exp, state
from wpengine.wp import VarSet, forward_dist, wp_loop_free

coin = parse_program("{x := 0} [1/3] {x := 1}")
post = parse_exp("x")

pre = wp_loop_free(coin, post)
print("program:      {x := 0} [1/3] {x := 1}")
print("post:         x")
print("preexpectation:", print_exp(pre))
print("value anywhere:", eval_exp(pre, state()))

dist = forward_dist(coin, state(), VarSet.of("x"), fuel=1)
print("\nforward distribution over final states:")
for sigma, weight in dist.items():
    print(f"  {dict((v.name, str(q)) for v, q in sigma.items())} with {weight}")
print("expected post:", dist.expectation(post))

# a branching program: the guard becomes the Iverson weight
branchy = parse_program(
    "if (x < 1) { {y := 2} [1/4] {y := 6} } else { y := x }"
)
pre2 = wp_loop_free(branchy, parse_exp("y"))
print("\nconditional program preexpectation:")
print(" ", print_exp(pre2))
for x0 in (0, 5):
    sigma = state(x=x0)
    backward = eval_exp(pre2, sigma)
    forward = forward_dist(branchy, sigma, VarSet.of("x", "y"), 1)
    print(f"  at x={x0}: backward {backward}, forward {forward.expectation(parse_exp('y'))}")

# subtraction is truncated at zero: '-' denotes monus
trunc = wp_loop_free(parse_program("z := x - 3"), parse_exp("z"))
print("\nmonus: wp(z := x - 3)(z) =", print_exp(trunc))
print("  at x=1:", eval_exp(trunc, state(x=1)), " at x=5:", eval_exp(trunc, state(x=5)))
