"""The weakest-preexpectation transformer and its semantic cross-checks.

``wp_loop_free`` is purely syntactic: it rewrites a postexpectation
backwards through a loop-free program.  Loops are handled semantically by
three mutually independent oracles that must agree at every depth k:

* ``kleene_iterate`` -- k-fold application of the loop's characteristic
  function, computed by memoized recursion over states;
* ``path_sum`` -- the k-truncated sum over state sequences, each weighted by
  the product of one-step transition values;
* ``char_apply`` iterated syntactically from the zero expectation.

``forward_dist`` is the forward (distribution-transformer) semantics used to
validate the backward transformer via the duality between the two views.
All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ContainsLoop, FuelExceeded
from .semantics import State, eval_aexpr, eval_bexpr, eval_exp
from .syntax import (
    Arith,
    Assign,
    Exp,
    Guard,
    Ite,
    Not,
    PChoice,
    Plus,
    Program,
    RatLit,
    Scale,
    Seq,
    Skip,
    Var,
    VarRef,
    While,
    and_all,
    contains_loop,
    eq_,
    free_vars,
    subst_exp,
    vars_program,
)
from .xreal import XReal, ZERO, format_rat

DEFAULT_STATE_CAP = 100_000


@dataclass(frozen=True)
class VarSet:
    """Ordered, duplicate-free list of relevant variables.

    The order is significant: it indexes positional encodings of states.
    """

    variables: tuple[Var, ...]

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variables in variable set")

    @staticmethod
    def of(*names) -> "VarSet":
        return VarSet(tuple(Var(n) if isinstance(n, str) else n for n in names))

    @staticmethod
    def for_program(prog: Program, *exps: Exp) -> "VarSet":
        seen = vars_program(prog)
        for f in exps:
            seen |= free_vars(f)
        return VarSet(tuple(sorted(seen)))

    def __iter__(self):
        return iter(self.variables)

    def __len__(self):
        return len(self.variables)

    def __contains__(self, var: Var) -> bool:
        return var in self.variables

    def issuperset(self, other) -> bool:
        return set(self.variables) >= set(other)


class Dist:
    """Finite subdistribution over states with exact rational weights.

    Keys are states restricted to the relevant variables; zero-weight
    entries are dropped and the total mass never exceeds 1.
    """

    __slots__ = ("weights", "mass")

    def __init__(self, weights: dict[State, Fraction]):
        cleaned = {s: w for s, w in weights.items() if w != 0}
        mass = sum(cleaned.values(), Fraction(0))
        if any(w < 0 for w in cleaned.values()) or mass > 1:
            raise ValueError("weights must be non-negative with mass <= 1")
        self.weights = cleaned
        self.mass = mass

    def expectation(self, f: Exp) -> XReal:
        """Expected value of a quantifier-free postexpectation."""
        total = ZERO
        for sigma, weight in self.weights.items():
            total = total + XReal.of(weight) * eval_exp(f, sigma)
        return total

    def items(self):
        return self.weights.items()

    def __len__(self):
        return len(self.weights)

    def to_json(self, varset: VarSet) -> dict:
        entries = []
        for sigma in sorted(self.weights, key=lambda s: tuple(s[v] for v in varset)):
            entries.append(
                {
                    "state": {v.name: format_rat(sigma[v]) for v in varset},
                    "weight": format_rat(self.weights[sigma]),
                }
            )
        return {"entries": entries, "mass": format_rat(self.mass)}


# ---------------------------------------------------------------------------
# Syntactic transformer
# ---------------------------------------------------------------------------

def wp_loop_free(prog: Program, post: Exp) -> Exp:
    """Backward transform of ``post`` through a loop-free program.

    skip keeps the postexpectation, an assignment substitutes, sequencing
    composes, and both kinds of branching form convex sums, with the guard
    as the Iverson weight in the conditional case.
    """
    match prog:
        case Skip():
            return post
        case Assign(var, expr):
            return subst_exp(post, var, expr)
        case Seq(first, second):
            return wp_loop_free(first, wp_loop_free(second, post))
        case PChoice(left, p, right):
            return Plus(
                Scale(RatLit(p), wp_loop_free(left, post)),
                Scale(RatLit(1 - p), wp_loop_free(right, post)),
            )
        case Ite(cond, then, orelse):
            return Plus(
                Guard(cond, wp_loop_free(then, post)),
                Guard(Not(cond), wp_loop_free(orelse, post)),
            )
        case While():
            raise ContainsLoop("wp_loop_free cannot transform a while loop")
    raise TypeError(prog)


@dataclass(frozen=True)
class CharFn:
    """One-iteration unrolling operator of a loop w.r.t. a postexpectation."""

    guard: object
    body: Program
    post: Exp

    @staticmethod
    def of(loop: While, post: Exp) -> "CharFn":
        return CharFn(loop.cond, loop.body, post)


def char_apply(phi: CharFn, current: Exp) -> Exp:
    """[!guard] * post + [guard] * wp(body)(current), syntactically."""
    if contains_loop(phi.body):
        raise ContainsLoop("characteristic function needs a loop-free body")
    return Plus(
        Guard(Not(phi.guard), phi.post),
        Guard(phi.guard, wp_loop_free(phi.body, current)),
    )


def char_iterates(loop: While, post: Exp, k: int) -> Exp:
    """The k-th syntactic unrolling, starting from the zero expectation."""
    phi = CharFn.of(loop, post)
    current: Exp = Arith(RatLit(Fraction(0)))
    for _ in range(k):
        current = char_apply(phi, current)
    return current


# ---------------------------------------------------------------------------
# Forward semantics
# ---------------------------------------------------------------------------

def forward_dist(prog: Program, sigma: State, varset: VarSet, fuel: int,
                 state_cap: int = DEFAULT_STATE_CAP) -> Dist:
    """Exact subdistribution over final states reachable within ``fuel``.

    ``fuel`` bounds the number of guarded iterations of every loop
    (including nested ones); in-flight mass beyond the bound is dropped, so
    weights grow monotonically with fuel.
    """
    result = _forward(prog, {sigma.restrict(varset): Fraction(1)}, varset,
                      fuel, state_cap)
    return Dist(result)


def _check_cap(frontier: dict, state_cap: int):
    if len(frontier) > state_cap:
        raise FuelExceeded(f"state set exceeded cap of {state_cap}")


def _forward(prog: Program, frontier: dict[State, Fraction], varset: VarSet,
             fuel: int, state_cap: int) -> dict[State, Fraction]:
    match prog:
        case Skip():
            return dict(frontier)
        case Assign(var, expr):
            out: dict[State, Fraction] = {}
            for sigma, w in frontier.items():
                tau = sigma.set(var, eval_aexpr(expr, sigma)).restrict(varset)
                out[tau] = out.get(tau, Fraction(0)) + w
            _check_cap(out, state_cap)
            return out
        case Seq(first, second):
            mid = _forward(first, frontier, varset, fuel, state_cap)
            return _forward(second, mid, varset, fuel, state_cap)
        case PChoice(left, p, right):
            out = {}
            branches = []
            if p != 0:
                branches.append((left, p))
            if p != 1:
                branches.append((right, 1 - p))
            for branch, weight in branches:
                scaled = {s: w * weight for s, w in frontier.items()}
                for s, w in _forward(branch, scaled, varset, fuel, state_cap).items():
                    out[s] = out.get(s, Fraction(0)) + w
            _check_cap(out, state_cap)
            return out
        case Ite(cond, then, orelse):
            true_part = {s: w for s, w in frontier.items() if eval_bexpr(cond, s)}
            false_part = {s: w for s, w in frontier.items() if s not in true_part}
            out = _forward(then, true_part, varset, fuel, state_cap) if true_part else {}
            if false_part:
                for s, w in _forward(orelse, false_part, varset, fuel, state_cap).items():
                    out[s] = out.get(s, Fraction(0)) + w
            _check_cap(out, state_cap)
            return out
        case While(cond, body):
            done: dict[State, Fraction] = {}
            alive = dict(frontier)

            def split():
                nonlocal alive
                still = {}
                for s, w in alive.items():
                    if eval_bexpr(cond, s):
                        still[s] = w
                    else:
                        done[s] = done.get(s, Fraction(0)) + w
                alive = still

            split()
            for _ in range(fuel):
                if not alive:
                    break
                alive = _forward(body, alive, varset, fuel, state_cap)
                _check_cap(alive, state_cap)
                split()
            return done
    raise TypeError(prog)


# ---------------------------------------------------------------------------
# Semantic backward interpreter and fixed-point iteration
# ---------------------------------------------------------------------------

def _sem_wp(prog: Program, cont, sigma: State, fuel: int) -> XReal:
    """Apply the backward transformer to a semantic continuation.

    ``cont`` maps states to extended reals.  While loops are approximated by
    their own ``fuel``-fold iteration (the documented approximation knob for
    nested loops).
    """
    match prog:
        case Skip():
            return cont(sigma)
        case Assign(var, expr):
            return cont(sigma.set(var, eval_aexpr(expr, sigma)))
        case Seq(first, second):
            return _sem_wp(first, lambda tau: _sem_wp(second, cont, tau, fuel),
                           sigma, fuel)
        case PChoice(left, p, right):
            total = ZERO
            if p != 0:
                total = total + XReal.of(p) * _sem_wp(left, cont, sigma, fuel)
            if p != 1:
                total = total + XReal.of(1 - p) * _sem_wp(right, cont, sigma, fuel)
            return total
        case Ite(cond, then, orelse):
            branch = then if eval_bexpr(cond, sigma) else orelse
            return _sem_wp(branch, cont, sigma, fuel)
        case While():
            return _kleene_value(prog, cont, sigma, fuel, fuel)
    raise TypeError(prog)


def _kleene_value(loop: While, cont, sigma: State, k: int, fuel: int,
                  state_cap: int = DEFAULT_STATE_CAP) -> XReal:
    cache: dict[tuple[int, State], XReal] = {}

    def go(level: int, s: State) -> XReal:
        if level == 0:
            return ZERO
        key = (level, s)
        if key in cache:
            return cache[key]
        if len(cache) > state_cap:
            raise FuelExceeded(f"memo table exceeded cap of {state_cap}")
        if eval_bexpr(loop.cond, s):
            value = _sem_wp(loop.body, lambda tau: go(level - 1, tau), s, fuel)
        else:
            value = cont(s)
        cache[key] = value
        return value

    return go(k, sigma)


def kleene_iterate(loop: While, post: Exp, sigma: State, k: int,
                   state_cap: int = DEFAULT_STATE_CAP) -> XReal:
    """Value at ``sigma`` of the k-th fixed-point iterate from zero.

    Monotone and nondecreasing in k; ``post`` must be quantifier-free so
    evaluation is exact.
    """
    cont = lambda tau: eval_exp(post, tau)
    return _kleene_value(loop, cont, sigma, k, k, state_cap)


# ---------------------------------------------------------------------------
# Path-sum oracle
# ---------------------------------------------------------------------------

def char_exp(sigma: State, varset: VarSet) -> Exp:
    """The {0,1} indicator of ``sigma`` modulo the variable set."""
    conj = and_all([eq_(VarRef(v), RatLit(sigma[v])) for v in varset])
    return Guard(conj, Arith(RatLit(Fraction(1))))


def path_sum(loop: While, post: Exp, sigma: State, varset: VarSet, k: int,
             path_cap: int = DEFAULT_STATE_CAP) -> XReal:
    """Truncated sum over length-k state sequences from ``sigma``.

    Each sequence contributes the final value of [!guard] * post weighted by
    the product of one-step values of the guarded iteration, where a step's
    value is read off the syntactic transformer applied to the target
    state's indicator.  Sequences are extended only along transitions with
    positive weight; the omitted ones contribute zero factors.
    """
    if not varset.issuperset(vars_program(loop) | free_vars(post)):
        raise ValueError("variable set must cover the loop and postexpectation")
    if k <= 0:
        return ZERO
    c_iter = Ite(loop.cond, loop.body, Skip())
    support_cache: dict[State, tuple[State, ...]] = {}
    factor_cache: dict[tuple[State, State], Fraction] = {}

    def successors(s: State) -> tuple[State, ...]:
        # candidate next states; transitions outside the support would only
        # contribute zero factors to the sum
        if s not in support_cache:
            support_cache[s] = tuple(forward_dist(c_iter, s, varset, 1).weights)
        return support_cache[s]

    def step_value(s: State, t: State) -> Fraction:
        key = (s, t)
        if key not in factor_cache:
            g = wp_loop_free(c_iter, char_exp(t, varset))
            factor_cache[key] = eval_exp(g, s).finite
        return factor_cache[key]

    final_guard = Guard(Not(loop.cond), post)
    total = ZERO
    stack: list[tuple[State, int, Fraction]] = [(sigma.restrict(varset), 1, Fraction(1))]
    explored = 0
    while stack:
        current, length, weight = stack.pop()
        explored += 1
        if explored > path_cap:
            raise FuelExceeded(f"sequence space exceeded cap of {path_cap}")
        if length == k:
            total = total + XReal.of(weight) * eval_exp(final_guard, current)
            continue
        for target in successors(current):
            stack.append((target, length + 1, weight * step_value(current, target)))
    return total
