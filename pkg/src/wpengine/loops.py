"""Compiling loops into closed-form syntactic expectations.

A loop's preexpectation is the supremum over path lengths of a sum over
encoded state sequences: each sequence contributes the postexpectation at
its final state (where the guard must have failed) times the product of
one-step transition values along it.  The pieces are

* the characteristic assertion of a state (a {0,1} indicator over the
  relevant variables);
* a state-substitution expectation that reads variable values out of an
  encoded state and substitutes them into a target expectation;
* a state-application expectation that additionally evaluates the target at
  the decoded state, independent of the ambient one;
* a one-step template: the backward transform of the primed characteristic
  assertion through one guarded iteration, with the primed copies standing
  for the target state's values;
* the path expectation combining the final-state factor with the product of
  one-step factors read off the encoded sequence.

Every constructed term is emitted in full.  Evaluating the pure terms by
restricted quantifier search is hopeless (the witnesses are astronomical
sequence codes), so each carries a plan whose step-k truncation mirrors the
construction equation by equation and agrees exactly with the k-fold
fixed-point iterate and the explicit path sum.  Helper variables live in
the reserved ``$`` namespace, which user programs cannot mention.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ContainsLoop, FreeVarsOutsideVarSet
from .goedel import (
    GoedelPair,
    beta_decode,
    cantor_unpair,
    decode_seq,
    decode_state,
    elem_exp,
    encode_state,
    logical_var,
    relem_exp,
    stateseq_exp,
)
from .semantics import State, calkin_wilf, eval_exp
from .series import PROD_VAR, SUM_VAR, make_product, make_sum, odot
from .syntax import (
    Add,
    Arith,
    Exp,
    Guard,
    Ite,
    Lt,
    Not,
    Plus,
    RatLit,
    Skip,
    Sup,
    Var,
    VarRef,
    While,
    and_all,
    contains_loop,
    eq_,
    free_vars,
    le_,
    subst_exp_many,
    vars_program,
    with_intrinsic,
)
from .wp import VarSet, forward_dist, wp_loop_free
from .xreal import XReal, ZERO, is_natural


def char_assertion(sigma: State, varset: VarSet) -> Exp:
    """{0,1} indicator of the states that agree with sigma on the variables."""
    conj = and_all([eq_(VarRef(v), RatLit(sigma[v])) for v in varset])
    return Guard(conj, Arith(RatLit(Fraction(1))))


def primed(var: Var) -> Var:
    """The reserved primed copy of a program variable."""
    return Var(f"${var.name}'")


# ---------------------------------------------------------------------------
# Encoded-state substitution and application
# ---------------------------------------------------------------------------

class SubstPlan:
    """Decode the state code bound at ``num``, substitute its values."""

    survives_rewrite = False

    def __init__(self, target: Exp, variables: tuple[Var, ...],
                 num: Var, substituted: tuple[Var, ...]):
        self.target = target
        self.variables = variables
        self.num = num
        self.substituted = substituted

    def decoded(self, sigma: State) -> State | None:
        code = sigma[self.num]
        if not is_natural(code):
            return None
        return decode_state(code.numerator, self.variables)

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        decoded = self.decoded(sigma)
        if decoded is None:
            return ZERO
        values = [decoded[v] for v in self.variables]
        pairs = [(s, RatLit(q)) for s, q in zip(self.substituted, values)]
        return rec(subst_exp_many(self.target, pairs), sigma)


class ApplyPlan(SubstPlan):
    """Decode the state code and evaluate the target there.

    The decoded values override the relevant variables; everything else
    (helper variables of surrounding terms) keeps its ambient binding.
    """

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        decoded = self.decoded(sigma)
        if decoded is None:
            return ZERO
        merged = sigma
        for v in self.variables:
            merged = merged.set(v, decoded[v])
        return rec(self.target, merged)


def _conjoin_embeds(parts: list[Exp]) -> Exp:
    """Product of {0,1}-valued embedded formulas."""
    if not parts:
        return Arith(RatLit(Fraction(1)))
    out = parts[0]
    for p in parts[1:]:
        out = odot(out, p)
    return out


def _subst_skeleton(target: Exp, variables: tuple[Var, ...], num: Var,
                    substituted: tuple[Var, ...]) -> Exp:
    """sup over helpers: [each helper is the coded value] (x) target[...]"""
    helpers = [logical_var(v.name) for v in variables]
    bracket = _conjoin_embeds(
        [relem_exp(VarRef(num), RatLit(Fraction(i)), VarRef(h))
         for i, h in enumerate(helpers)]
    )
    replaced = subst_exp_many(
        target, [(s, VarRef(h)) for s, h in zip(substituted, helpers)]
    )
    term: Exp = odot(bracket, replaced)
    for helper in reversed(helpers):
        term = Sup(helper, term)
    return term


def goedel_subst(f: Exp, varset: VarSet, num: Var) -> Exp:
    """Substitution of the relevant variables by an encoded state's values.

    With the code variable bound to a state's number, structurally
    equivalent to ``f`` with each relevant variable replaced by that
    state's value for it.
    """
    variables = tuple(varset)
    term = _subst_skeleton(f, variables, num, variables)
    return with_intrinsic(term, SubstPlan(f, variables, num, variables))


def goedel_apply(f: Exp, varset: VarSet, num: Var) -> Exp:
    """Evaluation of ``f`` at an encoded state.

    Requires the free variables of ``f`` to lie inside the variable set, so
    the value does not depend on the ambient state.
    """
    variables = tuple(varset)
    extra = free_vars(f) - set(variables)
    if extra:
        raise FreeVarsOutsideVarSet(
            f"free variables outside the variable set: {sorted(v.name for v in extra)}"
        )
    term = _subst_skeleton(f, variables, num, variables)
    return with_intrinsic(term, ApplyPlan(f, variables, num, variables))


def goedel_subst_primed(g: Exp, variables: tuple[Var, ...], num: Var) -> Exp:
    """Substitute the primed variable copies by an encoded state's values."""
    primed_vars = tuple(primed(v) for v in variables)
    term = _subst_skeleton(g, variables, num, primed_vars)
    return with_intrinsic(term, SubstPlan(g, variables, num, primed_vars))


def _apply_open(f: Exp, variables: tuple[Var, ...], num: Var) -> Exp:
    """State application without the closedness check.

    Used for the one-step factor, whose target intentionally keeps the
    second state-code variable free.
    """
    term = _subst_skeleton(f, variables, num, variables)
    return with_intrinsic(term, ApplyPlan(f, variables, num, variables))


# ---------------------------------------------------------------------------
# One-step template
# ---------------------------------------------------------------------------

def body_wp_template(loop: While, varset: VarSet) -> Exp:
    """Backward transform of the primed indicator through one guarded step.

    The result mentions the relevant variables and their primed copies;
    substituting a target state's values for the primed copies yields the
    one-step transition value into that state's equivalence class.
    """
    if contains_loop(loop.body):
        raise ContainsLoop("the loop body must be loop-free")
    variables = tuple(varset)
    post = Guard(
        and_all([eq_(VarRef(v), VarRef(primed(v))) for v in variables]),
        Arith(RatLit(Fraction(1))),
    )
    c_iter = Ite(loop.cond, loop.body, Skip())
    return wp_loop_free(c_iter, post)


# ---------------------------------------------------------------------------
# Path expectation and the full compilation
# ---------------------------------------------------------------------------

class PathPlan:
    """Value of one encoded execution path.

    Reads the length and the sequence code, decodes the sequence, and
    multiplies the final-state factor with the one-step factors, each a
    decode-then-apply step over the adjacent state codes.  Non-natural or
    zero lengths yield 0.
    """

    survives_rewrite = False

    def __init__(self, owner: "LoopEncoding"):
        self.owner = owner

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        length = sigma[self.owner.length_var]
        code = sigma[self.owner.seq_var]
        if not (is_natural(length) and is_natural(code)) or length == 0:
            return ZERO
        codes = self.owner.decode_sequence(code.numerator, length.numerator)
        if codes is None:
            return ZERO
        return self.owner.path_value(codes, sigma, dom, rec)


class _PairFactorPlan:
    """One product factor: decode two adjacent state codes and apply."""

    survives_rewrite = False

    def __init__(self, owner: "LoopEncoding"):
        self.owner = owner

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        seq_code = sigma[self.owner.seq_var]
        index = sigma[PROD_VAR]
        if not (is_natural(seq_code) and is_natural(index)):
            return ZERO
        pair = GoedelPair(*cantor_unpair(seq_code.numerator))
        code_from = beta_decode(pair, index.numerator)
        code_to = beta_decode(pair, index.numerator + 1)
        return self.owner.step_factor(code_from, code_to, sigma, dom, rec)


class LoopEncoding:
    """A loop compiled to a single syntactic expectation plus its plan.

    ``pure`` is the closed-form term; ``path_term`` the per-path piece with
    the length and sequence-code variables free; ``body_template`` the
    one-step template over primed copies.  The two big terms are built on
    first access; the plan only needs the small decode-and-apply pieces.
    """

    def __init__(self, loop: While, post: Exp, varset: VarSet,
                 length_var: Var, seq_var: Var):
        if contains_loop(loop.body):
            raise ContainsLoop("the loop body must be loop-free")
        if not varset.issuperset(vars_program(loop) | free_vars(post)):
            raise ValueError("variable set must cover the loop and postexpectation")
        self.loop = loop
        self.post = post
        self.varset = varset
        self.length_var = length_var
        self.seq_var = seq_var
        self.variables = tuple(varset)
        self.body_template = body_wp_template(loop, varset)
        self._factor_cache: dict[tuple[int, int], XReal] = {}
        self._state_codes: dict[State, int] = {}
        self._path_term: Exp | None = None
        self._pure: Exp | None = None

        self._final_exp = Guard(Not(loop.cond), post)
        self._num_final = logical_var("num")
        self._num1, self._num2 = logical_var("num"), logical_var("num")
        self._apply_final_term: Exp | None = None
        self._apply_step_term: Exp | None = None

    @property
    def _apply_final(self) -> Exp:
        if self._apply_final_term is None:
            self._apply_final_term = goedel_apply(self._final_exp, self.varset,
                                                  self._num_final)
        return self._apply_final_term

    @property
    def _apply_step(self) -> Exp:
        if self._apply_step_term is None:
            step_target = goedel_subst_primed(self.body_template, self.variables,
                                              self._num2)
            self._apply_step_term = _apply_open(step_target, self.variables,
                                                self._num1)
        return self._apply_step_term

    @property
    def path_term(self) -> Exp:
        if self._path_term is None:
            self._path_term = self._build_path_term()
        return self._path_term

    @property
    def pure(self) -> Exp:
        if self._pure is None:
            v1, nums = self.length_var, logical_var("nums")
            body = odot(
                stateseq_exp(self.varset, VarRef(self.seq_var), VarRef(v1)),
                self.path_term,
            )
            self._pure = Sup(v1, Sup(nums, make_sum(body, VarRef(nums)).pure))
        return self._pure

    def _build_path_term(self) -> Exp:
        v1, v2 = self.length_var, self.seq_var

        # last-state factor: sup num: sup v: [v+1 = v1] * [Elem(v2, v, num)]
        # (x) apply([!guard] * post at num)
        idx = logical_var("v")
        last_piece = Sup(
            self._num_final,
            Sup(
                idx,
                Guard(
                    eq_(Add(VarRef(idx), RatLit(Fraction(1))), VarRef(v1)),
                    odot(elem_exp(VarRef(v2), VarRef(idx), VarRef(self._num_final)),
                         self._apply_final),
                ),
            ),
        )

        # one-step factor at aggregation index i: codes at i and i+1
        pair_factor = Sup(
            self._num1,
            Sup(
                self._num2,
                odot(
                    odot(
                        elem_exp(VarRef(v2), VarRef(PROD_VAR), VarRef(self._num1)),
                        elem_exp(VarRef(v2),
                                 Add(VarRef(PROD_VAR), RatLit(Fraction(1))),
                                 VarRef(self._num2)),
                    ),
                    self._apply_step,
                ),
            ),
        )
        pair_factor = with_intrinsic(pair_factor, _PairFactorPlan(self))

        # Product(pair_factor, v1 - 2), with the index arithmetic expanded
        # through a fresh bound variable rather than monus
        bound = logical_var("v")
        product = make_product(pair_factor, VarRef(bound)).pure
        products = Sup(
            bound,
            Guard(eq_(Add(VarRef(bound), RatLit(Fraction(2))), VarRef(v1)), product),
        )

        path = Plus(
            Guard(Lt(VarRef(v1), RatLit(Fraction(2))), last_piece),
            Guard(le_(RatLit(Fraction(2)), VarRef(v1)),
                  odot(last_piece, products)),
        )
        return with_intrinsic(path, PathPlan(self))

    # -- plan machinery -----------------------------------------------------

    def state_code(self, sigma: State) -> int:
        key = sigma.restrict(self.varset)
        if key not in self._state_codes:
            self._state_codes[key] = encode_state(key, self.varset).num
        return self._state_codes[key]

    def decode_sequence(self, code: int, k: int) -> list[int] | None:
        """Element codes of the sequence, or None if any is not a state.

        Canonicality of the codes is the sequence-validity indicator's
        business, not the path's: the path reads elements only.
        """
        codes = decode_seq(code, k)
        if any(decode_state(c, self.variables) is None for c in codes):
            return None
        return codes

    def final_factor(self, state_code: int, sigma: State, dom, rec) -> XReal:
        """([!guard] * post) evaluated at the decoded final state."""
        decoded = decode_state(state_code, self.variables)
        if decoded is None:
            return ZERO
        merged = sigma
        for v in self.variables:
            merged = merged.set(v, decoded[v])
        return rec(self._final_exp, merged)

    def step_factor(self, code_from: int, code_to: int, sigma, dom, rec) -> XReal:
        """One-step value: the primed template, primes instantiated from the
        target state's code, evaluated at the source state's code."""
        key = (code_from, code_to)
        if key not in self._factor_cache:
            target = decode_state(code_to, self.variables)
            source = decode_state(code_from, self.variables)
            if target is None or source is None:
                self._factor_cache[key] = ZERO
                return ZERO
            instantiated = subst_exp_many(
                self.body_template,
                [(primed(v), RatLit(target[v])) for v in self.variables],
            )
            merged = sigma
            for v in self.variables:
                merged = merged.set(v, source[v])
            self._factor_cache[key] = rec(instantiated, merged)
        return self._factor_cache[key]

    def path_value(self, codes: list[int], sigma: State, dom, rec) -> XReal:
        """([!guard] * post) at the last state, times the step factors."""
        value = self.final_factor(codes[-1], sigma, dom, rec)
        for i in range(len(codes) - 1):
            if value == ZERO:
                return ZERO
            value = value * self.step_factor(codes[i], codes[i + 1], sigma, dom, rec)
        return value

    def plan_eval(self, sigma: State, k: int, dom=None) -> XReal:
        """Truncation-k value: the sum over supported length-k sequences.

        Sequences are extended only along one-step transitions with positive
        probability; the omitted ones contribute zero factors, so the sum is
        unchanged.
        """
        if dom is None:
            dom = calkin_wilf(0)
        rec = lambda f, s: eval_exp(f, s, dom, mode="oracle_assisted")
        if k <= 0:
            return ZERO
        c_iter = Ite(self.loop.cond, self.loop.body, Skip())
        start = sigma.restrict(self.varset)
        support: dict[State, tuple[State, ...]] = {}

        def successors(s: State) -> tuple[State, ...]:
            if s not in support:
                support[s] = tuple(forward_dist(c_iter, s, self.varset, 1).weights)
            return support[s]

        total = ZERO
        stack: list[tuple[State, list[int]]] = [(start, [self.state_code(start)])]
        while stack:
            current, codes = stack.pop()
            if len(codes) == k:
                total = total + self.path_value(codes, sigma, dom, rec)
                continue
            for target in successors(current):
                stack.append((target, codes + [self.state_code(target)]))
        return total

    def plan_sup(self, sigma: State, max_k: int, dom=None) -> XReal:
        """Monotone supremum of the truncations up to ``max_k``."""
        best = ZERO
        for k in range(max_k + 1):
            value = self.plan_eval(sigma, k, dom)
            if best < value:
                best = value
        return best


def path_expectation(loop: While, post: Exp, varset: VarSet,
                     v1: Var, v2: Var) -> Exp:
    """The per-path expectation with the length and sequence code free."""
    return LoopEncoding(loop, post, varset, v1, v2).path_term


def encode_loop(loop: While, post: Exp, varset: VarSet) -> LoopEncoding:
    """Compile a loop into its closed-form syntactic expectation.

    The sequence-code variable is the sum aggregation variable: the sum
    ranges over all candidate sequence codes, the validity indicator keeps
    exactly the encodings of length-k sequences starting at the current
    state, and the path expectation weighs each one.
    """
    return LoopEncoding(loop, post, varset, logical_var("length"), SUM_VAR)
