"""Sequence encodings and the first-order-arithmetic embedding.

Finite sequences of naturals are packed into single naturals with the
classic remainder trick: a pair (a, b) represents the sequence whose i-th
element is ``a mod (1 + (i+1)*b)``.  Choosing ``b`` as a multiple of
lcm(1..len) makes the moduli pairwise coprime, so the Chinese remainder
theorem yields the least witness ``a``; the pair is then folded into one
number with the Cantor pairing polynomial.  Sequences of non-negative
rationals ride on top by pairing coprime numerator/denominator pairs (zero
is represented by (0, 1)), and program states and state sequences stack two
more levels of the same construction.

Every encoding has two faces: a *formula* (first-order arithmetic over the
non-negative rationals, built from the definitions and never evaluated
structurally) and a concrete *oracle* (an executable decision procedure for
the same relation).  The recurring pieces are the pairing relation, the
sequence-element relation, its rational variant, canonical (minimal)
sequence codes, state codes, and state-sequence codes.  Naturalness of a
rational is expressible with Robinson's squares trick; the construction is
emitted verbatim but only the opaque ``Nat`` atom is ever decided.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt, lcm

from .errors import NotPrenex
from .semantics import State
from .syntax import (
    Add,
    AExpr,
    And,
    Arith,
    Atom,
    BExpr,
    Exists,
    Exp,
    FOAnd,
    FOFormula,
    FOImplies,
    FONot,
    FOOr,
    Forall,
    Guard,
    Inf as InfExp,
    Lt,
    Mul,
    Nat,
    Not,
    RatLit,
    Sup,
    Var,
    VarRef,
    aexpr,
    eq_,
    fo_and_all,
    free_vars_fo,
    implies_,
    le_,
    or_,
    with_intrinsic,
)
from .xreal import ONE, XReal, ZERO, is_natural

_counter = itertools.count()


def logical_var(base: str) -> Var:
    """A reserved-namespace helper variable, unique per process run."""
    return Var(f"${base}{next(_counter)}")


# ---------------------------------------------------------------------------
# Pairing and the sequence-element map
# ---------------------------------------------------------------------------

def cantor_pair(n1: int, n2: int) -> int:
    if n1 < 0 or n2 < 0:
        raise ValueError("pairing is defined on naturals")
    s = n1 + n2
    return s * (s + 1) // 2 + n2


def cantor_unpair(n: int) -> tuple[int, int]:
    if n < 0:
        raise ValueError("unpairing is defined on naturals")
    w = (isqrt(8 * n + 1) - 1) // 2
    n2 = n - w * (w + 1) // 2
    return w - n2, n2


@dataclass(frozen=True)
class GoedelPair:
    """Base pair of the remainder encoding."""

    a: int
    b: int


def beta_encode(seq: list[int]) -> GoedelPair:
    """Encode a finite sequence of naturals; the empty sequence is (0, 1).

    ``b`` is the least multiple of lcm(1..len) exceeding every element
    (which keeps the moduli ``1 + (i+1)b`` pairwise coprime and large
    enough), and ``a`` is the least remainder-witness, via the Chinese
    remainder construction.
    """
    if not seq:
        return GoedelPair(0, 1)
    if any(n < 0 for n in seq):
        raise ValueError("sequence elements must be naturals")
    base = lcm(*range(1, len(seq) + 1))
    top = max(seq)
    b = base * (top // base + 1)
    a, modulus = 0, 1
    for i, element in enumerate(seq):
        m = 1 + (i + 1) * b
        t = ((element - a) * pow(modulus, -1, m)) % m
        a += modulus * t
        modulus *= m
    return GoedelPair(a, b)


def beta_decode(pair: GoedelPair, i: int) -> int:
    if i < 0:
        raise IndexError("sequence index must be a natural")
    return pair.a % (1 + (i + 1) * pair.b)


# ---------------------------------------------------------------------------
# Canonical sequence codes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeqCode:
    """Canonical single-number code of a sequence of naturals."""

    num: int
    length: int

    def element(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"index {i} out of range for length {self.length}")
        return beta_decode(GoedelPair(*cantor_unpair(self.num)), i)

    def elements(self) -> list[int]:
        return [self.element(i) for i in range(self.length)]


def encode_seq(seq: list[int]) -> SeqCode:
    pair = beta_encode(seq)
    return SeqCode(cantor_pair(pair.a, pair.b), len(seq))


def decode_seq(num: int, length: int) -> list[int]:
    return SeqCode(num, length).elements()


def elem_holds(num: int, i: int, m: int) -> bool:
    """Oracle for the element relation on plain naturals."""
    if num < 0 or i < 0 or m < 0:
        return False
    return beta_decode(GoedelPair(*cantor_unpair(num)), i) == m


def seq_holds(num: int, length: int) -> bool:
    """Whether ``num`` is the canonical code of its own first elements.

    Canonicality stands in for the minimization formula; brute-force
    minimality is only checked at tiny scale (see ``seq_minimal_bruteforce``).
    """
    if num < 0 or length < 0:
        return False
    return encode_seq(decode_seq(num, length)).num == num


def seq_minimal_bruteforce(seq: list[int], bound: int | None = None) -> int | None:
    """Least code agreeing with ``seq`` on its first elements, by search.

    Searches 0..bound (default: the canonical code, which is always a valid
    witness).  Exponentially expensive; only sensible for tiny sequences.
    """
    if bound is None:
        bound = encode_seq(seq).num
    for num in range(bound + 1):
        if decode_seq(num, len(seq)) == seq:
            return num
    return None


# ---------------------------------------------------------------------------
# Rational sequences
# ---------------------------------------------------------------------------

def rat_to_nat(q: Fraction) -> int:
    """Pair a non-negative rational's coprime numerator/denominator."""
    if q < 0:
        raise ValueError("rationals must be non-negative")
    return cantor_pair(q.numerator, q.denominator)


def nat_to_rat(n: int) -> Fraction | None:
    """Inverse of ``rat_to_nat``; None for pairs that are not in normal form."""
    n1, n2 = cantor_unpair(n)
    if n2 == 0:
        return None
    if n1 == 0 and n2 != 1:
        return None
    if gcd(n1, n2) != 1:
        return None
    return Fraction(n1, n2)


@dataclass(frozen=True)
class RatSeqCode:
    """Canonical code of a sequence of non-negative rationals."""

    num: int
    length: int

    def elements(self) -> list[Fraction] | None:
        values = []
        for n in decode_seq(self.num, self.length):
            q = nat_to_rat(n)
            if q is None:
                return None
            values.append(q)
        return values


def encode_rat_seq(values: list[Fraction]) -> RatSeqCode:
    code = encode_seq([rat_to_nat(q) for q in values])
    return RatSeqCode(code.num, code.length)


def relem_holds(num: int, i: int, value: Fraction) -> bool:
    """Oracle for the rational element relation."""
    if num < 0 or i < 0 or value < 0:
        return False
    q = nat_to_rat(beta_decode(GoedelPair(*cantor_unpair(num)), i))
    return q is not None and q == value


def rseq_holds(num: int, length: int) -> bool:
    """Canonical rational-sequence codes: valid elements, minimal num."""
    if not seq_holds(num, length):
        return False
    return RatSeqCode(num, length).elements() is not None


# ---------------------------------------------------------------------------
# States and state sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateCode:
    num: int
    variables: tuple[Var, ...]


@dataclass(frozen=True)
class StateSeqCode:
    num: int
    variables: tuple[Var, ...]
    length: int


def encode_state(sigma: State, varset) -> StateCode:
    """Code of a state restricted to the ordered relevant variables.

    Equivalent states (equal on the variable set) get the same number.
    """
    variables = tuple(varset)
    values = [sigma[v] for v in variables]
    return StateCode(encode_rat_seq(values).num, variables)


def decode_state(num: int, varset) -> State | None:
    variables = tuple(varset)
    values = RatSeqCode(num, len(variables)).elements()
    if values is None:
        return None
    return State(dict(zip(variables, values)))


def encstate_holds(num: int, varset, sigma: State) -> bool:
    """Whether ``num`` encodes a state equal to ``sigma`` on the variable set."""
    variables = tuple(varset)
    if not rseq_holds(num, len(variables)):
        return False
    decoded = decode_state(num, variables)
    return decoded == sigma.restrict(variables)


def encode_state_seq(states: list[State], varset) -> StateSeqCode:
    variables = tuple(varset)
    nums = [encode_state(s, variables).num for s in states]
    return StateSeqCode(encode_seq(nums).num, variables, len(states))


def decode_state_seq(code: StateSeqCode) -> list[State] | None:
    states = []
    for num in decode_seq(code.num, code.length):
        decoded = decode_state(num, code.variables)
        if decoded is None or not rseq_holds(num, len(code.variables)):
            return None
        states.append(decoded)
    return states


def stateseq_holds(num: int, varset, length: int, sigma: State) -> bool:
    """Oracle for the state-sequence relation.

    Holds when ``num`` canonically encodes ``length`` state codes whose
    first state agrees with the ambient state on the variable set.
    """
    variables = tuple(varset)
    if length <= 0 or not seq_holds(num, length):
        return False
    states = decode_state_seq(StateSeqCode(num, variables, length))
    if states is None:
        return False
    return states[0] == sigma.restrict(variables)


# ---------------------------------------------------------------------------
# First-order formula constructions
# ---------------------------------------------------------------------------

def robinson_nat_formula(k: Var) -> FOFormula:
    """Naturalness of ``k`` via the squares identity, quantifying over Q>=0.

    The two-variable inner assertion states that 2 + a*b*k*k + b*z*z equals
    x*x + a*y*y for some witnesses; closing it under successor from zero and
    quantifying the parameters universally pins down exactly the naturals.
    Construction only; semantic evaluation is out of scope.
    """
    a, b = logical_var("a"), logical_var("b")

    def phi(karg: AExpr) -> FOFormula:
        x, y, z = logical_var("x"), logical_var("y"), logical_var("z")
        lhs = Add(
            Add(RatLit(Fraction(2)),
                Mul(Mul(Mul(VarRef(a), VarRef(b)), karg), karg)),
            Mul(Mul(VarRef(b), VarRef(z)), VarRef(z)),
        )
        rhs = Add(Mul(VarRef(x), VarRef(x)),
                  Mul(Mul(VarRef(a), VarRef(y)), VarRef(y)))
        return Exists(x, Exists(y, Exists(z, Atom(eq_(lhs, rhs)))))

    m = logical_var("m")
    closed = FOAnd(
        phi(RatLit(Fraction(0))),
        Forall(m, FOImplies(phi(VarRef(m)), phi(Add(VarRef(m), RatLit(Fraction(1)))))),
    )
    return Forall(a, Forall(b, FOImplies(closed, phi(VarRef(k)))))


def divides_formula(d: AExpr, n: AExpr) -> FOFormula:
    q = logical_var("q")
    return Exists(q, Atom(eq_(Mul(d, VarRef(q)), n)))


def relprime_formula(n1: AExpr, n2: AExpr) -> FOFormula:
    d = logical_var("d")
    return Forall(
        d,
        FOImplies(
            FOAnd(divides_formula(VarRef(d), n1), divides_formula(VarRef(d), n2)),
            Atom(eq_(VarRef(d), RatLit(Fraction(1)))),
        ),
    )


def pair_formula(n: AExpr, n1: AExpr, n2: AExpr) -> FOFormula:
    """The pairing polynomial, with the halving cleared by doubling."""
    s = Add(n1, n2)
    lhs = Mul(RatLit(Fraction(2)), n)
    rhs = Add(Mul(s, Add(s, RatLit(Fraction(1)))), Mul(RatLit(Fraction(2)), n2))
    return Atom(eq_(lhs, rhs))


def elem_formula(num: AExpr, i: AExpr, m: AExpr) -> FOFormula:
    """Element relation over naturals: m is the i-th remainder of num's pair."""
    num, i, m = aexpr(num), aexpr(i), aexpr(m)
    a, b, q = logical_var("a"), logical_var("b"), logical_var("q")
    modulus = Add(RatLit(Fraction(1)), Mul(Add(i, RatLit(Fraction(1))), VarRef(b)))
    residue = FOAnd(
        Exists(q, Atom(eq_(Add(Mul(VarRef(q), modulus), m), VarRef(a)))),
        Atom(Lt(m, modulus)),
    )
    return Exists(a, Exists(b, FOAnd(pair_formula(num, VarRef(a), VarRef(b)), residue)))


def relem_formula(num: AExpr, i: AExpr, r: AExpr) -> FOFormula:
    """Rational element relation, built over the natural-number core.

    The natural-number part (pairing, element, coprimality) is lifted into
    the rational setting with naturalness guards; the value equation
    ``n2 * r = n1`` stays at the rational level.
    """
    num, i, r = aexpr(num), aexpr(i), aexpr(r)
    n, n1, n2 = logical_var("n"), logical_var("n1"), logical_var("n2")
    core = fo_and_all(
        [
            pair_formula(VarRef(n), VarRef(n1), VarRef(n2)),
            elem_formula(num, i, VarRef(n)),
            FOOr(
                relprime_formula(VarRef(n1), VarRef(n2)),
                FOAnd(
                    Atom(eq_(VarRef(n1), RatLit(Fraction(0)))),
                    Atom(eq_(VarRef(n2), RatLit(Fraction(1)))),
                ),
            ),
        ]
    )
    lifted = fo_nat_to_rat(fo_prenex(core))
    value = Atom(eq_(Mul(VarRef(n2), r), VarRef(n1)))
    return Exists(n, Exists(n1, Exists(n2, FOAnd(lifted, value))))


def lifted_elem_formula(num: AExpr, i: AExpr, m: AExpr) -> FOFormula:
    """The element relation embedded into the rational setting."""
    return fo_nat_to_rat(fo_prenex(elem_formula(num, i, m)))


def _seq_skeleton(num: AExpr, length: AExpr, element) -> FOFormula:
    """Shared shape of the canonical-sequence predicates (rational setting).

    Every natural index below the length has an element, and the code is
    minimal among natural codes that agree on those elements.  Universally
    quantified helpers carry naturalness guards (they stand for
    natural-number quantifiers); the element witness stays bare, since its
    sort is decided by the element relation itself.
    """
    num, length = aexpr(num), aexpr(length)
    u, w = logical_var("u"), logical_var("w")
    total = Forall(
        u,
        FOImplies(
            FOAnd(Nat(u), Atom(Lt(VarRef(u), length))),
            Exists(w, element(num, VarRef(u), VarRef(w))),
        ),
    )
    num2, u2, w2 = logical_var("num'"), logical_var("u"), logical_var("w")
    agree = Forall(
        u2,
        FOImplies(
            FOAnd(Nat(u2), Atom(Lt(VarRef(u2), length))),
            Exists(
                w2,
                FOAnd(
                    element(num, VarRef(u2), VarRef(w2)),
                    element(VarRef(num2), VarRef(u2), VarRef(w2)),
                ),
            ),
        ),
    )
    minimal = Forall(
        num2, FOImplies(FOAnd(Nat(num2), agree), Atom(le_(num, VarRef(num2))))
    )
    return FOAnd(total, minimal)


def seq_formula(num: AExpr, length: AExpr) -> FOFormula:
    return _seq_skeleton(num, length, lifted_elem_formula)


def rseq_formula(num: AExpr, length: AExpr) -> FOFormula:
    return _seq_skeleton(num, length, relem_formula)


def encstate_formula(varset, num: AExpr) -> FOFormula:
    """``num`` encodes the values of the relevant variables in order."""
    variables = tuple(varset)
    num = aexpr(num)
    parts = [rseq_formula(num, RatLit(Fraction(len(variables))))]
    for index, var in enumerate(variables):
        parts.append(relem_formula(num, RatLit(Fraction(index)), VarRef(var)))
    return fo_and_all(parts)


def stateseq_formula(varset, num: AExpr, length: AExpr) -> FOFormula:
    """``num`` encodes a sequence of state codes starting at the current state."""
    variables = tuple(varset)
    num, length = aexpr(num), aexpr(length)
    v1 = logical_var("v")
    head = Exists(
        v1, FOAnd(lifted_elem_formula(num, RatLit(Fraction(0)), VarRef(v1)),
                  encstate_formula(variables, VarRef(v1)))
    )
    u, v2 = logical_var("u"), logical_var("v")
    all_states = Forall(
        u,
        Forall(
            v2,
            FOImplies(
                FOAnd(Atom(Lt(VarRef(u), length)),
                      lifted_elem_formula(num, VarRef(u), VarRef(v2))),
                rseq_formula(VarRef(v2), RatLit(Fraction(len(variables)))),
            ),
        ),
    )
    return fo_and_all([seq_formula(num, length), head, all_states])


# ---------------------------------------------------------------------------
# Translations between the formula layers
# ---------------------------------------------------------------------------

def expand_nat_atoms(p: FOFormula, _memo: dict | None = None) -> FOFormula:
    """Replace each opaque naturalness atom by its verbatim construction."""
    memo = {} if _memo is None else _memo
    orig = p
    cached = memo.get(id(p))
    if cached is not None:
        return cached
    spine = []
    while isinstance(p, (Exists, Forall)):
        spine.append((type(p), p.var))
        p = p.body
    match p:
        case Atom():
            out: FOFormula = p
        case Nat(v):
            out = robinson_nat_formula(v)
        case FOAnd(l, r):
            out = FOAnd(expand_nat_atoms(l, memo), expand_nat_atoms(r, memo))
        case FOOr(l, r):
            out = FOOr(expand_nat_atoms(l, memo), expand_nat_atoms(r, memo))
        case FOImplies(l, r):
            out = FOImplies(expand_nat_atoms(l, memo), expand_nat_atoms(r, memo))
        case FONot(arg):
            out = FONot(expand_nat_atoms(arg, memo))
        case _:
            raise TypeError(p)
    for ctor, v in reversed(spine):
        out = ctor(v, out)
    memo[id(orig)] = out
    return out


def rename_fo(p: FOFormula, mapping: dict[Var, Var]) -> FOFormula:
    """Parallel variable renaming; targets must be globally fresh."""
    if not mapping:
        return p
    from .syntax import rename_bexpr

    atom_memo: dict = {}
    memo: dict = {}

    def go(q: FOFormula) -> FOFormula:
        orig = q
        cached = memo.get(id(q))
        if cached is not None:
            return cached
        spine = []
        while isinstance(q, (Exists, Forall)):
            spine.append((type(q), mapping.get(q.var, q.var)))
            q = q.body
        match q:
            case Atom(pred):
                out: FOFormula = Atom(rename_bexpr(pred, mapping, atom_memo))
            case Nat(v):
                out = Nat(mapping.get(v, v))
            case FOAnd(l, r):
                out = FOAnd(go(l), go(r))
            case FOOr(l, r):
                out = FOOr(go(l), go(r))
            case FOImplies(l, r):
                out = FOImplies(go(l), go(r))
            case FONot(arg):
                out = FONot(go(arg))
            case _:
                raise TypeError(q)
        for ctor, v in reversed(spine):
            out = ctor(v, out)
        memo[id(orig)] = out
        return out

    return go(p)


FOPrefix = list[tuple[str, Var]]  # "E" | "A"


def fo_prenex(p: FOFormula) -> FOFormula:
    """Equivalent prenex form: a quantifier block over a quantifier-free matrix.

    Quantifiers flip through negations and implication premises; pulled
    variables are renamed to fresh reserved names so no clashes can occur.
    """

    def freshen(prefix: FOPrefix, matrix: FOFormula,
                clashes: set[Var]) -> tuple[FOPrefix, FOFormula]:
        mapping = {
            v: logical_var(v.name.lstrip("$").rstrip("'0123456789") or "v")
            for _, v in prefix
            if v in clashes
        }
        if not mapping:
            return prefix, matrix
        return [(q, mapping.get(v, v)) for q, v in prefix], rename_fo(matrix, mapping)

    def flip(prefix: FOPrefix) -> FOPrefix:
        return [("A" if q == "E" else "E", v) for q, v in prefix]

    memo: dict = {}

    def go(q: FOFormula) -> tuple[FOPrefix, FOFormula, set[Var]]:
        """Returns (prefix, matrix, all variable names of the subformula)."""
        orig = q
        cached = memo.get(id(q))
        if cached is not None:
            return cached
        lead: FOPrefix = []
        while isinstance(q, (Exists, Forall)):
            lead.append(("E" if isinstance(q, Exists) else "A", q.var))
            q = q.body
        lead_names = {v for _, v in lead}
        match q:
            case Atom() | Nat():
                result = lead, q, free_vars_fo(q) | lead_names
            case FONot(arg):
                prefix, matrix, names = go(arg)
                result = lead + flip(prefix), FONot(matrix), names | lead_names
            case FOAnd(l, r) | FOOr(l, r) | FOImplies(l, r):
                pl, ml, nl = go(l)
                pr, mr, nr = go(r)
                # renaming is needed only when a pulled binder would clash
                # with the sibling or an outer binder; generated reserved
                # names never do, except when a subformula object is shared
                pl, ml = freshen(pl, ml, {v for _, v in pl} & (nr | lead_names))
                nl = nl | {v for _, v in pl}
                pr, mr = freshen(pr, mr, {v for _, v in pr} & (nl | lead_names))
                nr = nr | {v for _, v in pr}
                if isinstance(q, FOImplies):
                    pl = flip(pl)
                ctor = type(q)
                result = lead + pl + pr, ctor(ml, mr), nl | nr | lead_names
            case _:
                raise TypeError(q)
        memo[id(orig)] = result
        return result

    prefix, matrix, _ = go(p)
    out = matrix
    for quant, var in reversed(prefix):
        out = Exists(var, out) if quant == "E" else Forall(var, out)
    return out


def fo_prenex_split(p: FOFormula) -> tuple[FOPrefix, FOFormula]:
    """Split an already-prenex formula into its prefix and matrix."""
    prefix: FOPrefix = []
    while True:
        match p:
            case Exists(v, body):
                prefix.append(("E", v))
                p = body
            case Forall(v, body):
                prefix.append(("A", v))
                p = body
            case _:
                break
    if _has_quantifier(p):
        raise NotPrenex("quantifier below a connective")
    return prefix, p


def _has_quantifier(p: FOFormula) -> bool:
    seen: set[int] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if id(q) in seen:
            continue
        seen.add(id(q))
        match q:
            case Atom() | Nat():
                pass
            case FOAnd(l, r) | FOOr(l, r) | FOImplies(l, r):
                stack.append(l)
                stack.append(r)
            case FONot(arg):
                stack.append(arg)
            case Exists(_, _) | Forall(_, _):
                return True
            case _:
                raise TypeError(q)
    return False


def fo_nat_to_rat(p: FOFormula) -> FOFormula:
    """Embed a prenex natural-number formula into the rational setting.

    Universal quantifiers are guarded by naturalness of the bound variable,
    existentials are left bare, and the matrix is conjoined with naturalness
    of each of its free variables, so the embedded formula is false whenever
    a non-natural value sneaks in.
    """
    prefix, matrix = fo_prenex_split(p)
    guards = [Nat(v) for v in sorted(free_vars_fo(matrix))]
    out: FOFormula = matrix
    for g in guards:
        out = FOAnd(out, g)
    for quant, var in reversed(prefix):
        if quant == "E":
            out = Exists(var, out)
        else:
            out = Forall(var, FOImplies(Nat(var), out))
    return out


def _matrix_to_bexpr(p: FOFormula, _memo: dict | None = None) -> BExpr:
    memo = {} if _memo is None else _memo
    cached = memo.get(id(p))
    if cached is not None:
        return cached
    match p:
        case Atom(pred):
            out = pred
        case FOAnd(l, r):
            out = And(_matrix_to_bexpr(l, memo), _matrix_to_bexpr(r, memo))
        case FOOr(l, r):
            out = or_(_matrix_to_bexpr(l, memo), _matrix_to_bexpr(r, memo))
        case FOImplies(l, r):
            out = implies_(_matrix_to_bexpr(l, memo), _matrix_to_bexpr(r, memo))
        case FONot(arg):
            out = Not(_matrix_to_bexpr(arg, memo))
        case Nat(v):
            raise NotPrenex(
                f"naturalness atom N({v}) must be expanded before embedding"
            )
        case _:
            raise TypeError(p)
    memo[id(p)] = out
    return out


def fo_to_exp(p: FOFormula) -> Exp:
    """Embed a prenex rational formula as a {0,1}-valued expectation.

    Existentials become suprema, universals become infima, and the matrix
    becomes an Iverson guard over the constant one.
    """
    prefix, matrix = fo_prenex_split(p)
    out: Exp = Guard(_matrix_to_bexpr(matrix), Arith(RatLit(Fraction(1))))
    for quant, var in reversed(prefix):
        out = Sup(var, out) if quant == "E" else InfExp(var, out)
    return out


# ---------------------------------------------------------------------------
# Oracle-tagged embeddings
# ---------------------------------------------------------------------------

class FormulaOracleTag:
    """Evaluation hint for an embedded formula: decide it concretely.

    ``fn(sigma)`` must return the truth value of the formula at the state.
    """

    survives_rewrite = False

    def __init__(self, fn, label: str):
        self.fn = fn
        self.label = label

    def evaluate(self, node, sigma, dom, rec) -> XReal:
        return ONE if self.fn(sigma) else ZERO

    def __repr__(self):
        return f"FormulaOracleTag({self.label})"


def embed_formula(p: FOFormula, fn, label: str) -> Exp:
    """Pure embedding of ``p`` (naturalness expanded verbatim) plus oracle tag."""
    pure = fo_to_exp(fo_prenex(expand_nat_atoms(p)))
    return with_intrinsic(pure, FormulaOracleTag(fn, label))


def _nat_value(sigma: State, term: AExpr) -> int | None:
    from .semantics import eval_aexpr

    value = eval_aexpr(term, sigma)
    return value.numerator if is_natural(value) else None


def elem_exp(num: AExpr, i: AExpr, m: AExpr) -> Exp:
    num, i, m = aexpr(num), aexpr(i), aexpr(m)

    def fn(sigma: State) -> bool:
        ne, ie, me = (_nat_value(sigma, t) for t in (num, i, m))
        return ne is not None and ie is not None and me is not None \
            and elem_holds(ne, ie, me)

    return embed_formula(fo_nat_to_rat(fo_prenex(elem_formula(num, i, m))), fn, "elem")


def relem_exp(num: AExpr, i: AExpr, r: AExpr) -> Exp:
    from .semantics import eval_aexpr

    num, i, r = aexpr(num), aexpr(i), aexpr(r)

    def fn(sigma: State) -> bool:
        ne, ie = _nat_value(sigma, num), _nat_value(sigma, i)
        return ne is not None and ie is not None \
            and relem_holds(ne, ie, eval_aexpr(r, sigma))

    return embed_formula(relem_formula(num, i, r), fn, "relem")


def stateseq_exp(varset, num: AExpr, length: AExpr) -> Exp:
    variables = tuple(varset)
    num, length = aexpr(num), aexpr(length)

    def fn(sigma: State) -> bool:
        ne, le = _nat_value(sigma, num), _nat_value(sigma, length)
        return ne is not None and le is not None \
            and stateseq_holds(ne, variables, le, sigma)

    return embed_formula(stateseq_formula(variables, num, length), fn, "stateseq")
