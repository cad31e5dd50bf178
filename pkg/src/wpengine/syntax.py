"""Abstract syntax for terms, guards, programs, expectations, and formulas.

All AST values are immutable (frozen dataclasses) and safe to share between
threads.  Boolean sugar (true, false, or, implication, equality, <=) is
lowered at construction time so that guard trees only ever contain the three
core connectives ``<``, ``&&``, ``!``.  Expectations may carry an *intrinsic*
tag: an opaque evaluation hint attached by higher layers that is ignored by
printing, equality, and hashing.

Identifiers match ``\\$?[a-zA-Z_][a-zA-Z0-9_']*``; the ``$`` prefix marks the
reserved namespace used for machine-generated helper variables, which the
program parser rejects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import ProbabilityOutOfRange
from .xreal import format_rat, rat

_IDENT_RE = re.compile(r"\$?[a-zA-Z_][a-zA-Z0-9_']*\Z")


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"invalid variable name: {self.name!r}")

    @property
    def reserved(self) -> bool:
        return self.name.startswith("$")

    def __str__(self) -> str:
        return self.name


def fresh_var(avoid: Iterable[Var], base: str = "v") -> Var:
    """Return a variable not in ``avoid``, priming ``base`` as needed.

    The scheme is deterministic: ``v``, ``v'``, ``v''``, ... so generated
    terms are stable across runs.
    """
    taken = {v.name for v in avoid}
    name = base
    while name in taken:
        name += "'"
    return Var(name)


# ---------------------------------------------------------------------------
# Arithmetic expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatLit:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", rat(self.value))


@dataclass(frozen=True)
class VarRef:
    var: Var


@dataclass(frozen=True)
class Add:
    left: "AExpr"
    right: "AExpr"


@dataclass(frozen=True)
class Mul:
    left: "AExpr"
    right: "AExpr"


@dataclass(frozen=True)
class Monus:
    """Subtraction truncated at zero."""

    left: "AExpr"
    right: "AExpr"


AExpr = Union[RatLit, VarRef, Add, Mul, Monus]


def alit(value) -> RatLit:
    return RatLit(rat(value))


def avar(name: str | Var) -> VarRef:
    return VarRef(name if isinstance(name, Var) else Var(name))


def aexpr(value) -> AExpr:
    """Coerce ints, Fractions, strings, and Vars into arithmetic terms."""
    if isinstance(value, (RatLit, VarRef, Add, Mul, Monus)):
        return value
    if isinstance(value, Var):
        return VarRef(value)
    if isinstance(value, str):
        return VarRef(Var(value))
    return alit(value)


def add_all(terms: list[AExpr]) -> AExpr:
    """Left-to-right sum built as a balanced tree (keeps depth logarithmic)."""
    if not terms:
        return alit(0)
    if len(terms) == 1:
        return terms[0]
    mid = len(terms) // 2
    return Add(add_all(terms[:mid]), add_all(terms[mid:]))


# ---------------------------------------------------------------------------
# Boolean expressions (core: <, &&, !)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lt:
    left: AExpr
    right: AExpr


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class Not:
    arg: "BExpr"


BExpr = Union[Lt, And, Not]


def false_() -> BExpr:
    return Lt(alit(0), alit(0))


def true_() -> BExpr:
    return Not(false_())


def or_(phi: BExpr, psi: BExpr) -> BExpr:
    return Not(And(Not(phi), Not(psi)))


def implies_(phi: BExpr, psi: BExpr) -> BExpr:
    # phi -> psi  ==  !(phi && !psi)
    return Not(And(phi, Not(psi)))


def le_(a: AExpr, b: AExpr) -> BExpr:
    return Not(Lt(b, a))


def eq_(a: AExpr, b: AExpr) -> BExpr:
    return And(Not(Lt(a, b)), Not(Lt(b, a)))


def and_all(phis: list[BExpr]) -> BExpr:
    if not phis:
        return true_()
    if len(phis) == 1:
        return phis[0]
    mid = len(phis) // 2
    return And(and_all(phis[:mid]), and_all(phis[mid:]))


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: Var
    expr: AExpr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class PChoice:
    left: "Program"
    prob: Fraction
    right: "Program"

    def __post_init__(self):
        p = rat(self.prob)
        if not 0 <= p <= 1:
            raise ProbabilityOutOfRange(f"probability {format_rat(p)} not in [0, 1]")
        object.__setattr__(self, "prob", p)


@dataclass(frozen=True)
class Ite:
    cond: BExpr
    then: "Program"
    orelse: "Program"


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: "Program"


Program = Union[Skip, Assign, Seq, PChoice, Ite, While]


def contains_loop(prog: Program) -> bool:
    match prog:
        case While():
            return True
        case Seq(first, second):
            return contains_loop(first) or contains_loop(second)
        case PChoice(left, _, right):
            return contains_loop(left) or contains_loop(right)
        case Ite(_, then, orelse):
            return contains_loop(then) or contains_loop(orelse)
        case _:
            return False


# ---------------------------------------------------------------------------
# Expectations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arith:
    expr: AExpr
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Guard:
    """[cond] * body: the Iverson-guarded expectation."""

    cond: BExpr
    body: "Exp"
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Plus:
    left: "Exp"
    right: "Exp"
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Scale:
    """factor * body, where the factor is an arithmetic term."""

    factor: AExpr
    body: "Exp"
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sup:
    var: Var
    body: "Exp"
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Inf:
    var: Var
    body: "Exp"
    intrinsic: Optional[object] = field(default=None, compare=False, repr=False)


Exp = Union[Arith, Guard, Plus, Scale, Sup, Inf]

_EXP_TYPES = (Arith, Guard, Plus, Scale, Sup, Inf)


def exp_of(value) -> Exp:
    """Coerce arithmetic-like values into expectations."""
    if isinstance(value, _EXP_TYPES):
        return value
    return Arith(aexpr(value))


def with_intrinsic(node: Exp, tag: object) -> Exp:
    return replace(node, intrinsic=tag)


def plus_all(terms: list[Exp]) -> Exp:
    if not terms:
        return Arith(alit(0))
    if len(terms) == 1:
        return terms[0]
    mid = len(terms) // 2
    return Plus(plus_all(terms[:mid]), plus_all(terms[mid:]))


def quantify(prefix: list[tuple[type, Var]], body: Exp) -> Exp:
    """Wrap ``body`` in a quantifier prefix given as (Sup|Inf, var) pairs."""
    for quant, var in reversed(prefix):
        body = quant(var, body)
    return body


# ---------------------------------------------------------------------------
# First-order arithmetic formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: BExpr


@dataclass(frozen=True)
class Nat:
    """Assertion that a variable denotes a natural number.

    Kept as an opaque atom so translated formulas stay decidable by the
    oracle evaluator; ``goedel.expand_nat_atoms`` replaces it by the
    first-order construction over squares when a primitive formula is needed.
    """

    var: Var


@dataclass(frozen=True)
class FOAnd:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class FOOr:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class FONot:
    arg: "FOFormula"


@dataclass(frozen=True)
class FOImplies:
    left: "FOFormula"
    right: "FOFormula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "FOFormula"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "FOFormula"


FOFormula = Union[Atom, Nat, FOAnd, FOOr, FONot, FOImplies, Exists, Forall]


def fo_and_all(parts: list[FOFormula]) -> FOFormula:
    if not parts:
        return Atom(true_())
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return FOAnd(fo_and_all(parts[:mid]), fo_and_all(parts[mid:]))


# ---------------------------------------------------------------------------
# Variable analysis
# ---------------------------------------------------------------------------

# Generated expectations share subterms heavily (they are DAGs in memory),
# and the big shared guards get queried from many call sites, so variable
# sets are cached per physical node.  The cache pins its keys, which is fine
# at the scale of the terms this package builds.
_VARS_CACHE: dict[int, tuple[object, frozenset]] = {}


def _vars_cached(node, compute) -> frozenset:
    hit = _VARS_CACHE.get(id(node))
    if hit is not None and hit[0] is node:
        return hit[1]
    result = compute(node)
    _VARS_CACHE[id(node)] = (node, result)
    return result


def vars_aexpr(a: AExpr) -> frozenset[Var]:
    """Variables of a term; shared subtrees are computed once, globally."""

    def compute(node) -> frozenset:
        match node:
            case RatLit():
                return frozenset()
            case VarRef(v):
                return frozenset((v,))
            case Add(l, r) | Mul(l, r) | Monus(l, r):
                return vars_aexpr(l) | vars_aexpr(r)
        raise TypeError(node)

    return _vars_cached(a, compute)


def vars_bexpr(phi: BExpr) -> frozenset[Var]:
    """Variables of a guard; shared subtrees are computed once, globally."""

    def compute(node) -> frozenset:
        match node:
            case Lt(a, b):
                return vars_aexpr(a) | vars_aexpr(b)
            case And(l, r):
                return vars_bexpr(l) | vars_bexpr(r)
            case Not(arg):
                return vars_bexpr(arg)
        raise TypeError(node)

    return _vars_cached(phi, compute)


def _peel_quantifiers(f: Exp) -> tuple[list[tuple[type, Var, object]], Exp]:
    """Split a leading quantifier chain off iteratively.

    Quantifier prefixes are the one place trees grow deep (generated
    encodings stack hundreds of binders), so every walker peels them in a
    loop instead of recursing.
    """
    spine: list[tuple[type, Var, object]] = []
    while isinstance(f, (Sup, Inf)):
        spine.append((type(f), f.var, f.intrinsic))
        f = f.body
    return spine, f


def free_vars(f: Exp, _memo: dict | None = None) -> set[Var]:
    """Free variables of an expectation (quantifiers bind).

    The free-variable set of a subterm is intrinsic, so shared subterms are
    computed once per call.
    """
    memo = {} if _memo is None else _memo
    cached = memo.get(id(f))
    if cached is not None:
        return cached
    root = f
    spine, f = _peel_quantifiers(f)
    bound = {v for _, v, _ in spine}
    match f:
        case Arith(a):
            inner = vars_aexpr(a)
        case Guard(cond, body):
            inner = vars_bexpr(cond) | free_vars(body, memo)
        case Plus(l, r):
            inner = free_vars(l, memo) | free_vars(r, memo)
        case Scale(a, body):
            inner = vars_aexpr(a) | free_vars(body, memo)
        case _:
            raise TypeError(f)
    result = inner - bound
    memo[id(root)] = result
    return result


def all_vars(f: Exp, _memo: dict | None = None) -> set[Var]:
    """Free and bound variables of an expectation."""
    memo = {} if _memo is None else _memo
    cached = memo.get(id(f))
    if cached is not None:
        return cached
    root = f
    spine, f = _peel_quantifiers(f)
    bound = {v for _, v, _ in spine}
    match f:
        case Arith(a):
            inner = vars_aexpr(a)
        case Guard(cond, body):
            inner = vars_bexpr(cond) | all_vars(body, memo)
        case Plus(l, r):
            inner = all_vars(l, memo) | all_vars(r, memo)
        case Scale(a, body):
            inner = vars_aexpr(a) | all_vars(body, memo)
        case _:
            raise TypeError(f)
    result = inner | bound
    memo[id(root)] = result
    return result


def vars_program(prog: Program) -> set[Var]:
    match prog:
        case Skip():
            return set()
        case Assign(v, e):
            return {v} | vars_aexpr(e)
        case Seq(a, b):
            return vars_program(a) | vars_program(b)
        case PChoice(a, _, b):
            return vars_program(a) | vars_program(b)
        case Ite(cond, a, b):
            return vars_bexpr(cond) | vars_program(a) | vars_program(b)
        case While(cond, body):
            return vars_bexpr(cond) | vars_program(body)
    raise TypeError(prog)


def _peel_fo_quantifiers(p: FOFormula) -> tuple[list[Var], FOFormula]:
    bound = []
    while isinstance(p, (Exists, Forall)):
        bound.append(p.var)
        p = p.body
    return bound, p


def free_vars_fo(p: FOFormula) -> set[Var]:
    bound, p = _peel_fo_quantifiers(p)
    match p:
        case Atom(pred):
            inner = vars_bexpr(pred)
        case Nat(v):
            inner = {v}
        case FOAnd(l, r) | FOOr(l, r) | FOImplies(l, r):
            inner = free_vars_fo(l) | free_vars_fo(r)
        case FONot(arg):
            inner = free_vars_fo(arg)
        case _:
            raise TypeError(p)
    return inner - set(bound)


def all_vars_fo(p: FOFormula) -> set[Var]:
    bound, p = _peel_fo_quantifiers(p)
    match p:
        case Atom(pred):
            inner = vars_bexpr(pred)
        case Nat(v):
            inner = {v}
        case FOAnd(l, r) | FOOr(l, r) | FOImplies(l, r):
            inner = all_vars_fo(l) | all_vars_fo(r)
        case FONot(arg):
            inner = all_vars_fo(arg)
        case _:
            raise TypeError(p)
    return inner | set(bound)


def constants_aexpr(a: AExpr) -> set[Fraction]:
    match a:
        case RatLit(q):
            return {q}
        case VarRef():
            return set()
        case Add(l, r) | Mul(l, r) | Monus(l, r):
            return constants_aexpr(l) | constants_aexpr(r)
    raise TypeError(a)


def constants_bexpr(phi: BExpr) -> set[Fraction]:
    match phi:
        case Lt(a, b):
            return constants_aexpr(a) | constants_aexpr(b)
        case And(l, r):
            return constants_bexpr(l) | constants_bexpr(r)
        case Not(arg):
            return constants_bexpr(arg)
    raise TypeError(phi)


def constants_exp(f: Exp) -> set[Fraction]:
    """Rational literals occurring anywhere in an expectation."""
    _, f = _peel_quantifiers(f)
    match f:
        case Arith(a):
            return constants_aexpr(a)
        case Guard(cond, body):
            return constants_bexpr(cond) | constants_exp(body)
        case Plus(l, r):
            return constants_exp(l) | constants_exp(r)
        case Scale(a, body):
            return constants_aexpr(a) | constants_exp(body)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def subst_aexpr(a: AExpr, x: Var, value: AExpr, _memo: dict | None = None) -> AExpr:
    memo = {} if _memo is None else _memo
    cached = memo.get(id(a))
    if cached is not None:
        return cached
    match a:
        case RatLit():
            out: AExpr = a
        case VarRef(v):
            out = value if v == x else a
        case Add(l, r):
            out = Add(subst_aexpr(l, x, value, memo), subst_aexpr(r, x, value, memo))
        case Mul(l, r):
            out = Mul(subst_aexpr(l, x, value, memo), subst_aexpr(r, x, value, memo))
        case Monus(l, r):
            out = Monus(subst_aexpr(l, x, value, memo), subst_aexpr(r, x, value, memo))
        case _:
            raise TypeError(a)
    memo[id(a)] = out
    return out


def subst_bexpr(phi: BExpr, x: Var, value: AExpr, _memo: dict | None = None) -> BExpr:
    memo = {} if _memo is None else _memo
    cached = memo.get(id(phi))
    if cached is not None:
        return cached
    match phi:
        case Lt(a, b):
            out: BExpr = Lt(subst_aexpr(a, x, value, memo),
                            subst_aexpr(b, x, value, memo))
        case And(l, r):
            out = And(subst_bexpr(l, x, value, memo), subst_bexpr(r, x, value, memo))
        case Not(arg):
            out = Not(subst_bexpr(arg, x, value, memo))
        case _:
            raise TypeError(phi)
    memo[id(phi)] = out
    return out


def _tag_survives(tag: object) -> bool:
    return bool(getattr(tag, "survives_rewrite", False))


def _rebuilt(node: Exp, **changes) -> Exp:
    """Rebuild a node after a rewrite, keeping only shape-reading tags."""
    tag = node.intrinsic if _tag_survives(node.intrinsic) else None
    return replace(node, intrinsic=tag, **changes)


def subst_exp(f: Exp, x: Var, value: AExpr) -> Exp:
    """Capture-avoiding substitution of ``x`` by the term ``value``.

    Bound variables that would capture a variable of ``value`` are renamed
    by priming.  Subtrees without a free ``x`` are returned as-is (intrinsic
    tags included); rewritten nodes keep a tag only if it is declared
    shape-reading.  Shared subterms are substituted once.
    """
    value_vars = vars_aexpr(value)
    fv_memo: dict = {}
    term_memo: dict = {}
    atom_memo: dict = {}

    def walk(g: Exp) -> Exp:
        if x not in free_vars(g, fv_memo):
            return g
        orig = g
        cached = term_memo.get(id(g))
        if cached is not None:
            return cached
        match g:
            case Arith(a):
                out = _rebuilt(g, expr=subst_aexpr(a, x, value, atom_memo))
            case Guard(cond, body):
                out = _rebuilt(g, cond=subst_bexpr(cond, x, value, atom_memo),
                               body=walk(body))
            case Plus(l, r):
                out = _rebuilt(g, left=walk(l), right=walk(r))
            case Scale(a, body):
                out = _rebuilt(g, factor=subst_aexpr(a, x, value, atom_memo),
                               body=walk(body))
            case Sup(_, _) | Inf(_, _):
                spine: list[tuple[type, Var, object]] = []
                shadowed = False
                while isinstance(g, (Sup, Inf)):
                    v = g.var
                    if v == x:
                        shadowed = True
                        break
                    if v in value_vars:
                        avoid = value_vars | free_vars(g.body, fv_memo) | {x, v}
                        v2 = fresh_var(avoid, base=v.name)
                        spine.append((type(g), v2, g.intrinsic))
                        g = subst_exp(g.body, v, VarRef(v2))
                    else:
                        spine.append((type(g), v, g.intrinsic))
                        g = g.body
                out = g if shadowed else walk(g)
                for ctor, v, tag in reversed(spine):
                    kept = tag if _tag_survives(tag) else None
                    out = ctor(v, out, intrinsic=kept)
            case _:
                raise TypeError(g)
        term_memo[id(orig)] = out
        return out

    return walk(f)


def subst_exp_many(f: Exp, pairs: list[tuple[Var, AExpr]]) -> Exp:
    for x, value in pairs:
        f = subst_exp(f, x, value)
    return f


def rename_aexpr(a: AExpr, mapping: dict[Var, Var],
                 _memo: dict | None = None) -> AExpr:
    memo = {} if _memo is None else _memo
    cached = memo.get(id(a))
    if cached is not None:
        return cached
    match a:
        case RatLit():
            out: AExpr = a
        case VarRef(v):
            out = VarRef(mapping[v]) if v in mapping else a
        case Add(l, r):
            out = Add(rename_aexpr(l, mapping, memo), rename_aexpr(r, mapping, memo))
        case Mul(l, r):
            out = Mul(rename_aexpr(l, mapping, memo), rename_aexpr(r, mapping, memo))
        case Monus(l, r):
            out = Monus(rename_aexpr(l, mapping, memo), rename_aexpr(r, mapping, memo))
        case _:
            raise TypeError(a)
    memo[id(a)] = out
    return out


def rename_bexpr(phi: BExpr, mapping: dict[Var, Var],
                 _memo: dict | None = None) -> BExpr:
    memo = {} if _memo is None else _memo
    cached = memo.get(id(phi))
    if cached is not None:
        return cached
    match phi:
        case Lt(a, b):
            out: BExpr = Lt(rename_aexpr(a, mapping, memo),
                            rename_aexpr(b, mapping, memo))
        case And(l, r):
            out = And(rename_bexpr(l, mapping, memo), rename_bexpr(r, mapping, memo))
        case Not(arg):
            out = Not(rename_bexpr(arg, mapping, memo))
        case _:
            raise TypeError(phi)
    memo[id(phi)] = out
    return out


def rename_qf_exp(f: Exp, mapping: dict[Var, Var],
                  _memo: dict | None = None) -> Exp:
    """Parallel rename over a quantifier-free expectation.

    Targets must be fresh for the term; shape-reading tags survive, other
    tags are dropped on rebuilt nodes.
    """
    if not mapping:
        return f
    memo = {} if _memo is None else _memo
    cached = memo.get(id(f))
    if cached is not None:
        return cached
    match f:
        case Arith(a):
            out = _rebuilt(f, expr=rename_aexpr(a, mapping, memo))
        case Guard(cond, body):
            out = _rebuilt(f, cond=rename_bexpr(cond, mapping, memo),
                           body=rename_qf_exp(body, mapping, memo))
        case Plus(l, r):
            out = _rebuilt(f, left=rename_qf_exp(l, mapping, memo),
                           right=rename_qf_exp(r, mapping, memo))
        case Scale(a, body):
            out = _rebuilt(f, factor=rename_aexpr(a, mapping, memo),
                           body=rename_qf_exp(body, mapping, memo))
        case _:
            raise TypeError(f)
    memo[id(f)] = out
    return out


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def print_aexpr(a: AExpr, prec: int = 0) -> str:
    """Render a term; ``-`` denotes monus (subtraction truncated at zero).

    + and - are left-associative and share a precedence level; * binds
    tighter.
    """
    match a:
        case RatLit(q):
            return format_rat(q)
        case VarRef(v):
            return v.name
        case Add(l, r):
            s = f"{print_aexpr(l, 1)} + {print_aexpr(r, 2)}"
            return f"({s})" if prec > 1 else s
        case Monus(l, r):
            s = f"{print_aexpr(l, 1)} - {print_aexpr(r, 2)}"
            return f"({s})" if prec > 1 else s
        case Mul(l, r):
            s = f"{print_aexpr(l, 2)} * {print_aexpr(r, 3)}"
            return f"({s})" if prec > 2 else s
    raise TypeError(a)


def _comparison(phi: BExpr) -> str | None:
    """Recover sugared comparisons (=, <=, <) from the lowered core tree."""
    match phi:
        case And(Not(Lt(a1, b1)), Not(Lt(b2, a2))) if a1 == a2 and b1 == b2:
            return f"{print_aexpr(a1, 1)} = {print_aexpr(b1, 1)}"
        case Not(Lt(b, a)):
            return f"{print_aexpr(a, 1)} <= {print_aexpr(b, 1)}"
        case Lt(a, b):
            return f"{print_aexpr(a, 1)} < {print_aexpr(b, 1)}"
    return None


def print_bexpr(phi: BExpr, prec: int = 0) -> str:
    """Render a guard; = and <= are printed back from their lowered forms.

    Precedence levels: 1 = &&, 2 = ! and atoms; && is left-associative.
    """
    if phi == false_():
        return "false"
    if phi == true_():
        return "true"
    sugar = _comparison(phi)
    if sugar is not None:
        return sugar
    match phi:
        case And(l, r):
            s = f"{print_bexpr(l, 1)} && {print_bexpr(r, 2)}"
            return f"({s})" if prec > 1 else s
        case Not(arg):
            return f"!{print_bexpr(arg, 2)}"
    raise TypeError(phi)


def print_program(prog: Program, indent: str = "") -> str:
    match prog:
        case Skip():
            return f"{indent}skip"
        case Assign(v, e):
            return f"{indent}{v.name} := {print_aexpr(e)}"
        case Seq(a, b):
            return f"{print_program(a, indent)};\n{print_program(b, indent)}"
        case PChoice(a, p, b):
            inner = indent + "  "
            return (
                f"{indent}{{\n{print_program(a, inner)}\n{indent}}} "
                f"[{format_rat(p)}] {{\n{print_program(b, inner)}\n{indent}}}"
            )
        case Ite(cond, a, b):
            inner = indent + "  "
            return (
                f"{indent}if ({print_bexpr(cond)}) {{\n{print_program(a, inner)}\n"
                f"{indent}}} else {{\n{print_program(b, inner)}\n{indent}}}"
            )
        case While(cond, body):
            inner = indent + "  "
            return (
                f"{indent}while ({print_bexpr(cond)}) {{\n"
                f"{print_program(body, inner)}\n{indent}}}"
            )
    raise TypeError(prog)


def print_exp(f: Exp, prec: int = 0) -> str:
    """Render an expectation.

    Precedence: quantifiers bind loosest (0), + next (1), * tightest (2);
    + is left-associative and * chains fold to the right.  Compound
    arithmetic leaves are parenthesized so they read back as single terms.
    """
    match f:
        case Arith(a):
            if isinstance(a, (RatLit, VarRef)):
                return print_aexpr(a)
            return f"({print_aexpr(a)})"
        case Guard(cond, body):
            s = f"[{print_bexpr(cond)}] * {print_exp(body, 2)}"
            return f"({s})" if prec > 2 else s
        case Scale(a, body):
            s = f"{print_aexpr(a, 3)} * {print_exp(body, 2)}"
            return f"({s})" if prec > 2 else s
        case Plus(l, r):
            s = f"{print_exp(l, 1)} + {print_exp(r, 2)}"
            return f"({s})" if prec > 1 else s
        case Sup(_, _) | Inf(_, _):
            spine, matrix = _peel_quantifiers(f)
            heads = "".join(
                f"{'sup' if ctor is Sup else 'inf'} {v.name}: " for ctor, v, _ in spine
            )
            s = heads + print_exp(matrix, 0)
            return f"({s})" if prec > 0 else s
    raise TypeError(f)


def exp_tree_size(f: Exp) -> int:
    """Number of nodes in the tree expansion of an expectation.

    Generated terms share subterms, so the printed text can be exponentially
    larger than the in-memory structure; this estimates the printed size
    without materializing it.  Iterative, so arbitrarily deep terms are fine.
    """
    sizes: dict[int, int] = {}
    stack: list[tuple[object, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in sizes and sizes[id(node)] >= 0:
            continue
        children: list
        match node:
            case RatLit() | VarRef() | Var():
                sizes[id(node)] = 1
                continue
            case Arith(a):
                children = [a]
            case Guard(cond, body):
                children = [cond, body]
            case Plus(l, r) | Add(l, r) | Mul(l, r) | Monus(l, r) | And(l, r) | Lt(l, r):
                children = [l, r]
            case Scale(a, body):
                children = [a, body]
            case Sup(_, body) | Inf(_, body):
                children = [body]
            case Not(arg):
                children = [arg]
            case _:
                raise TypeError(node)
        if expanded:
            sizes[id(node)] = 1 + sum(sizes[id(c)] for c in children)
        else:
            sizes[id(node)] = -1
            stack.append((node, True))
            for child in children:
                if sizes.get(id(child), -1) < 0:
                    stack.append((child, False))
    return sizes[id(f)]


def print_fo(p: FOFormula, prec: int = 0) -> str:
    """Render a first-order formula.

    Precedence: quantifiers 0, -> 1 (right-assoc), || 2, && 3, ! / atoms 4.
    """
    match p:
        case Atom(pred):
            # Atoms print through the guard printer.  The parser builds
            # formula-level connectives, so round-tripping is guaranteed only
            # for atoms that are comparisons, true, or false.
            return print_bexpr(pred, 4)
        case Nat(v):
            return f"N({v.name})"
        case FOImplies(l, r):
            s = f"{print_fo(l, 2)} -> {print_fo(r, 1)}"
            return f"({s})" if prec > 1 else s
        case FOOr(l, r):
            s = f"{print_fo(l, 2)} || {print_fo(r, 3)}"
            return f"({s})" if prec > 2 else s
        case FOAnd(l, r):
            s = f"{print_fo(l, 3)} && {print_fo(r, 4)}"
            return f"({s})" if prec > 3 else s
        case FONot(arg):
            return f"!{print_fo(arg, 4)}"
        case Exists(_, _) | Forall(_, _):
            heads = []
            while isinstance(p, (Exists, Forall)):
                word = "exists" if isinstance(p, Exists) else "forall"
                heads.append(f"{word} {p.var.name}: ")
                p = p.body
            s = "".join(heads) + print_fo(p, 0)
            return f"({s})" if prec > 0 else s
    raise TypeError(p)
