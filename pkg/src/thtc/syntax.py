"""Abstract syntax for temporal constraint formulas, rules, and programs.

The core connectives are falsity, conjunction, disjunction, implication, and
the six temporal modalities next/until/release and previous/since/trigger.
Everything else (truth, negation, equivalence, initial/final markers, weak
next/previous, always/eventually in both directions, the comparison sugar
``= < !=``, assignments, and definedness guards) desugars into the core.

Linear terms are integer-coefficient sums of temporal terms.  Standalone
constants are carried by the reserved pseudo-variable ``ONE``; decimal
literals are admitted transiently and cleared to integer coefficients when a
comparison atom is built (both sides are scaled by the lcm of the coefficient
denominators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .trace import ONE


@dataclass(frozen=True)
class TemporalTerm:
    """A variable read at a signed offset from the evaluation point."""

    variable: str
    offset: int = 0

    def __post_init__(self):
        if not self.variable:
            raise ValueError("temporal term needs a variable name")
        if not isinstance(self.offset, int):
            raise TypeError("offset must be an integer")

    def __repr__(self):
        if self.offset == 0:
            return self.variable
        return "%s@%d" % (self.variable, self.offset)


def one_term():
    return TemporalTerm(ONE, 0)


@dataclass(frozen=True)
class LinearTerm:
    """A sum of coefficient-scaled temporal terms.

    Coefficients are stored as exact rationals; duplicate temporal terms are
    permitted and summed on evaluation.  Comparison atoms normalize their
    operands to integer coefficients, see ``LinearLeq``.
    """

    summands: tuple

    def __post_init__(self):
        if not self.summands:
            raise ValueError("linear term needs at least one summand")
        normalized = tuple(
            (coeff if isinstance(coeff, Fraction) else Fraction(coeff), term)
            for coeff, term in self.summands
        )
        object.__setattr__(self, "summands", normalized)

    def __repr__(self):
        from .parser import print_linear_term

        return print_linear_term(self)


def lt_var(name, offset=0, coeff=1):
    return LinearTerm(((coeff, TemporalTerm(name, offset)),))


def lt_const(value):
    return LinearTerm(((Fraction(value), one_term()),))


def lt_add(a, b):
    return LinearTerm(a.summands + b.summands)


def lt_scale(a, factor):
    factor = Fraction(factor)
    return LinearTerm(tuple((factor * c, t) for c, t in a.summands))


def lt_single(term):
    return LinearTerm(((Fraction(1), term),))


def linear_terms(alpha):
    """Distinct temporal terms of a linear term in first-occurrence order.

    The pseudo-variable ``ONE`` is excluded: constants are always defined.
    """
    seen = []
    for _, term in alpha.summands:
        if term.variable != ONE and term not in seen:
            seen.append(term)
    return tuple(seen)


def lt_is_single_var(alpha):
    """The sole temporal term when alpha is exactly one unscaled variable, else None."""
    if len(alpha.summands) == 1:
        coeff, term = alpha.summands[0]
        if coeff == 1 and term.variable != ONE:
            return term
    return None


# Constraint atoms ----------------------------------------------------------


@dataclass(frozen=True)
class LinearLeq:
    """The atom lhs <= rhs over linear terms; its solution relation is strict.

    Construction clears denominators: both sides are scaled by the lcm of all
    coefficient denominators, so stored coefficients are integers.
    """

    lhs: LinearTerm
    rhs: LinearTerm

    def __post_init__(self):
        scale = math.lcm(
            *(c.denominator for c, _ in self.lhs.summands),
            *(c.denominator for c, _ in self.rhs.summands),
        )
        if scale != 1:
            object.__setattr__(self, "lhs", lt_scale(self.lhs, scale))
            object.__setattr__(self, "rhs", lt_scale(self.rhs, scale))


@dataclass(frozen=True)
class BoolIsTrue:
    """The atom asserting a Boolean variable holds the truth constant."""

    term: TemporalTerm


@dataclass(frozen=True)
class CustomAtom:
    """An atom with a caller-supplied solution relation.

    The relation handle does not take part in equality or hashing; two custom
    atoms are the same atom when name and arguments coincide.
    """

    name: str
    args: tuple
    relation: object = field(compare=False, default=None)


@dataclass(frozen=True)
class Complement:
    """The complement of a strict atom: defined tuples outside its relation."""

    inner: object


ATOM_TYPES = (LinearLeq, BoolIsTrue, CustomAtom, Complement)


# Formula nodes --------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    atom: object


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class And:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Or:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Implies:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Next:
    sub: object


@dataclass(frozen=True)
class Until:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Release:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Previous:
    sub: object


@dataclass(frozen=True)
class Since:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Trigger:
    lhs: object
    rhs: object


# Derived (sugar) nodes.


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Not:
    sub: object


@dataclass(frozen=True)
class Iff:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class Initial:
    pass


@dataclass(frozen=True)
class Final:
    pass


@dataclass(frozen=True)
class WeakPrev:
    sub: object


@dataclass(frozen=True)
class WeakNext:
    sub: object


@dataclass(frozen=True)
class AlwaysPast:
    sub: object


@dataclass(frozen=True)
class EventuallyPast:
    sub: object


@dataclass(frozen=True)
class Always:
    sub: object


@dataclass(frozen=True)
class Eventually:
    sub: object


@dataclass(frozen=True)
class Eq:
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Lt:
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Neq:
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Assign:
    """Guarded assignment: when the value is defined, the target equals it."""

    target: TemporalTerm
    value: LinearTerm


@dataclass(frozen=True)
class Df:
    """Definedness of every temporal term occurring in a linear term."""

    term: LinearTerm


CORE_TYPES = (Atom, Bottom, And, Or, Implies, Next, Until, Release, Previous, Since, Trigger)

_BINARY = (And, Or, Implies, Until, Release, Since, Trigger, Iff)
_UNARY = (Next, Previous, Not, WeakPrev, WeakNext, AlwaysPast, EventuallyPast, Always, Eventually)
_NULLARY = (Bottom, Top, Initial, Final)
_COMPARISONS = (Eq, Lt, Neq)


def conj(parts):
    """Left fold of a conjunction; Top for the empty list."""
    parts = list(parts)
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def leq_atom(lhs, rhs):
    return Atom(LinearLeq(lhs, rhs))


def df_formula(alpha):
    """Conjunction of one self-comparison per distinct term of alpha.

    Constants contribute nothing, so a constant-only term yields Top.
    """
    parts = [
        leq_atom(lt_single(t), lt_single(t)) for t in linear_terms(alpha)
    ]
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


@lru_cache(maxsize=None)
def desugar(formula):
    """Rewrite a formula into the core connectives.

    Total, deterministic, and idempotent; preserves the variable set and the
    offset span.
    """
    t = type(formula)
    if t is Atom or t is Bottom:
        return formula
    if t in (And, Or, Implies, Until, Release, Since, Trigger):
        return t(desugar(formula.lhs), desugar(formula.rhs))
    if t in (Next, Previous):
        return t(desugar(formula.sub))
    if t is Top:
        return Implies(Bottom(), Bottom())
    if t is Not:
        return Implies(desugar(formula.sub), Bottom())
    if t is Iff:
        a, b = desugar(formula.lhs), desugar(formula.rhs)
        return And(Implies(a, b), Implies(b, a))
    if t is Initial:
        return desugar(Not(Previous(Top())))
    if t is Final:
        return desugar(Not(Next(Top())))
    if t is WeakPrev:
        return Or(Previous(desugar(formula.sub)), desugar(Initial()))
    if t is WeakNext:
        return Or(Next(desugar(formula.sub)), desugar(Final()))
    if t is AlwaysPast:
        return Trigger(Bottom(), desugar(formula.sub))
    if t is EventuallyPast:
        return Since(desugar(Top()), desugar(formula.sub))
    if t is Always:
        return Release(Bottom(), desugar(formula.sub))
    if t is Eventually:
        return Until(desugar(Top()), desugar(formula.sub))
    if t is Eq:
        return And(leq_atom(formula.lhs, formula.rhs), leq_atom(formula.rhs, formula.lhs))
    if t is Lt:
        return And(
            leq_atom(formula.lhs, formula.rhs),
            Implies(leq_atom(formula.rhs, formula.lhs), Bottom()),
        )
    if t is Neq:
        return Or(desugar(Lt(formula.lhs, formula.rhs)), desugar(Lt(formula.rhs, formula.lhs)))
    if t is Assign:
        return Implies(
            desugar(df_formula(formula.value)),
            desugar(Eq(lt_single(formula.target), formula.value)),
        )
    if t is Df:
        return desugar(df_formula(formula.term))
    raise TypeError("not a formula node: %r" % (formula,))


def _atom_temporal_terms(atom):
    if isinstance(atom, LinearLeq):
        return tuple(t for _, t in atom.lhs.summands) + tuple(t for _, t in atom.rhs.summands)
    if isinstance(atom, BoolIsTrue):
        return (atom.term,)
    if isinstance(atom, CustomAtom):
        return atom.args
    if isinstance(atom, Complement):
        return _atom_temporal_terms(atom.inner)
    raise TypeError("not a constraint atom: %r" % (atom,))


def walk_terms(formula):
    """Yield every temporal term occurring in a formula, sugar included."""
    t = type(formula)
    if t is Atom:
        yield from _atom_temporal_terms(formula.atom)
    elif t in _COMPARISONS:
        yield from (term for _, term in formula.lhs.summands)
        yield from (term for _, term in formula.rhs.summands)
    elif t is Assign:
        yield formula.target
        yield from (term for _, term in formula.value.summands)
    elif t is Df:
        yield from (term for _, term in formula.term.summands)
    elif t in _BINARY:
        yield from walk_terms(formula.lhs)
        yield from walk_terms(formula.rhs)
    elif t in _UNARY:
        yield from walk_terms(formula.sub)
    elif t in _NULLARY:
        return
    else:
        raise TypeError("not a formula node: %r" % (formula,))


def offset_span(formula):
    """Least and greatest term offsets in a formula; (0, 0) when it has none."""
    offsets = [t.offset for t in walk_terms(formula) if t.variable != ONE]
    if not offsets:
        return (0, 0)
    return (min(offsets), max(offsets))


def formula_variables(formula):
    """Names of the variables occurring in a formula."""
    return {t.variable for t in walk_terms(formula) if t.variable != ONE}


def atoms_of(formula):
    """Constraint atoms of a formula after desugaring, in occurrence order."""
    out = []

    def walk(node):
        t = type(node)
        if t is Atom:
            if node.atom not in out:
                out.append(node.atom)
        elif t in (And, Or, Implies, Until, Release, Since, Trigger):
            walk(node.lhs)
            walk(node.rhs)
        elif t in (Next, Previous):
            walk(node.sub)

    walk(desugar(formula))
    return tuple(out)


# Rules and programs ---------------------------------------------------------

SCOPE_INITIAL = "initial"
SCOPE_ALWAYS = "always"


@dataclass(frozen=True)
class Rule:
    """A constraint rule: an assignment or Boolean head with a literal body.

    Body literals are comparison atoms, Boolean atoms, or their negations;
    nested connectives are not allowed.  Scope "always" wraps the rule so it
    is enforced at every time point; "initial" enforces it at time 0 only.
    """

    head: object
    positive_body: tuple = ()
    negative_body: tuple = ()
    scope: str = SCOPE_INITIAL

    def __post_init__(self):
        if not isinstance(self.head, (Assign, Atom)):
            raise TypeError("rule head must be an assignment or a Boolean atom")
        if isinstance(self.head, Atom) and not isinstance(self.head.atom, BoolIsTrue):
            raise TypeError("atomic rule heads must be Boolean atoms")
        for lit in self.positive_body + self.negative_body:
            if not is_body_literal(lit):
                raise TypeError("rule bodies admit constraint literals only: %r" % (lit,))
        if self.scope not in (SCOPE_INITIAL, SCOPE_ALWAYS):
            raise ValueError("unknown rule scope: %r" % (self.scope,))


def is_body_literal(formula):
    """Comparison atoms, bare atoms over linear/Boolean constraints, nothing nested."""
    if isinstance(formula, _COMPARISONS):
        return True
    if isinstance(formula, Atom):
        return isinstance(formula.atom, (LinearLeq, BoolIsTrue, Complement))
    return False


def rule_formula(rule):
    """The rule as a formula: body implication around the (sugared) head."""
    body = [*rule.positive_body, *(Not(lit) for lit in rule.negative_body)]
    if not body:
        return rule.head
    folded = body[0]
    for lit in body[1:]:
        folded = And(folded, lit)
    return Implies(folded, rule.head)


SORT_RATIONAL = "rational"
SORT_BOOLEAN = "boolean"


@dataclass(frozen=True)
class VarDecl:
    name: str
    sort: str
    domain: tuple | None = None

    def __post_init__(self):
        if self.sort not in (SORT_RATIONAL, SORT_BOOLEAN):
            raise ValueError("unknown sort: %r" % (self.sort,))
        if self.domain is not None and not self.domain:
            raise ValueError("candidate domain must be nonempty")


@dataclass(frozen=True)
class Program:
    """Declared variables and rules; every rule variable must be declared."""

    declarations: tuple
    rules: tuple

    def __post_init__(self):
        names = [d.name for d in self.declarations]
        if len(names) != len(set(names)):
            raise ValueError("duplicate variable declaration")
        declared = set(names)
        for rule in self.rules:
            for term in walk_terms(rule_formula(rule)):
                if term.variable != ONE and term.variable not in declared:
                    raise ValueError("undeclared variable: %s" % term.variable)

    def declaration(self, name):
        for d in self.declarations:
            if d.name == name:
                return d
        raise KeyError(name)

    def variable_names(self):
        return tuple(d.name for d in self.declarations)
