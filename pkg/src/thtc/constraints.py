"""Solution relations for constraint atoms.

Relations are intensional: a relation is a total predicate over value tuples,
not an extensional table, since the rational domain is infinite.  A relation
is strict when it rejects every tuple containing an undefined component; the
comparison atoms and Boolean atoms are strict, while custom atoms declare
their own strictness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import syntax
from .syntax import BoolIsTrue, Complement, CustomAtom, LinearLeq
from .trace import ONE, TRUE


@dataclass(eq=False)
class SolutionRelation:
    """A named membership predicate over value tuples of fixed arity."""

    name: str
    arity: int
    membership: object
    strict: bool

    def __call__(self, values):
        if len(values) != self.arity:
            raise ValueError(
                "%s expects %d values, got %d" % (self.name, self.arity, len(values))
            )
        return bool(self.membership(values))


def some_zero_membership(values):
    """True when some component is the rational zero; undefined slots are tolerated."""
    if len(values) != 3:
        raise ValueError("some_zero expects 3 values")
    return any(isinstance(v, Fraction) and v == 0 for v in values)


SOME_ZERO = SolutionRelation("some_zero", 3, some_zero_membership, strict=False)

#: Custom atom registry, consulted by the parser.  Frozen by convention once a
#: program has been loaded; only some_zero ships built in.
REGISTRY = {"some_zero": SOME_ZERO}


def register_relation(relation):
    if relation.name in REGISTRY:
        raise ValueError("atom name already registered: %s" % relation.name)
    REGISTRY[relation.name] = relation


@lru_cache(maxsize=None)
def atom_terms(atom):
    """The tuple slots of an atom: one temporal term per syntactic occurrence.

    Occurrences of the constant pseudo-variable are excluded; their
    contribution is folded into the membership arithmetic.
    """
    if isinstance(atom, LinearLeq):
        return tuple(
            t
            for side in (atom.lhs, atom.rhs)
            for _, t in side.summands
            if t.variable != ONE
        )
    if isinstance(atom, BoolIsTrue):
        return (atom.term,)
    if isinstance(atom, CustomAtom):
        return atom.args
    if isinstance(atom, Complement):
        return atom_terms(atom.inner)
    raise TypeError("not a constraint atom: %r" % (atom,))


def atom_arity(atom):
    return len(atom_terms(atom))


def atom_is_strict(atom):
    if isinstance(atom, (LinearLeq, BoolIsTrue)):
        return True
    if isinstance(atom, Complement):
        return True
    if isinstance(atom, CustomAtom):
        if atom.relation is None:
            raise LookupError("custom atom has no registered relation: %s" % atom.name)
        return atom.relation.strict
    raise TypeError("not a constraint atom: %r" % (atom,))


@lru_cache(maxsize=None)
def _linear_plan(atom):
    # Per side: list of (coefficient, slot index or None for a constant).
    slot = 0
    plans = []
    for side in (atom.lhs, atom.rhs):
        plan = []
        for coeff, term in side.summands:
            if term.variable == ONE:
                plan.append((coeff, None))
            else:
                plan.append((coeff, slot))
                slot += 1
        plans.append(tuple(plan))
    return tuple(plans)


def linear_leq_membership(atom, values):
    """Membership check for a linear comparison atom.

    False as soon as any slot is undefined; otherwise both sides are summed
    with exact rational arithmetic and compared.
    """
    if any(v is None for v in values):
        return False
    if any(v is TRUE for v in values):
        return False
    lhs_plan, rhs_plan = _linear_plan(atom)
    sides = []
    for plan in (lhs_plan, rhs_plan):
        total = Fraction(0)
        for coeff, idx in plan:
            total += coeff if idx is None else coeff * values[idx]
        sides.append(total)
    return sides[0] <= sides[1]


def membership(atom, values):
    """Evaluate an atom's solution relation on a tuple of values."""
    values = tuple(values)
    if len(values) != atom_arity(atom):
        raise ValueError(
            "atom of arity %d applied to %d values" % (atom_arity(atom), len(values))
        )
    if isinstance(atom, LinearLeq):
        return linear_leq_membership(atom, values)
    if isinstance(atom, BoolIsTrue):
        return values[0] is TRUE
    if isinstance(atom, CustomAtom):
        if atom.relation is None:
            raise LookupError("custom atom has no registered relation: %s" % atom.name)
        return atom.relation(values)
    if isinstance(atom, Complement):
        if any(v is None for v in values):
            return False
        return not membership(atom.inner, values)
    raise TypeError("not a constraint atom: %r" % (atom,))


def complement(atom):
    """The complement atom of a strict atom; itself strict.

    Membership holds exactly on the fully defined tuples outside the inner
    relation.  Complements of non-strict atoms are rejected.
    """
    if not atom_is_strict(atom):
        raise ValueError("complement is defined for strict atoms only")
    return Complement(atom)


def terms_of(alpha):
    """The set of distinct temporal terms of a linear term, constants excluded."""
    return set(syntax.linear_terms(alpha))


def build_df(alpha):
    """Definedness formula of a linear term.

    One self-comparison atom per distinct temporal term; Top when only
    constants occur.
    """
    return syntax.df_formula(alpha)
