"""Shared test utilities: random instance generators and independent oracles."""

from __future__ import annotations

import itertools
from fractions import Fraction

from thtc import syntax
from thtc.semantics import BooleanHTTrace
from thtc.syntax import (
    Always,
    AlwaysPast,
    And,
    Atom,
    BoolIsTrue,
    Bottom,
    Eq,
    Eventually,
    EventuallyPast,
    Final,
    Iff,
    Implies,
    Initial,
    LinearLeq,
    LinearTerm,
    Lt,
    Neq,
    Next,
    Not,
    Or,
    Previous,
    Release,
    Since,
    TemporalTerm,
    Top,
    Trigger,
    Until,
    WeakNext,
    WeakPrev,
)
from thtc.trace import TRUE, HTcTrace, PartialValuation, Trace


def sample_model():
    """The four-state, two-variable trace pair used in worked examples."""
    here = Trace([{"x": 4}, {"x": 5}, {}, {"x": 5, "y": 6}])
    there = Trace([{"x": 4, "y": 6}, {"x": 5}, {"x": 4, "y": 5}, {"x": 5, "y": 6}])
    return HTcTrace(here, there)


# Random traces ----------------------------------------------------------------


def random_trace(rng, lam, pools):
    """A partial trace; pools maps variable name to candidate values."""
    states = []
    for _ in range(lam):
        state = {}
        for name, values in pools.items():
            pick = rng.randrange(len(values) + 1)
            if pick < len(values):
                state[name] = values[pick]
        states.append(state)
    return Trace(states)


def weaken_randomly(rng, trace):
    """A random here-trace below the given trace."""
    states = []
    for val in trace.valuations:
        state = {}
        for name, value in val.items():
            if rng.random() < 0.6:
                state[name] = value
        states.append(state)
    return Trace(states)


def random_model(rng, lam, pools):
    there = random_trace(rng, lam, pools)
    return HTcTrace(weaken_randomly(rng, there), there)


RATIONAL_POOL = (Fraction(0), Fraction(1), Fraction(2))


def rational_pools(variables):
    return {name: RATIONAL_POOL for name in variables}


# Random formulas ----------------------------------------------------------------


def random_linear_term(rng, variables, offsets=(-2, -1, 0, 1, 2)):
    count = rng.randrange(1, 3)
    summands = []
    for _ in range(count):
        if rng.random() < 0.25:
            summands.append((Fraction(rng.randrange(-2, 4)), syntax.one_term()))
        else:
            coeff = rng.choice((1, 1, 1, 2, -1))
            term = TemporalTerm(rng.choice(variables), rng.choice(offsets))
            summands.append((Fraction(coeff), term))
    return LinearTerm(tuple(summands))


def random_comparison(rng, variables, offsets=(-2, -1, 0, 1, 2)):
    lhs = random_linear_term(rng, variables, offsets)
    rhs = random_linear_term(rng, variables, offsets)
    build = rng.choice((Eq, Lt, Neq, lambda a, b: Atom(LinearLeq(a, b))))
    return build(lhs, rhs)


_UNARY = (Not, Next, Previous, WeakNext, WeakPrev, Always, Eventually, AlwaysPast, EventuallyPast)
_BINARY = (And, Or, Implies, Iff, Until, Release, Since, Trigger)
_NULLARY = (Top, Bottom, Initial, Final)


def random_formula(rng, depth, atom_maker):
    if depth <= 0 or rng.random() < 0.25:
        return atom_maker(rng)
    roll = rng.random()
    if roll < 0.08:
        return rng.choice(_NULLARY)()
    if roll < 0.5:
        return rng.choice(_UNARY)(random_formula(rng, depth - 1, atom_maker))
    build = rng.choice(_BINARY)
    return build(
        random_formula(rng, depth - 1, atom_maker),
        random_formula(rng, depth - 1, atom_maker),
    )


def bool_atom_maker(names):
    def make(rng):
        return Atom(BoolIsTrue(TemporalTerm(rng.choice(names), 0)))

    return make


def mixed_atom_maker(variables, bool_names=(), offsets=(-2, -1, 0, 1, 2), some_zero_var=None):
    """Atoms over comparisons, Boolean variables, and optionally some_zero."""
    from thtc.constraints import SOME_ZERO
    from thtc.syntax import CustomAtom

    def make(rng):
        roll = rng.random()
        if bool_names and roll < 0.2:
            return Atom(BoolIsTrue(TemporalTerm(rng.choice(bool_names), 0)))
        if some_zero_var is not None and roll < 0.3:
            return Atom(
                CustomAtom(
                    "some_zero",
                    (
                        TemporalTerm(some_zero_var, -1),
                        TemporalTerm(some_zero_var, 0),
                        TemporalTerm(some_zero_var, 1),
                    ),
                    SOME_ZERO,
                )
            )
        return random_comparison(rng, variables, offsets)

    return make


def strict_atom_maker(variables, offsets=(-2, -1, 0, 1, 2)):
    def make(rng):
        return random_comparison(rng, variables, offsets)

    return make


# Independent oracles ------------------------------------------------------------


def boolean_subtraces(total):
    """All Boolean here-components strictly below a total atom-set trace."""
    options = []
    for atoms in total:
        atoms = sorted(atoms)
        subsets = []
        for size in range(len(atoms) + 1):
            subsets.extend(frozenset(c) for c in itertools.combinations(atoms, size))
        options.append(subsets)
    for choice in itertools.product(*options):
        if tuple(choice) != tuple(frozenset(a) for a in total):
            yield choice


def tht_equilibrium(total_sets, formula):
    """Boolean equilibrium test by enumerating smaller here-components."""
    from thtc.semantics import tht_satisfies

    total = BooleanHTTrace(total_sets, total_sets)
    if not tht_satisfies(total, 0, formula):
        return False
    for here in boolean_subtraces(total.there):
        if tht_satisfies(BooleanHTTrace(here, total.there), 0, formula):
            return False
    return True


def single_state_satisfies(vh, vt, formula):
    """Hand-rolled satisfaction for temporal-operator-free formulas over one
    pair of valuations; structured over valuations, not traces."""
    from thtc import constraints

    def atom_ok(atom, valuation):
        terms = constraints.atom_terms(atom)
        values = tuple(
            valuation.get(t.variable) if t.offset == 0 else None for t in terms
        )
        return constraints.membership(atom, values)

    def ev(node, world):
        t = type(node)
        if t is Atom:
            if world == "h":
                return atom_ok(node.atom, vh) and atom_ok(node.atom, vt)
            return atom_ok(node.atom, vt)
        if t is Bottom:
            return False
        if t is Top:
            return True
        if t is Not:
            return ev(Implies(node.sub, Bottom()), world)
        if t is And:
            return ev(node.lhs, world) and ev(node.rhs, world)
        if t is Or:
            return ev(node.lhs, world) or ev(node.rhs, world)
        if t is Implies:
            worlds = ("h", "t") if world == "h" else ("t",)
            return all((not ev(node.lhs, w)) or ev(node.rhs, w) for w in worlds)
        if t is Iff:
            return ev(And(Implies(node.lhs, node.rhs), Implies(node.rhs, node.lhs)), world)
        if t in (Eq, Lt, Neq):
            return ev(syntax.desugar(node), world)
        raise TypeError("single-state oracle covers Boolean connectives only")

    return ev(formula, "h")


def valuation_of(mapping):
    return PartialValuation(mapping)
