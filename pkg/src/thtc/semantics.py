"""Satisfaction of temporal constraint formulas over here-and-there traces.

Evaluation is structural recursion with memoization keyed by (node, time,
world).  Exactly two worlds exist: the given pair and the pair formed by the
there-trace with itself; implication quantifies over both, which is what
separates this semantics from classical finite-trace evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import constraints, syntax
from .syntax import (
    And,
    Atom,
    BoolIsTrue,
    Bottom,
    Implies,
    Next,
    Or,
    Previous,
    Release,
    Since,
    Trigger,
    Until,
    desugar,
)
from .trace import TRUE, HTcTrace, Trace, proper_weakenings, total_trace


class NonStrictAtomError(Exception):
    """Raised when the here-only shortcut meets a non-strict atom."""


class EntryLimitError(Exception):
    """Raised when a minimality check would enumerate too many weakenings."""


MODE_GENERAL = "general"
MODE_STRICT = "strict"


@dataclass
class EvalContext:
    """Bundled evaluation state: the model and the atom evaluation mode."""

    model: HTcTrace
    mode: str = MODE_GENERAL


class _Eval:
    __slots__ = ("model", "mode", "memo")

    def __init__(self, model, mode):
        self.model = model
        self.mode = mode
        self.memo = {}

    def atom_value(self, atom, i, world):
        terms = constraints.atom_terms(atom)
        if self.mode == MODE_STRICT:
            if not constraints.atom_is_strict(atom):
                raise NonStrictAtomError(
                    "here-only evaluation requires strict atoms: %r" % (atom,)
                )
            trace = self.model.here if world == "h" else self.model.there
            values = tuple(trace.value_at(i, t) for t in terms)
            return constraints.membership(atom, values)
        # General clause: the tuple must belong to the relation under every
        # component of the current world's pair.
        traces = (self.model.here, self.model.there) if world == "h" else (self.model.there,)
        for trace in traces:
            values = tuple(trace.value_at(i, t) for t in terms)
            if not constraints.membership(atom, values):
                return False
        return True

    def eval(self, node, i, world):
        key = (id(node), i, world)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        t = type(node)
        lam = self.model.length
        if t is Atom:
            out = self.atom_value(node.atom, i, world)
        elif t is Bottom:
            out = False
        elif t is And:
            out = self.eval(node.lhs, i, world) and self.eval(node.rhs, i, world)
        elif t is Or:
            out = self.eval(node.lhs, i, world) or self.eval(node.rhs, i, world)
        elif t is Implies:
            worlds = ("h", "t") if world == "h" else ("t",)
            out = all(
                (not self.eval(node.lhs, i, w)) or self.eval(node.rhs, i, w)
                for w in worlds
            )
        elif t is Next:
            out = i < lam - 1 and self.eval(node.sub, i + 1, world)
        elif t is Previous:
            out = i > 0 and self.eval(node.sub, i - 1, world)
        elif t is Until:
            out = any(
                self.eval(node.rhs, k, world)
                and all(self.eval(node.lhs, j, world) for j in range(i, k))
                for k in range(i, lam)
            )
        elif t is Release:
            out = all(
                self.eval(node.rhs, k, world)
                or any(self.eval(node.lhs, j, world) for j in range(i, k))
                for k in range(i, lam)
            )
        elif t is Since:
            out = any(
                self.eval(node.rhs, k, world)
                and all(self.eval(node.lhs, j, world) for j in range(k + 1, i + 1))
                for k in range(0, i + 1)
            )
        elif t is Trigger:
            out = all(
                self.eval(node.rhs, k, world)
                or any(self.eval(node.lhs, j, world) for j in range(k + 1, i + 1))
                for k in range(0, i + 1)
            )
        else:
            raise TypeError("formula is not in core form: %r" % (node,))
        self.memo[key] = out
        return out


def _check_index(model, i):
    if not 0 <= i < model.length:
        raise IndexError(
            "time point %d outside trace of length %d" % (i, model.length)
        )


def satisfies(model, i, formula):
    """Does the trace pair satisfy the formula at time point i?

    Atoms are checked under both the here and there valuations; implication
    additionally consults the pair formed by the there-trace with itself.
    Sugar is desugared on entry.
    """
    _check_index(model, i)
    return _Eval(model, MODE_GENERAL).eval(desugar(formula), i, "h")


def satisfies_strict(model, i, formula):
    """Like ``satisfies`` but atoms read the here-trace only.

    Legal exactly when every atom in the formula is strict, in which case it
    agrees with ``satisfies``; a non-strict atom raises NonStrictAtomError.
    """
    _check_index(model, i)
    return _Eval(model, MODE_STRICT).eval(desugar(formula), i, "h")


DERIVED_OPS = (
    "always",
    "eventually",
    "always_past",
    "eventually_past",
    "initial",
    "final",
    "weak_next",
    "weak_prev",
)


def derived_oracle(model, i, op, operand=None):
    """Direct evaluation of a derived operator, bypassing desugaring.

    Serves as an independent reference for the rewrite-based evaluation: each
    operator gets its closed-form clause over time indices.
    """
    _check_index(model, i)
    lam = model.length
    if op == "always":
        return all(satisfies(model, j, operand) for j in range(i, lam))
    if op == "eventually":
        return any(satisfies(model, j, operand) for j in range(i, lam))
    if op == "always_past":
        return all(satisfies(model, j, operand) for j in range(0, i + 1))
    if op == "eventually_past":
        return any(satisfies(model, j, operand) for j in range(0, i + 1))
    if op == "initial":
        return i == 0
    if op == "final":
        return i == lam - 1
    if op == "weak_next":
        return i == lam - 1 or satisfies(model, i + 1, operand)
    if op == "weak_prev":
        return i == 0 or satisfies(model, i - 1, operand)
    raise ValueError("unknown derived operator: %r" % (op,))


def is_equilibrium(there, formula, entry_limit=20):
    """Equilibrium (stable) model test by direct weakening enumeration.

    The trace must satisfy the formula at time 0 when paired with itself, and
    no proper weakening of it may satisfy the formula when paired with the
    original.  Exponential in the number of defined entries, hence the
    configurable limit.
    """
    if not isinstance(there, Trace):
        there = Trace(there)
    defined = len(there.defined_entries())
    if defined > entry_limit:
        raise EntryLimitError(
            "%d defined entries exceed the minimality limit of %d"
            % (defined, entry_limit)
        )
    if not satisfies(total_trace(there), 0, formula):
        return False
    for weaker in proper_weakenings(there):
        if satisfies(HTcTrace(weaker, there), 0, formula):
            return False
    return True


# Boolean traces and their constraint embedding ------------------------------


@dataclass(frozen=True)
class BooleanHTTrace:
    """A pair of equal-length sequences of atom sets, here included in there."""

    here: tuple
    there: tuple

    def __post_init__(self):
        here = tuple(frozenset(h) for h in self.here)
        there = tuple(frozenset(t) for t in self.there)
        object.__setattr__(self, "here", here)
        object.__setattr__(self, "there", there)
        if len(here) != len(there) or not here:
            raise ValueError("here/there must be nonempty and of equal length")
        for h, t in zip(here, there):
            if not h <= t:
                raise ValueError("here-atoms must be included in there-atoms")

    @property
    def length(self):
        return len(self.here)


def _bool_atom_name(node):
    if isinstance(node, Atom) and isinstance(node.atom, BoolIsTrue):
        term = node.atom.term
        if term.offset == 0:
            return term.variable
    raise TypeError("Boolean temporal formulas admit offset-free Boolean atoms only")


def tht_satisfies(bt, i, formula):
    """Satisfaction over Boolean here-and-there traces.

    Atoms hold when their name belongs to the current world's atom set; every
    other clause mirrors the constraint semantics.  Implemented directly over
    the atom sets so it can serve as an independent reference for the
    constraint embedding.
    """
    if not 0 <= i < bt.length:
        raise IndexError("time point %d outside trace of length %d" % (i, bt.length))
    lam = bt.length

    def ev(node, j, world):
        t = type(node)
        if t is Atom:
            name = _bool_atom_name(node)
            sets = bt.here if world == "h" else bt.there
            return name in sets[j]
        if t is Bottom:
            return False
        if t is And:
            return ev(node.lhs, j, world) and ev(node.rhs, j, world)
        if t is Or:
            return ev(node.lhs, j, world) or ev(node.rhs, j, world)
        if t is Implies:
            worlds = ("h", "t") if world == "h" else ("t",)
            return all((not ev(node.lhs, j, w)) or ev(node.rhs, j, w) for w in worlds)
        if t is Next:
            return j < lam - 1 and ev(node.sub, j + 1, world)
        if t is Previous:
            return j > 0 and ev(node.sub, j - 1, world)
        if t is Until:
            return any(
                ev(node.rhs, k, world) and all(ev(node.lhs, m, world) for m in range(j, k))
                for k in range(j, lam)
            )
        if t is Release:
            return all(
                ev(node.rhs, k, world) or any(ev(node.lhs, m, world) for m in range(j, k))
                for k in range(j, lam)
            )
        if t is Since:
            return any(
                ev(node.rhs, k, world)
                and all(ev(node.lhs, m, world) for m in range(k + 1, j + 1))
                for k in range(0, j + 1)
            )
        if t is Trigger:
            return all(
                ev(node.rhs, k, world)
                or any(ev(node.lhs, m, world) for m in range(k + 1, j + 1))
                for k in range(0, j + 1)
            )
        raise TypeError("formula is not in core form: %r" % (node,))

    return ev(desugar(formula), i, "h")


def delta_embed(bt):
    """Embed a Boolean trace pair into a constraint trace pair.

    An atom in a state becomes the truth constant on the variable of the same
    name; absent atoms stay undefined.  Inclusion of atom sets yields the
    information ordering, so the result is a valid pair.
    """
    here = [{name: TRUE for name in h} for h in bt.here]
    there = [{name: TRUE for name in t} for t in bt.there]
    return HTcTrace(Trace(here), Trace(there))


def bool_atom(name):
    """The formula asserting a Boolean variable is true at the current state."""
    return Atom(BoolIsTrue(syntax.TemporalTerm(name, 0)))
