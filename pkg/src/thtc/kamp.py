"""Standard translation of temporal constraint formulas into quantified
here-and-there syntax with evaluable functions, plus a finite evaluator.

Time points become a sort of constants 0..length-1 with the natural order
and shifted addition; each variable x becomes a partial evaluable function
f_x from time points to values; each constraint atom becomes a predicate
whose extension at a state is derived from the trace.  Quantifiers range
over the time sort only; value terms are reachable solely through the f_x
functions.

The temporal connectives translate as usual for a standard translation over
a strict order: next and previous bind a fresh neighbor point, until/since
pair an existential with a bounded universal, release/trigger dually, and
the derived operators use direct one-quantifier forms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import constraints, syntax
from .semantics import EntryLimitError
from .syntax import (
    Always,
    AlwaysPast,
    And,
    Assign,
    Atom,
    Bottom,
    Df,
    Eq,
    Eventually,
    EventuallyPast,
    Final,
    Iff,
    Implies,
    Initial,
    Lt,
    Neq,
    Next,
    Not,
    Or,
    Previous,
    Release,
    Since,
    Top,
    Trigger,
    Until,
    WeakNext,
    WeakPrev,
    desugar,
    lt_is_single_var,
)
from .trace import ONE, TRUE

# First-order terms -----------------------------------------------------------


@dataclass(frozen=True)
class TimeVar:
    name: str


@dataclass(frozen=True)
class TimeConst:
    index: int


@dataclass(frozen=True)
class TimePlus:
    base: object
    shift: int


@dataclass(frozen=True)
class FApp:
    """Application of the evaluable function of a variable to a time term."""

    function: str
    arg: object


def _plus(base, shift):
    if shift == 0:
        return base
    return TimePlus(base, shift)


# First-order formulas ---------------------------------------------------------


@dataclass(frozen=True)
class FOBottom:
    pass


@dataclass(frozen=True)
class FOTop:
    pass


@dataclass(frozen=True)
class FOPred:
    name: str
    args: tuple


@dataclass(frozen=True)
class FOEq:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class FOLt:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class FOAnd:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class FOOr:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class FOImplies:
    lhs: object
    rhs: object


@dataclass(frozen=True)
class FOExists:
    var: str
    body: object


@dataclass(frozen=True)
class FOForall:
    var: str
    body: object


def fo_not(psi):
    return FOImplies(psi, FOBottom())


def fo_leq(a, b):
    return FOOr(FOLt(a, b), FOEq(a, b))


def atom_pred_name(atom):
    """Deterministic predicate name for a constraint atom.

    Built from the atom's canonical rendering with a fixed character
    substitution; readable in exported text.
    """
    from .parser import print_atom

    text = print_atom(atom)
    table = {
        "@": "_at_",
        "<=": "_le_",
        "*": "_x_",
        "+": "_plus_",
        "-": "_m_",
        "(": "_",
        ")": "_",
        ",": "_",
        " ": "",
        ".": "_d_",
        "/": "_over_",
    }
    out = []
    i = 0
    while i < len(text):
        if text.startswith("<=", i):
            out.append(table["<="])
            i += 2
            continue
        ch = text[i]
        out.append(table.get(ch, ch))
        i += 1
    return "p_" + "".join(out)


class _Fresh:
    def __init__(self, free_var):
        self.free_var = free_var
        self.counter = 0

    def next(self):
        while True:
            self.counter += 1
            name = "t%d" % self.counter
            if name != self.free_var:
                return name


def st_translate(formula, free_var="t"):
    """Translate a temporal formula; the result's only free variable names
    the evaluation time point.

    Comparison sugar between two unscaled variable terms uses the interpreted
    equality/order predicates on f-terms; every other atom becomes an
    uninterpreted predicate over its term slots.  Bound variables are fresh
    and pairwise distinct.
    """
    fresh = _Fresh(free_var)

    def tr(node, t):
        kind = type(node)
        if kind is Bottom:
            return FOBottom()
        if kind is Top:
            return FOTop()
        if kind is Atom:
            return atom_translation(node.atom, t)
        if kind is Eq or kind is Lt:
            a = lt_is_single_var(node.lhs)
            b = lt_is_single_var(node.rhs)
            if a is not None and b is not None:
                build = FOEq if kind is Eq else FOLt
                return build(
                    FApp("f_" + a.variable, _plus(TimeVar(t), a.offset)),
                    FApp("f_" + b.variable, _plus(TimeVar(t), b.offset)),
                )
            return tr(desugar(node), t)
        if kind in (Neq, Assign, Df):
            return tr(desugar(node), t)
        if kind is And:
            return FOAnd(tr(node.lhs, t), tr(node.rhs, t))
        if kind is Or:
            return FOOr(tr(node.lhs, t), tr(node.rhs, t))
        if kind is Implies:
            return FOImplies(tr(node.lhs, t), tr(node.rhs, t))
        if kind is Not:
            return fo_not(tr(node.sub, t))
        if kind is Iff:
            left = tr(node.lhs, t)
            right = tr(node.rhs, t)
            return FOAnd(FOImplies(left, right), FOImplies(right, left))
        if kind is Next:
            t1 = fresh.next()
            return FOExists(
                t1, FOAnd(FOEq(TimeVar(t1), _plus(TimeVar(t), 1)), tr(node.sub, t1))
            )
        if kind is Previous:
            t1 = fresh.next()
            return FOExists(
                t1, FOAnd(FOEq(TimeVar(t), _plus(TimeVar(t1), 1)), tr(node.sub, t1))
            )
        if kind is WeakNext:
            t1 = fresh.next()
            return FOForall(
                t1, FOImplies(FOEq(TimeVar(t1), _plus(TimeVar(t), 1)), tr(node.sub, t1))
            )
        if kind is WeakPrev:
            t1 = fresh.next()
            return FOForall(
                t1, FOImplies(FOEq(TimeVar(t), _plus(TimeVar(t1), 1)), tr(node.sub, t1))
            )
        if kind is Initial:
            t1 = fresh.next()
            return fo_not(FOExists(t1, FOLt(TimeVar(t1), TimeVar(t))))
        if kind is Final:
            t1 = fresh.next()
            return fo_not(FOExists(t1, FOLt(TimeVar(t), TimeVar(t1))))
        if kind is Always:
            t1 = fresh.next()
            return FOForall(
                t1, FOImplies(fo_leq(TimeVar(t), TimeVar(t1)), tr(node.sub, t1))
            )
        if kind is Eventually:
            t1 = fresh.next()
            return FOExists(
                t1, FOAnd(fo_leq(TimeVar(t), TimeVar(t1)), tr(node.sub, t1))
            )
        if kind is AlwaysPast:
            t1 = fresh.next()
            return FOForall(
                t1, FOImplies(fo_leq(TimeVar(t1), TimeVar(t)), tr(node.sub, t1))
            )
        if kind is EventuallyPast:
            t1 = fresh.next()
            return FOExists(
                t1, FOAnd(fo_leq(TimeVar(t1), TimeVar(t)), tr(node.sub, t1))
            )
        if kind is Until:
            t1 = fresh.next()
            t2 = fresh.next()
            return FOExists(
                t1,
                FOAnd(
                    fo_leq(TimeVar(t), TimeVar(t1)),
                    FOAnd(
                        tr(node.rhs, t1),
                        FOForall(
                            t2,
                            FOImplies(
                                FOAnd(
                                    fo_leq(TimeVar(t), TimeVar(t2)),
                                    FOLt(TimeVar(t2), TimeVar(t1)),
                                ),
                                tr(node.lhs, t2),
                            ),
                        ),
                    ),
                ),
            )
        if kind is Release:
            t1 = fresh.next()
            t2 = fresh.next()
            return FOForall(
                t1,
                FOImplies(
                    fo_leq(TimeVar(t), TimeVar(t1)),
                    FOOr(
                        tr(node.rhs, t1),
                        FOExists(
                            t2,
                            FOAnd(
                                fo_leq(TimeVar(t), TimeVar(t2)),
                                FOAnd(FOLt(TimeVar(t2), TimeVar(t1)), tr(node.lhs, t2)),
                            ),
                        ),
                    ),
                ),
            )
        if kind is Since:
            t1 = fresh.next()
            t2 = fresh.next()
            return FOExists(
                t1,
                FOAnd(
                    fo_leq(TimeVar(t1), TimeVar(t)),
                    FOAnd(
                        tr(node.rhs, t1),
                        FOForall(
                            t2,
                            FOImplies(
                                FOAnd(
                                    FOLt(TimeVar(t1), TimeVar(t2)),
                                    fo_leq(TimeVar(t2), TimeVar(t)),
                                ),
                                tr(node.lhs, t2),
                            ),
                        ),
                    ),
                ),
            )
        if kind is Trigger:
            t1 = fresh.next()
            t2 = fresh.next()
            return FOForall(
                t1,
                FOImplies(
                    fo_leq(TimeVar(t1), TimeVar(t)),
                    FOOr(
                        tr(node.rhs, t1),
                        FOExists(
                            t2,
                            FOAnd(
                                FOLt(TimeVar(t1), TimeVar(t2)),
                                FOAnd(fo_leq(TimeVar(t2), TimeVar(t)), tr(node.lhs, t2)),
                            ),
                        ),
                    ),
                ),
            )
        raise TypeError("not a formula node: %r" % (node,))

    def atom_translation(atom, t):
        terms = constraints.atom_terms(atom)
        args = tuple(
            FApp("f_" + term.variable, _plus(TimeVar(t), term.offset)) for term in terms
        )
        return FOPred(atom_pred_name(atom), args)

    return tr(formula, free_var)


def subst(psi, var, index):
    """Replace a free time variable by a time constant."""

    def in_term(term):
        k = type(term)
        if k is TimeVar:
            return TimeConst(index) if term.name == var else term
        if k is TimePlus:
            return TimePlus(in_term(term.base), term.shift)
        if k is FApp:
            return FApp(term.function, in_term(term.arg))
        return term

    k = type(psi)
    if k in (FOBottom, FOTop):
        return psi
    if k is FOPred:
        return FOPred(psi.name, tuple(in_term(a) for a in psi.args))
    if k is FOEq:
        return FOEq(in_term(psi.lhs), in_term(psi.rhs))
    if k is FOLt:
        return FOLt(in_term(psi.lhs), in_term(psi.rhs))
    if k in (FOAnd, FOOr, FOImplies):
        return k(subst(psi.lhs, var, index), subst(psi.rhs, var, index))
    if k in (FOExists, FOForall):
        if psi.var == var:
            return psi
        return k(psi.var, subst(psi.body, var, index))
    raise TypeError("not a first-order formula: %r" % (psi,))


# Interpretations and satisfaction ---------------------------------------------


class UnboundVariableError(Exception):
    pass


@dataclass(frozen=True)
class QHTInterpretation:
    """Finite here/there states: partial valuations of f-terms plus atom sets.

    ``sigma_h``/``sigma_t`` map (variable, time) to values; ``i_h``/``i_t``
    are sets of (predicate name, value tuple).  ``atoms`` records the atom
    vocabulary the interpretation was built from, so smaller states can be
    re-derived when testing for equilibrium.
    """

    length: int
    sigma_h: tuple
    sigma_t: tuple
    i_h: frozenset
    i_t: frozenset
    atoms: tuple = ()

    def __post_init__(self):
        sig_h = dict(self.sigma_h)
        sig_t = dict(self.sigma_t)
        for key, value in sig_h.items():
            if key not in sig_t or sig_t[key] != value:
                raise ValueError("here-state must refine to the there-state")
        if not self.i_h <= self.i_t:
            raise ValueError("here-atoms must be included in there-atoms")

    @property
    def total(self):
        return dict(self.sigma_h) == dict(self.sigma_t) and self.i_h == self.i_t


def correspond(model, atoms):
    """The interpretation corresponding to a trace pair over an atom vocabulary.

    Every atom must be strict.  The f-functions take the trace values; the
    predicate extension contains, for each atom and time point, the slot
    value tuple whenever it is fully defined and in the atom's relation.
    """
    atoms = tuple(atoms)
    for atom in atoms:
        if not constraints.atom_is_strict(atom):
            raise ValueError("the correspondence requires strict atoms: %r" % (atom,))
    lam = model.length

    def sigma(trace):
        out = {}
        for i in range(lam):
            for name, value in trace.valuations[i].items():
                out[(name, i)] = value
        return tuple(sorted(out.items(), key=_sigma_key))

    def extension(trace):
        facts = set()
        for atom in atoms:
            name = atom_pred_name(atom)
            terms = constraints.atom_terms(atom)
            for i in range(lam):
                values = tuple(trace.value_at(i, t) for t in terms)
                if any(v is None for v in values):
                    continue
                if constraints.membership(atom, values):
                    facts.add((name, values))
        return frozenset(facts)

    return QHTInterpretation(
        length=lam,
        sigma_h=sigma(model.here),
        sigma_t=sigma(model.there),
        i_h=extension(model.here),
        i_t=extension(model.there),
        atoms=atoms,
    )


def _sigma_key(item):
    (name, i), _ = item
    return (name, i)


_TIME = "time"
_VALUE = "value"


class _QHTEval:
    def __init__(self, interp):
        self.interp = interp
        self.sig_h = dict(interp.sigma_h)
        self.sig_t = dict(interp.sigma_t)

    def term_value(self, term, env, world):
        """Evaluate a ground term to (sort, payload) or None for undefined."""
        k = type(term)
        if k is TimeVar:
            if term.name not in env:
                raise UnboundVariableError("unbound time variable: %s" % term.name)
            return (_TIME, env[term.name])
        if k is TimeConst:
            return (_TIME, term.index)
        if k is TimePlus:
            base = self.term_value(term.base, env, world)
            if base is None:
                return None
            shifted = base[1] + term.shift
            if not 0 <= shifted < self.interp.length:
                return None
            return (_TIME, shifted)
        if k is FApp:
            arg = self.term_value(term.arg, env, world)
            if arg is None:
                return None
            name = term.function
            if not name.startswith("f_"):
                raise ValueError("unknown evaluable function: %s" % name)
            sigma = self.sig_h if world == "h" else self.sig_t
            value = sigma.get((name[2:], arg[1]))
            if value is None:
                return None
            return (_VALUE, value)
        raise TypeError("not a first-order term: %r" % (term,))

    def eval(self, psi, env, world):
        k = type(psi)
        if k is FOTop:
            return True
        if k is FOBottom:
            return False
        if k is FOPred:
            args = tuple(self.term_value(a, env, world) for a in psi.args)
            if any(a is None for a in args):
                return False
            facts = self.interp.i_h if world == "h" else self.interp.i_t
            return (psi.name, tuple(a[1] for a in args)) in facts
        if k is FOEq:
            a = self.term_value(psi.lhs, env, world)
            b = self.term_value(psi.rhs, env, world)
            return a is not None and b is not None and a == b
        if k is FOLt:
            a = self.term_value(psi.lhs, env, world)
            b = self.term_value(psi.rhs, env, world)
            if a is None or b is None or a[0] != b[0]:
                return False
            if a[1] is TRUE or b[1] is TRUE:
                return False
            return a[1] < b[1]
        if k is FOAnd:
            return self.eval(psi.lhs, env, world) and self.eval(psi.rhs, env, world)
        if k is FOOr:
            return self.eval(psi.lhs, env, world) or self.eval(psi.rhs, env, world)
        if k is FOImplies:
            worlds = ("h", "t") if world == "h" else ("t",)
            return all(
                (not self.eval(psi.lhs, env, w)) or self.eval(psi.rhs, env, w)
                for w in worlds
            )
        if k is FOExists:
            return any(
                self.eval(psi.body, {**env, psi.var: c}, world)
                for c in range(self.interp.length)
            )
        if k is FOForall:
            return all(
                self.eval(psi.body, {**env, psi.var: c}, world)
                for c in range(self.interp.length)
            )
        raise TypeError("not a first-order formula: %r" % (psi,))


def qht_satisfies(interp, psi, env=None):
    """Satisfaction at the here-world; quantifiers range over the time constants."""
    return _QHTEval(interp).eval(psi, env or {}, "h")


def qht_is_equilibrium(interp, psi, entry_limit=20):
    """Equilibrium over a total interpretation by enumerating smaller states.

    Smaller here-states are produced by undefining subsets of the f-term
    entries; the predicate extension of each is re-derived from the atom
    vocabulary, keeping the state space in one-to-one correspondence with
    trace weakenings.
    """
    if not interp.total:
        raise ValueError("equilibrium testing needs a total interpretation")
    if not qht_satisfies(interp, psi):
        return False
    entries = list(interp.sigma_t)
    if len(entries) > entry_limit:
        raise EntryLimitError(
            "%d defined entries exceed the minimality limit of %d"
            % (len(entries), entry_limit)
        )
    for size in range(1, len(entries) + 1):
        for removed in itertools.combinations(range(len(entries)), size):
            keep = [e for idx, e in enumerate(entries) if idx not in removed]
            smaller = _derive_here(interp, keep)
            if qht_satisfies(smaller, psi):
                return False
    return True


def _derive_here(interp, kept_entries):
    sigma_h = dict(kept_entries)
    facts = set()
    for atom in interp.atoms:
        name = atom_pred_name(atom)
        terms = constraints.atom_terms(atom)
        for i in range(interp.length):
            values = []
            defined = True
            for term in terms:
                if term.variable == ONE:
                    values.append(Fraction(1))
                    continue
                j = i + term.offset
                if not 0 <= j < interp.length:
                    defined = False
                    break
                value = sigma_h.get((term.variable, j))
                if value is None:
                    defined = False
                    break
                values.append(value)
            if defined and constraints.membership(atom, tuple(values)):
                facts.add((name, tuple(values)))
    return QHTInterpretation(
        length=interp.length,
        sigma_h=tuple(sorted(sigma_h.items(), key=_sigma_key)),
        sigma_t=interp.sigma_t,
        i_h=frozenset(facts),
        i_t=interp.i_t,
        atoms=interp.atoms,
    )


# Text export ------------------------------------------------------------------


def _export_term(term):
    k = type(term)
    if k is TimeVar:
        return term.name
    if k is TimeConst:
        return str(term.index)
    if k is TimePlus:
        return "plus(%s, %d)" % (_export_term(term.base), term.shift)
    if k is FApp:
        return "app(%s, %s)" % (term.function, _export_term(term.arg))
    raise TypeError("not a first-order term: %r" % (term,))


def _export_formula(psi):
    k = type(psi)
    if k is FOBottom:
        return "$false"
    if k is FOTop:
        return "$true"
    if k is FOPred:
        return "%s(%s)" % (psi.name, ", ".join(_export_term(a) for a in psi.args))
    if k is FOEq:
        return "eq(%s, %s)" % (_export_term(psi.lhs), _export_term(psi.rhs))
    if k is FOLt:
        return "lt(%s, %s)" % (_export_term(psi.lhs), _export_term(psi.rhs))
    if k is FOAnd:
        return "and(%s, %s)" % (_export_formula(psi.lhs), _export_formula(psi.rhs))
    if k is FOOr:
        return "or(%s, %s)" % (_export_formula(psi.lhs), _export_formula(psi.rhs))
    if k is FOImplies:
        return "implies(%s, %s)" % (_export_formula(psi.lhs), _export_formula(psi.rhs))
    if k is FOExists:
        return "exists(%s, %s)" % (psi.var, _export_formula(psi.body))
    if k is FOForall:
        return "forall(%s, %s)" % (psi.var, _export_formula(psi.body))
    raise TypeError("not a first-order formula: %r" % (psi,))


def _collect_symbols(psi, funs, preds, variables):
    k = type(psi)
    if k is FOPred:
        preds.add((psi.name, len(psi.args)))
        for arg in psi.args:
            _collect_term_symbols(arg, funs, variables)
    elif k in (FOEq, FOLt):
        _collect_term_symbols(psi.lhs, funs, variables)
        _collect_term_symbols(psi.rhs, funs, variables)
    elif k in (FOAnd, FOOr, FOImplies):
        _collect_symbols(psi.lhs, funs, preds, variables)
        _collect_symbols(psi.rhs, funs, preds, variables)
    elif k in (FOExists, FOForall):
        _collect_symbols(psi.body, funs, preds, variables)


def _collect_term_symbols(term, funs, variables):
    k = type(term)
    if k is TimeVar:
        variables.add(term.name)
    elif k is TimePlus:
        _collect_term_symbols(term.base, funs, variables)
    elif k is FApp:
        funs.add(term.function)
        _collect_term_symbols(term.arg, funs, variables)


def export_fo(psi):
    """Deterministic prefix text with a declaration header.

    Header lines start with ``%`` and declare the time sort, the evaluable
    functions, and the predicates in use; the final line is the formula in
    parenthesized prefix form.
    """
    funs = set()
    preds = set()
    variables = set()
    _collect_symbols(psi, funs, preds, variables)
    lines = ["% sort time"]
    for name in sorted(funs):
        lines.append("%% fun %s : time -> value" % name)
    for name, arity in sorted(preds):
        lines.append("%% pred %s / %d" % (name, arity))
    lines.append(_export_formula(psi))
    return "\n".join(lines) + "\n"
