"""Stable-model computation for temporal linear-constraint programs.

The pipeline: ground the rules over a horizon, expand assignment heads into
equality heads with definedness guards in the body, then either

* chain forward stratum by stratum (deterministic programs), or
* enumerate all candidate traces over declared finite domains (exact oracle),

and verify candidates with a reduct/least-fixpoint stability check.

Always-scope rules whose head targets a time point beyond the horizon are,
by default, not instantiated (the "frame guard"); pass ``frame_guard=False``
to keep those instances, in which case programs driving a variable forward
at every state admit no model at a finite horizon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import semantics, syntax
from .syntax import (
    And,
    Assign,
    Atom,
    BoolIsTrue,
    Eq,
    LinearTerm,
    Next,
    Not,
    Rule,
    SCOPE_ALWAYS,
    TemporalTerm,
    conj,
    leq_atom,
    lt_single,
)
from .trace import ONE, TRUE, PartialValuation, Trace, total_trace


class StratificationError(Exception):
    """The ground dependency graph has a cycle through a negative edge."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        names = " -> ".join("%s@%d" % (name, i) for name, i in self.cycle)
        super().__init__("negative cycle through %s" % names)


class EnumerationLimitError(Exception):
    """The candidate space exceeds the configured enumeration guard."""


@dataclass(frozen=True)
class SolveOptions:
    """Solver knobs: horizon, frame guard, engine, domains, guard limits."""

    horizon: int = 1
    frame_guard: bool = True
    engine: str = "stratified"
    domains: dict | None = None
    entry_limit: int = 20
    enumerate_limit: int = 200_000

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.engine not in ("stratified", "enumerate"):
            raise ValueError("unknown engine: %r" % (self.engine,))


@dataclass(frozen=True)
class GroundRule:
    """A rule instance at a fixed time point with an expanded head.

    The head is an equality on a single target (variable, time) cell; the
    definedness guard of the head value has been moved into the body.  The
    cached formula is the expanded implication used for satisfaction checks.
    """

    time: int
    target: tuple
    value: LinearTerm | None
    df_atoms: tuple
    positive_body: tuple
    negative_body: tuple
    formula: object = field(compare=False)
    source: Rule = field(compare=False)

    def head_formula(self):
        name, _ = self.target
        offset = self.target[1] - self.time
        if self.value is None:
            return Atom(BoolIsTrue(TemporalTerm(name, offset)))
        return Eq(lt_single(TemporalTerm(name, offset)), self.value)


def _instantiate(rule, i, lam, frame_guard):
    if isinstance(rule.head, Assign):
        target_term = rule.head.target
        value = rule.head.value
        df_atoms = tuple(
            leq_atom(lt_single(t), lt_single(t))
            for t in syntax.linear_terms(value)
        )
    else:
        target_term = rule.head.atom.term
        value = None
        df_atoms = ()
    target_index = i + target_term.offset
    if frame_guard and not 0 <= target_index < lam:
        return None
    body = list(df_atoms) + list(rule.positive_body)
    body += [Not(lit) for lit in rule.negative_body]
    head = (
        Atom(BoolIsTrue(target_term))
        if value is None
        else Eq(lt_single(target_term), value)
    )
    formula = head if not body else syntax.Implies(conj(body), head)
    return GroundRule(
        time=i,
        target=(target_term.variable, target_index),
        value=value,
        df_atoms=df_atoms,
        positive_body=rule.positive_body,
        negative_body=rule.negative_body,
        formula=formula,
        source=rule,
    )


def ground(program, opts):
    """Instantiate the program's rules over the horizon.

    Always-scope rules yield one instance per time point, initial-scope rules
    one instance at time 0.  With the frame guard on, instances whose head
    targets a cell outside the horizon are dropped.
    """
    lam = opts.horizon
    out = []
    for rule in program.rules:
        times = range(lam) if rule.scope == SCOPE_ALWAYS else (0,)
        for i in times:
            instance = _instantiate(rule, i, lam, opts.frame_guard)
            if instance is not None:
                out.append(instance)
    return out


def reduct(ground_rules, candidate):
    """Keep instances whose negated literals all fail on the candidate; strip them."""
    model = total_trace(candidate)
    kept = []
    for g in ground_rules:
        if any(semantics.satisfies(model, g.time, lit) for lit in g.negative_body):
            continue
        if g.negative_body:
            g = _strip_negatives(g)
        kept.append(g)
    return kept


def _strip_negatives(g):
    body = list(g.df_atoms) + list(g.positive_body)
    head = g.head_formula()
    formula = head if not body else syntax.Implies(conj(body), head)
    return GroundRule(
        time=g.time,
        target=g.target,
        value=g.value,
        df_atoms=g.df_atoms,
        positive_body=g.positive_body,
        negative_body=(),
        formula=formula,
        source=g.source,
    )


@dataclass(frozen=True)
class Conflict:
    """Two firings demanded different values for the same cell."""

    cell: tuple
    values: tuple
    rules: tuple

    def __str__(self):
        name, i = self.cell
        return "conflicting values for %s@%d: %s" % (
            name,
            i,
            " vs ".join(str(v) for v in self.values),
        )


def _evaluate_linear(trace, i, linterm):
    total = Fraction(0)
    for coeff, term in linterm.summands:
        value = trace.value_at(i, term)
        if value is None or value is TRUE:
            return None
        total += coeff * value
    return total


def _positive_body_formula(g):
    parts = list(g.df_atoms) + list(g.positive_body)
    return conj(parts) if parts else None


def least_fixpoint(positive_rules, lam):
    """Minimal trace closed under the positive rules.

    Starts all-undefined and fires any rule whose guards and positive body
    hold on the current trace; an equality head assigns the evaluated value
    to its target cell.  Returns the fixpoint trace, or a Conflict value when
    two firings disagree on a cell.
    """
    for g in positive_rules:
        if g.negative_body:
            raise ValueError("least_fixpoint expects negation-free rules")
    cells = {}
    origin = {}
    bodies = [_positive_body_formula(g) for g in positive_rules]
    while True:
        trace = _trace_from_cells(cells, lam)
        model = total_trace(trace)
        changed = False
        for g, body in zip(positive_rules, bodies):
            if body is not None and not semantics.satisfies(model, g.time, body):
                continue
            if g.value is None:
                value = TRUE
            else:
                value = _evaluate_linear(trace, g.time, g.value)
                if value is None:
                    continue
            cell = g.target
            if cell in cells:
                if cells[cell] != value:
                    return Conflict(cell, (cells[cell], value), (origin[cell], g))
                continue
            cells[cell] = value
            origin[cell] = g
            changed = True
        if not changed:
            return _trace_from_cells(cells, lam)


def _trace_from_cells(cells, lam):
    states = [dict() for _ in range(lam)]
    for (name, i), value in cells.items():
        if 0 <= i < lam:
            states[i][name] = value
    return Trace(states)


def check_stable(program, candidate, opts):
    """Reduct-based stability: the candidate is a model and reproduces itself.

    (a) paired with itself, the candidate satisfies every ground instance at
    its time point; (b) the least fixpoint of the reduct equals the candidate
    exactly.
    """
    ground_rules = ground(program, opts)
    return _check_stable_ground(ground_rules, candidate, opts)


def _check_stable_ground(ground_rules, candidate, opts):
    model = total_trace(candidate)
    for g in ground_rules:
        if not semantics.satisfies(model, g.time, g.formula):
            return False
    fixed = least_fixpoint(reduct(ground_rules, candidate), opts.horizon)
    if isinstance(fixed, Conflict):
        return False
    return fixed == candidate


# Stratified forward chaining -------------------------------------------------


def _literal_cells(literal, i):
    return {
        (term.variable, i + term.offset)
        for term in syntax.walk_terms(literal)
        if term.variable != ONE
    }


def _dependencies(g):
    """Positive and negative cell dependencies of a ground instance.

    A rule's own head cell is not one of its dependencies: a negated literal
    mentioning the head cell expresses a default, resolved by evaluating
    negations only after the cell's stratum has been saturated.
    """
    head = g.target
    positive = set()
    for lit in g.df_atoms + g.positive_body:
        positive |= _literal_cells(lit, g.time)
    negative = set()
    for lit in g.negative_body:
        negative |= _literal_cells(lit, g.time) - {head}
    positive.discard(head)
    return positive, negative


def _strongly_connected(vertices, edges):
    """Iterative Tarjan; returns components in dependency-first order."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    components = []
    counter = itertools.count()

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = lowlink[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            vertex, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = lowlink[child] = next(counter)
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(edges.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    lowlink[vertex] = min(lowlink[vertex], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[vertex])
            if lowlink[vertex] == index[vertex]:
                component = set()
                while True:
                    node = stack.pop()
                    on_stack.discard(node)
                    component.add(node)
                    if node == vertex:
                        break
                components.append(component)
    return components


def _stratify(ground_rules):
    """Group head cells into evaluation strata; fail on negative cycles."""
    edges = {}
    neg_edges = set()
    vertices = set()
    for g in ground_rules:
        vertices.add(g.target)
        positive, negative = _dependencies(g)
        for cell in positive | negative:
            vertices.add(cell)
            edges.setdefault(g.target, set()).add(cell)
        for cell in negative:
            neg_edges.add((g.target, cell))
    components = _strongly_connected(sorted(vertices), {k: sorted(v) for k, v in edges.items()})
    component_of = {}
    for idx, component in enumerate(components):
        for cell in component:
            component_of[cell] = idx
    for head, dep in neg_edges:
        if component_of[head] == component_of[dep]:
            raise StratificationError((head, dep, head))
    return components, component_of


def solve_stratified(program, opts):
    """Deterministic engine: stratum-ordered forward chaining plus verification.

    Negated literals of a rule are evaluated only once the stratum of its
    head cell has saturated its positive rules, which is what makes inertia
    and default rules fire exactly when nothing else defines their target.
    The chained candidate is verified with ``check_stable``; the result is
    empty or a single trace.  Programs with a negative cycle in the ground
    dependency graph raise StratificationError; use the enumeration engine
    for those.
    """
    ground_rules = ground(program, opts)
    components, component_of = _stratify(ground_rules)
    by_component = {}
    for g in ground_rules:
        by_component.setdefault(component_of[g.target], []).append(g)

    cells = {}
    diag = []
    for idx in range(len(components)):
        group = by_component.get(idx, [])
        if not group:
            continue
        while True:
            fired = self_fired = False
            # Positive saturation first.
            for g in group:
                if not g.negative_body:
                    fired |= _try_fire(g, cells, opts.horizon, diag)
            if fired:
                continue
            # Defaults once positives are exhausted.
            for g in group:
                if g.negative_body and _negatives_blocked(g, cells, opts.horizon):
                    self_fired |= _try_fire(g, cells, opts.horizon, diag)
            if not self_fired:
                break
        if diag:
            return [], {"conflict": str(diag[0])}
    candidate = _trace_from_cells(cells, opts.horizon)
    if _check_stable_ground(ground_rules, candidate, opts):
        return [candidate], {}
    return [], {"unstable_candidate": True}


def _try_fire(g, cells, lam, diag):
    trace = _trace_from_cells(cells, lam)
    body = _positive_body_formula(g)
    if body is not None and not semantics.satisfies(total_trace(trace), g.time, body):
        return False
    if g.value is None:
        value = TRUE
    else:
        value = _evaluate_linear(trace, g.time, g.value)
        if value is None:
            return False
    cell = g.target
    if cell in cells:
        if cells[cell] != value:
            diag.append(Conflict(cell, (cells[cell], value), (None, g)))
        return False
    cells[cell] = value
    return True


def _negatives_blocked(g, cells, lam):
    trace = _trace_from_cells(cells, lam)
    model = total_trace(trace)
    return not any(semantics.satisfies(model, g.time, lit) for lit in g.negative_body)


# Enumeration engine -----------------------------------------------------------


def _domain_values(program, opts):
    domains = {}
    for decl in program.declarations:
        values = None
        if opts.domains and decl.name in opts.domains:
            values = tuple(opts.domains[decl.name])
        elif decl.domain is not None:
            values = decl.domain
        elif decl.sort == syntax.SORT_BOOLEAN:
            values = (TRUE,)
        if values is None:
            raise ValueError(
                "enumeration needs a finite candidate set for %s" % decl.name
            )
        domains[decl.name] = values
    return domains


def ground_conjunction(ground_rules):
    """All instances as one formula at time 0: each instance shifted to its time."""
    parts = []
    for g in ground_rules:
        wrapped = g.formula
        for _ in range(g.time):
            wrapped = Next(wrapped)
        parts.append(wrapped)
    return conj(parts)


def solve_enumerate(program, opts):
    """Exact engine: test every candidate trace over the declared domains.

    A candidate assigns each (variable, time) cell a domain value or leaves
    it undefined; candidates passing the direct equilibrium test against the
    conjunction of ground instances are models.  Guarded by
    ``opts.enumerate_limit`` on the size of the candidate space.
    """
    lam = opts.horizon
    domains = _domain_values(program, opts)
    names = sorted(domains)
    cells = [(name, i) for name in names for i in range(lam)]
    space = 1
    for name, _ in cells:
        space *= len(domains[name]) + 1
        if space > opts.enumerate_limit:
            raise EnumerationLimitError(
                "candidate space exceeds the limit of %d" % opts.enumerate_limit
            )
    ground_rules = ground(program, opts)
    phi = ground_conjunction(ground_rules)
    models = []
    tested = 0
    for choice in itertools.product(*(( *domains[name], None) for name, _ in cells)):
        tested += 1
        states = [dict() for _ in range(lam)]
        for (name, i), value in zip(cells, choice):
            if value is not None:
                states[i][name] = value
        candidate = Trace(states)
        if not semantics.satisfies(total_trace(candidate), 0, phi):
            continue
        if semantics.is_equilibrium(candidate, phi, entry_limit=opts.entry_limit):
            models.append(candidate)
    models.sort(key=_trace_key)
    return models, {"candidates_tested": tested}


def _trace_key(trace):
    from .parser import print_trace

    return print_trace(total_trace(trace))


def solve(program, opts):
    """Run the selected engine; returns (models, stats)."""
    ground_count = len(ground(program, opts))
    if opts.engine == "enumerate":
        models, stats = solve_enumerate(program, opts)
    else:
        models, stats = solve_stratified(program, opts)
    stats = dict(stats)
    stats["engine"] = opts.engine
    stats["ground_rules"] = ground_count
    return models, stats
