import random

import pytest
from fractions import Fraction

from thtc import equilibrium, semantics, syntax
from thtc.cli import RADAR_DEFAULT_ACC_PROGRAM, RADAR_PROGRAM
from thtc.equilibrium import (
    Conflict,
    SolveOptions,
    StratificationError,
    check_stable,
    ground,
    ground_conjunction,
    least_fixpoint,
    reduct,
    solve_enumerate,
    solve_stratified,
)
from thtc.parser import parse_program
from thtc.semantics import is_equilibrium, satisfies
from thtc.syntax import (
    Assign,
    Atom,
    BoolIsTrue,
    Eq,
    Implies,
    LinearLeq,
    LinearTerm,
    Lt,
    Neq,
    Not,
    Rule,
    SCOPE_ALWAYS,
    SCOPE_INITIAL,
    TemporalTerm,
    conj,
    lt_const,
    lt_single,
    lt_var,
    rule_formula,
)
from thtc.trace import TRUE, Trace, total_trace

from helpers import random_linear_term

Q = Fraction


def radar_program():
    return parse_program(RADAR_PROGRAM)


def radar_table_trace():
    """The expected stable trace of the radar program at horizon 9."""
    s = ["80"] * 5 + ["91.35", "91.35", "89.049", "89.049"]
    p = ["0", "80", "160", "240", "320", "400", "491.35", "582.7", "671.749"]
    acc = {4: "11.35", 6: "-2.301"}
    states = []
    for i in range(9):
        state = {
            "s": Q(s[i]),
            "p": Q(p[i]),
            "rdpos": Q(400),
            "rdlimit": Q(90),
        }
        if i in acc:
            state["acc"] = Q(acc[i])
        if i == 5:
            state["fine"] = TRUE
        states.append(state)
    return Trace(states)


OPTS9 = SolveOptions(horizon=9)


class TestGround:
    def test_forward_assignment_instance_count(self):
        program = parse_program(
            "#rational s.\n#rational acc.\nalways: s@1 := s + acc."
        )
        instances = ground(program, OPTS9)
        assert len(instances) == 8
        assert [g.time for g in instances] == list(range(8))
        assert all(g.target == ("s", g.time + 1) for g in instances)

    def test_initial_rule_single_instance(self):
        program = parse_program("#rational s.\ns := 80.")
        instances = ground(program, OPTS9)
        assert len(instances) == 1
        assert instances[0].time == 0

    def test_boolean_rule_instances_and_bodies(self):
        program = parse_program(
            "#rational p.\n#rational s.\n#rational rdpos.\n#rational rdlimit.\n"
            "#boolean fine.\n"
            "always: fine@1 :- p < rdpos, p@1 >= rdpos, s@1 > rdlimit."
        )
        instances = ground(program, OPTS9)
        assert [g.time for g in instances] == list(range(8))
        for g in instances:
            assert g.positive_body == (
                Lt(lt_var("p"), lt_var("rdpos")),
                Atom(LinearLeq(lt_var("rdpos"), lt_var("p", 1))),
                Lt(lt_var("rdlimit"), lt_var("s", 1)),
            )

    def test_frame_guard_off_keeps_final_instances(self):
        program = parse_program(
            "#rational s.\n#rational acc.\nalways: s@1 := s + acc."
        )
        opts = SolveOptions(horizon=9, frame_guard=False)
        assert len(ground(program, opts)) == 9

    def test_head_guard_moved_to_body(self):
        program = parse_program("#rational x.\n#rational y.\nx := y.")
        (g,) = ground(program, SolveOptions(horizon=1))
        assert g.df_atoms == (Atom(LinearLeq(lt_var("y"), lt_var("y"))),)


class TestReduct:
    def test_inertia_dropped_when_speed_changes(self):
        program = radar_program()
        candidate = radar_table_trace()
        instances = ground(program, OPTS9)
        inertia = [
            g
            for g in instances
            if g.negative_body and g.target[0] == "s"
        ]
        kept = reduct(inertia, candidate)
        kept_times = {g.time for g in kept}
        # Speed changes across 4->5 and 6->7, so those instances drop.
        assert kept_times == {0, 1, 2, 3, 5, 7}
        assert all(not g.negative_body for g in kept)

    def test_rule_without_negation_always_kept(self):
        program = parse_program("#rational x.\nx := 1.")
        instances = ground(program, SolveOptions(horizon=1))
        assert reduct(instances, Trace([{}])) == instances


class TestLeastFixpoint:
    def test_radar_reduct_reproduces_table(self):
        program = radar_program()
        candidate = radar_table_trace()
        positive = reduct(ground(program, OPTS9), candidate)
        assert least_fixpoint(positive, 9) == candidate

    def test_single_fact(self):
        program = parse_program("#rational x.\nx := 1.")
        out = least_fixpoint(ground(program, SolveOptions(horizon=1)), 1)
        assert out == Trace([{"x": 1}])

    def test_conflicting_heads(self):
        program = parse_program("#rational x.\nx := 1.\nx := 2.")
        out = least_fixpoint(ground(program, SolveOptions(horizon=1)), 1)
        assert isinstance(out, Conflict)
        assert out.cell == ("x", 0)

    def test_rejects_negated_bodies(self):
        program = parse_program("#rational x.\nx := 1 :- not (x != 1).")
        with pytest.raises(ValueError):
            least_fixpoint(ground(program, SolveOptions(horizon=1)), 1)


class TestCheckStable:
    def test_radar_table_is_stable(self):
        assert check_stable(radar_program(), radar_table_trace(), OPTS9)

    def test_extra_acc_value_is_not_stable(self):
        base = radar_table_trace()
        states = [dict(v.items()) for v in base.valuations]
        states[0]["acc"] = Q(0)
        padded = Trace(states)
        # The fixpoint leaves acc undefined at time 0, so the padded trace
        # does not reproduce itself even though it satisfies the rules.
        assert not check_stable(radar_program(), padded, OPTS9)

    def test_all_undefined_is_not_stable(self):
        assert not check_stable(radar_program(), Trace([{}] * 9), OPTS9)


class TestSolveStratified:
    def test_radar(self):
        models, stats = solve_stratified(radar_program(), OPTS9)
        assert models == [radar_table_trace()]

    def test_radar_default_acc_variant(self):
        base_models, _ = solve_stratified(radar_program(), OPTS9)
        variant_models, _ = solve_stratified(
            parse_program(RADAR_DEFAULT_ACC_PROGRAM), OPTS9
        )
        assert len(variant_models) == 1
        base, variant = base_models[0], variant_models[0]
        for i in range(9):
            assert base.valuations[i].get("s") == variant.valuations[i].get("s")
            assert base.valuations[i].get("p") == variant.valuations[i].get("p")
            expected_acc = base.valuations[i].get("acc")
            assert variant.valuations[i].get("acc") == (
                expected_acc if expected_acc is not None else Q(0)
            )

    def test_empty_program(self):
        models, _ = solve_stratified(
            parse_program(""), SolveOptions(horizon=2)
        )
        assert models == [Trace([{}, {}])]

    def test_no_model_without_frame_guard(self):
        opts = SolveOptions(horizon=9, frame_guard=False)
        models, _ = solve_stratified(radar_program(), opts)
        assert models == []

    def test_negative_cycle_detected(self):
        program = parse_program(
            "#rational x.\n#rational y.\n"
            "x := 1 :- not (y <= y).\n"
            "y := 1 :- not (x <= x)."
        )
        with pytest.raises(StratificationError):
            solve_stratified(program, SolveOptions(horizon=1))


class TestSolveEnumerate:
    def test_single_fact(self):
        program = parse_program("#rational x in {1}.\nx := 1.")
        models, stats = solve_enumerate(program, SolveOptions(horizon=1))
        assert models == [Trace([{"x": 1}])]
        assert stats["candidates_tested"] == 2

    def test_inertia_propagates(self):
        program = parse_program(
            "#rational x in {2}.\n"
            "always: x@1 := x :- not (x@1 != x).\n"
            "x := 2."
        )
        models, _ = solve_enumerate(program, SolveOptions(horizon=3))
        assert models == [Trace([{"x": 2}] * 3)]

    def test_self_blocking_rule_has_no_models(self):
        # The body not(x <= x) holds whenever x is undefined, forcing the
        # head; but a defined x invalidates the body on the reduced side.
        program = parse_program("#rational x in {1}.\nx := 1 :- not (x <= x).")
        models, _ = solve_enumerate(program, SolveOptions(horizon=1))
        assert models == []

    def test_guard_on_candidate_space(self):
        program = parse_program("#rational x in {0, 1, 2}.\nx := 1.")
        with pytest.raises(equilibrium.EnumerationLimitError):
            solve_enumerate(program, SolveOptions(horizon=3, enumerate_limit=10))

    def test_requires_domains(self):
        program = parse_program("#rational x.\nx := 1.")
        with pytest.raises(ValueError):
            solve_enumerate(program, SolveOptions(horizon=1))

    def test_domains_option_overrides(self):
        program = parse_program("#rational x.\nx := 1.")
        opts = SolveOptions(horizon=1, domains={"x": (Q(1),)})
        models, _ = solve_enumerate(program, opts)
        assert models == [Trace([{"x": 1}])]


def random_rule(rng):
    """A random single-variable-head rule over x, y with small offsets."""
    variables = ("x", "y")
    head_var = rng.choice(variables)
    head_offset = rng.randrange(0, 2)
    value = random_linear_term(rng, variables, offsets=(-1, 0, 1))
    positive = []
    negative = []
    for _ in range(rng.randrange(0, 3)):
        lhs = random_linear_term(rng, variables, offsets=(-1, 0, 1))
        rhs = random_linear_term(rng, variables, offsets=(-1, 0, 1))
        literal = rng.choice(
            (Eq(lhs, rhs), Neq(lhs, rhs), Lt(lhs, rhs), Atom(LinearLeq(lhs, rhs)))
        )
        (negative if rng.random() < 0.4 else positive).append(literal)
    return Rule(
        head=Assign(TemporalTerm(head_var, head_offset), value),
        positive_body=tuple(positive),
        negative_body=tuple(negative),
        scope=rng.choice((SCOPE_INITIAL, SCOPE_ALWAYS)),
    )


def expanded_rule_formula(rule):
    """Head equality with the definedness guard moved into the body."""
    value = rule.head.value
    guards = [
        Atom(LinearLeq(lt_single(t), lt_single(t)))
        for t in syntax.linear_terms(value)
    ]
    body = guards + list(rule.positive_body)
    body += [Not(lit) for lit in rule.negative_body]
    head = Eq(lt_single(rule.head.target), value)
    return head if not body else Implies(conj(body), head)


def test_assignment_head_expansion_preserves_satisfaction():
    from helpers import random_model, rational_pools

    rng = random.Random(71)
    for _ in range(500):
        rule = random_rule(rng)
        lam = rng.randrange(1, 4)
        model = random_model(rng, lam, rational_pools(("x", "y")))
        i = rng.randrange(lam)
        original = rule_formula(rule)
        expanded = expanded_rule_formula(rule)
        assert satisfies(model, i, original) == satisfies(model, i, expanded)


def test_stability_check_agrees_with_direct_oracle():
    from helpers import random_trace

    rng = random.Random(73)
    agreements = 0
    for _ in range(150):
        rules = [random_rule(rng) for _ in range(rng.randrange(1, 3))]
        try:
            program = syntax.Program(
                (syntax.VarDecl("x", "rational"), syntax.VarDecl("y", "rational")),
                tuple(rules),
            )
        except ValueError:
            continue
        lam = rng.randrange(1, 3)
        opts = SolveOptions(horizon=lam)
        candidate = random_trace(
            rng, lam, {"x": (Q(0), Q(1)), "y": (Q(0), Q(1))}
        )
        phi = ground_conjunction(ground(program, opts))
        expected = is_equilibrium(candidate, phi)
        assert check_stable(program, candidate, opts) == expected
        agreements += 1
    assert agreements >= 100
