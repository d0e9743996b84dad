"""Game model, profiles, participation, and effective-cost assembly."""

from fractions import Fraction

import pytest

from incentive_audit.expr import evaluate, parse, structurally_equal, var
from incentive_audit.game import (
    ActionProfile,
    Game,
    NON_ANTICIPATORY,
    Participation,
    Scenario,
    effective_cost,
    operator_net_cost,
)
from incentive_audit.incentive import CUSTOM, IncentiveScheme

from conftest import NAMES2, build_example1, example1_scheme


class TestActionProfile:
    def test_exactness(self):
        assert ActionProfile([Fraction(1, 2), 1]).exact
        assert not ActionProfile([0.5, Fraction(1)]).exact

    def test_bound_violations_flagged_not_clamped(self):
        p = ActionProfile([Fraction(3), Fraction(0)])
        bounds = ((Fraction(-2), Fraction(2)),) * 2
        assert p.bound_violations(bounds) == [0]
        assert p[0] == 3  # untouched

    def test_replace_and_distance(self):
        p = ActionProfile([Fraction(1), Fraction(1)])
        q = p.replace(1, Fraction(2))
        assert q.values == (Fraction(1), Fraction(2))
        assert p.max_distance(q) == 1.0


class TestGameValidation:
    def test_needs_two_agents(self):
        with pytest.raises(ValueError):
            Game(n=1, agent_costs=(var(0),), operator_cost=var(0))

    def test_cost_count_must_match(self):
        with pytest.raises(ValueError):
            Game(n=2, agent_costs=(var(0),), operator_cost=var(0))

    def test_undeclared_variable_rejected(self):
        with pytest.raises(ValueError):
            Game(n=2, agent_costs=(var(0), var(2)), operator_cost=var(0))

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            Game(n=2, agent_costs=(var(0), var(1)), operator_cost=var(0),
                 bounds=((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))))

    def test_default_bounds(self):
        g = Game(n=2, agent_costs=(var(0), var(1)), operator_cost=var(0))
        assert g.bounds == ((Fraction(-10), Fraction(10)),) * 2
        assert g.names == ("u1", "u2")


class TestScenario:
    def test_opt_out_without_incentive_rejected(self):
        g = build_example1()
        with pytest.raises(ValueError):
            Scenario(g, None, Participation((0,)))

    def test_opt_out_index_range(self):
        g = build_example1()
        with pytest.raises(ValueError):
            Scenario(g, example1_scheme(), Participation((5,)))


class TestEffectiveCost:
    def test_participant_gets_cost_plus_incentive(self):
        g = build_example1()
        sc = Scenario(g, example1_scheme())
        e = effective_cost(sc, 0)
        expected = parse("u1^2 - 2*u1*u2 + u1^2", NAMES2)
        assert structurally_equal(e, expected)

    def test_opted_out_agent_keeps_raw_cost(self):
        g = build_example1()
        sc = Scenario(g, example1_scheme(), Participation((0,)))
        assert effective_cost(sc, 0) is g.agent_costs[0]

    def test_non_anticipatory_ignores_incentive(self):
        g = build_example1()
        scheme = IncentiveScheme(CUSTOM, mode=NON_ANTICIPATORY,
                                 expressions=example1_scheme().expressions)
        sc = Scenario(g, scheme)
        assert effective_cost(sc, 0) is g.agent_costs[0]

    def test_no_incentive(self):
        g = build_example1()
        sc = Scenario(g)
        assert effective_cost(sc, 1) is g.agent_costs[1]

    def test_additivity(self):
        g = build_example1()
        sc = Scenario(g, example1_scheme())
        pt = (Fraction(1, 3), Fraction(-2, 7))
        for i in range(2):
            lhs = evaluate(effective_cost(sc, i), pt)
            rhs = evaluate(g.agent_costs[i], pt) \
                + evaluate(sc.incentive.expressions[i], pt)
            assert lhs == rhs

    def test_other_agents_participation_is_irrelevant(self):
        g = build_example1()
        all_in = Scenario(g, example1_scheme())
        two_out = Scenario(g, example1_scheme(), Participation((1,)))
        assert effective_cost(all_in, 0) == effective_cost(two_out, 0)


class TestOperatorNetCost:
    def test_incentive_deducted(self):
        g = build_example1()
        sc = Scenario(g, example1_scheme())
        net = operator_net_cost(sc, ActionProfile([Fraction(1), Fraction(2)]))
        assert net == Fraction(1, 16) - Fraction(1, 2)

    def test_no_incentive_is_plain_cost(self):
        g = build_example1()
        net = operator_net_cost(Scenario(g), ActionProfile([1, 2]))
        assert net == Fraction(1, 16)

    def test_all_opted_out_pays_nothing(self):
        g = build_example1()
        sc = Scenario(g, example1_scheme(), Participation((0, 1)))
        net = operator_net_cost(sc, ActionProfile([Fraction(1), Fraction(2)]))
        assert net == Fraction(1, 16)
