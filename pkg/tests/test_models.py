import itertools
import math

import numpy as np
import pytest

from bellkit.inequalities import ProbabilitySet, ch_report
from bellkit.models import (
    FactorizableModel,
    Feasible,
    HiddenVariableSpace,
    Infeasible,
    OUTCOME_TUPLES,
    ResponseTable,
    formal_joint_distribution,
    joint_feasibility,
    joint_probability,
    marginal_probability,
    probability_set_from_model,
    validate_model,
)
from conftest import random_model

SIDE1 = ("A", "C")
SIDE2 = ("B", "D")


def uniform_model(n_cells=8, value=0.5):
    cells = tuple(f"c{i}" for i in range(n_cells))
    space = HiddenVariableSpace(cells, np.full(n_cells, 1.0 / n_cells))
    r1 = ResponseTable(1, SIDE1, np.full((n_cells, 2), value))
    r2 = ResponseTable(2, SIDE2, np.full((n_cells, 2), value))
    return FactorizableModel(space, r1, r2)


class TestValidateModel:
    def test_uniform_model_valid(self):
        assert validate_model(uniform_model()).valid

    def test_normalization_deficit(self):
        model = uniform_model()
        bad = FactorizableModel(
            HiddenVariableSpace(model.space.cells, model.space.weights * 0.98),
            model.response1,
            model.response2,
        )
        report = validate_model(bad)
        assert not report.valid
        (violation,) = report.violations
        assert violation.kind == "normalization"
        assert violation.amount == pytest.approx(0.02)

    def test_range_violation_with_coordinates(self):
        model = uniform_model(n_cells=4)
        values = model.response1.values.copy()
        values[3, 0] = 1.2
        bad = FactorizableModel(
            model.space, ResponseTable(1, SIDE1, values), model.response2
        )
        report = validate_model(bad)
        (violation,) = report.violations
        assert violation.kind == "range"
        assert violation.where == "side1[c3,A]"
        assert violation.amount == pytest.approx(1.2)


class TestMarginalProbability:
    def test_unit_response_gives_one(self):
        model = uniform_model(value=1.0)
        assert marginal_probability(model, "A", 1) == pytest.approx(1.0, abs=1e-15)

    def test_weighted_two_cell_sum(self):
        space = HiddenVariableSpace(("c0", "c1"), np.array([0.25, 0.75]))
        r1 = ResponseTable(1, SIDE1, np.array([[1.0, 0.0], [0.0, 0.0]]))
        r2 = ResponseTable(2, SIDE2, np.zeros((2, 2)))
        model = FactorizableModel(space, r1, r2)
        assert marginal_probability(model, "A", 1) == pytest.approx(0.25)

    def test_efficiency_scaled_indicator(self):
        # responses eta * D(lambda) with eta = 0.8 and D = 1 on half the cells
        n = 8
        space = HiddenVariableSpace(tuple(f"c{i}" for i in range(n)), np.full(n, 1 / n))
        table = np.zeros((n, 2))
        table[: n // 2, :] = 0.8
        model = FactorizableModel(
            space, ResponseTable(1, SIDE1, table), ResponseTable(2, SIDE2, np.zeros((n, 2)))
        )
        assert marginal_probability(model, "A", 1) == pytest.approx(0.4)

    def test_unknown_setting(self):
        with pytest.raises(KeyError):
            marginal_probability(uniform_model(), "Z", 1)


class TestJointProbability:
    def test_constant_half_responses(self):
        assert joint_probability(uniform_model(), "A", "B") == pytest.approx(0.25)

    def test_deterministic_perfect_correlation(self):
        space = HiddenVariableSpace(("c0", "c1"), np.array([0.5, 0.5]))
        indicator = np.array([[1.0, 1.0], [0.0, 0.0]])
        model = FactorizableModel(
            space, ResponseTable(1, SIDE1, indicator), ResponseTable(2, SIDE2, indicator)
        )
        assert joint_probability(model, "A", "B") == pytest.approx(0.5)

    def test_parameter_independence_identity(self, rng):
        # p(A,B) + p(A,B') = p(A) when P2(.,B') = 1 - P2(.,B)
        model = random_model(rng)
        complement = 1.0 - model.response2.values[:, 0]
        values = np.column_stack([model.response2.values[:, 0], complement])
        model2 = FactorizableModel(
            model.space, model.response1, ResponseTable(2, ("B", "Bc"), values)
        )
        total = joint_probability(model2, "A", "B") + joint_probability(model2, "A", "Bc")
        assert total == pytest.approx(marginal_probability(model2, "A", 1), abs=1e-12)


class TestFormalJointDistribution:
    def test_deterministic_point_mass(self):
        space = HiddenVariableSpace(("c0",), np.array([1.0]))
        r1 = ResponseTable(1, SIDE1, np.array([[1.0, 0.0]]))
        r2 = ResponseTable(2, SIDE2, np.array([[0.0, 1.0]]))
        model = FactorizableModel(space, r1, r2)
        joint = formal_joint_distribution(model, "A", "C", "B", "D")
        assert joint.probabilities[(1, 0, 0, 1)] == pytest.approx(1.0)
        assert sum(joint.probabilities.values()) == pytest.approx(1.0, abs=1e-12)

    def test_fair_coins_are_uniform(self):
        joint = formal_joint_distribution(uniform_model(), "A", "C", "B", "D")
        for tup in OUTCOME_TUPLES:
            assert joint.probabilities[tup] == pytest.approx(1 / 16, abs=1e-12)

    def test_marginals_match_direct_sums(self, rng):
        for _ in range(50):
            model = random_model(rng)
            joint = formal_joint_distribution(model, "A", "C", "B", "D")
            for setting, side in (("A", 1), ("C", 1), ("B", 2), ("D", 2)):
                assert joint.marginal(setting) == pytest.approx(
                    marginal_probability(model, setting, side), abs=1e-12
                )
            for x, y in itertools.product(SIDE1, SIDE2):
                assert joint.pair(x, y) == pytest.approx(
                    joint_probability(model, x, y), abs=1e-12
                )


class TestJointFeasibility:
    def test_overlapping_pairs_infeasible_with_certificate(self):
        ps = ProbabilitySet(0.5, 0.5, 0.5, 0.5, 0.5, 0.0)
        result = joint_feasibility(ps)
        assert isinstance(result, Infeasible)
        assert result.certificate.name == "CH"
        # CH arithmetic: lhs 1.5 exceeds rhs 1.0 by 0.5
        assert result.certificate.lhs - result.certificate.rhs == pytest.approx(0.5)

    def test_product_sets_feasible(self, rng):
        for _ in range(20):
            pa, pb, pc, pd = rng.random(4)
            ps = ProbabilitySet(pa, pb, pa * pb, pa * pd, pc * pb, pc * pd)
            assert isinstance(joint_feasibility(ps), Feasible)

    def test_singlet_values_infeasible(self):
        from test_inequalities import singlet_probability_set

        result = joint_feasibility(singlet_probability_set())
        assert isinstance(result, Infeasible)

    def test_witness_reproduces_marginals(self):
        ps = ProbabilitySet(0.5, 0.5, 0.25, 0.25, 0.25, 0.25)
        result = joint_feasibility(ps)
        assert isinstance(result, Feasible)
        w = result.witness
        assert w.marginal("A") == pytest.approx(0.5, abs=1e-7)
        assert w.pair("C", "D") == pytest.approx(0.25, abs=1e-7)

    def test_model_derived_sets_always_feasible(self, rng):
        for _ in range(100):
            ps = probability_set_from_model(random_model(rng))
            assert isinstance(joint_feasibility(ps), Feasible)


class TestChHoldsForFactorizableModels:
    def test_random_models_never_violate(self, rng):
        for _ in range(500):
            report = ch_report(probability_set_from_model(random_model(rng)))
            assert report.margin >= -1e-10


class TestSerialization:
    def test_json_round_trip(self, rng):
        model = random_model(rng)
        restored = FactorizableModel.from_json(model.to_json())
        assert restored.space.cells == model.space.cells
        np.testing.assert_allclose(restored.space.weights, model.space.weights)
        np.testing.assert_allclose(restored.response1.values, model.response1.values)
        np.testing.assert_allclose(restored.response2.values, model.response2.values)
