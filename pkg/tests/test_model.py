import numpy as np
import pytest

from brpmarket import (
    CostParams,
    ScenarioError,
    canonical_split,
    cost_value,
    utility_gradient,
    utility_value,
    validate_scenario,
)


class TestUtilityValue:
    def test_zero_consumption_zero_utility(self):
        assert utility_value(0.0, 40.0, 1.0) == 0.0

    def test_quadratic_branch(self):
        assert utility_value(10.0, 40.0, 1.0) == pytest.approx(350.0)

    def test_saturated_branch(self):
        # 60 is past the satiation point w/alpha = 40
        assert utility_value(60.0, 40.0, 1.0) == pytest.approx(800.0)

    def test_continuous_at_satiation(self):
        assert utility_value(40.0, 40.0, 1.0) == pytest.approx(800.0)

    def test_negative_consumption_rejected(self):
        with pytest.raises(ValueError):
            utility_value(-1.0, 40.0, 1.0)

    def test_nondecreasing_and_midpoint_concave(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            w = rng.uniform(10, 100)
            alpha = rng.uniform(0.5, 2.0)
            x1, x2 = np.sort(rng.uniform(0, 2 * w / alpha, size=2))
            u1 = utility_value(x1, w, alpha)
            u2 = utility_value(x2, w, alpha)
            mid = utility_value(0.5 * (x1 + x2), w, alpha)
            assert u1 <= u2 + 1e-12
            assert mid >= 0.5 * (u1 + u2) - 1e-9


class TestUtilityGradient:
    def test_at_origin_equals_w(self):
        assert utility_gradient(0.0, 40.0, 1.0) == 40.0

    def test_interior(self):
        assert utility_gradient(20.0, 40.0, 1.0) == pytest.approx(20.0)

    def test_kink_saturated_subgradient(self):
        assert utility_gradient(40.0, 40.0, 1.0) == 0.0

    def test_negative_consumption_rejected(self):
        with pytest.raises(ValueError):
            utility_gradient(-0.5, 40.0, 1.0)

    def test_matches_central_finite_difference(self):
        rng = np.random.default_rng(11)
        h = 1e-3
        checked = 0
        while checked < 1000:
            w = rng.uniform(10, 100)
            alpha = rng.uniform(0.5, 2.0)
            x = rng.uniform(0.01, 1.5 * w / alpha)
            if abs(x - w / alpha) < 5e-3:
                continue
            fd = (utility_value(x + h, w, alpha)
                  - utility_value(x - h, w, alpha)) / (2 * h)
            grad = utility_gradient(x, w, alpha)
            if abs(grad) < 1e-8:
                assert abs(fd) < 1e-8
            else:
                assert abs(fd - grad) / abs(grad) < 1e-6
            checked += 1


class TestCostValue:
    def test_zero_demand_zero_cost(self):
        assert cost_value(0.0, 50.0, CostParams(0.5, 0.6)) == 0.0

    def test_first_segment(self):
        assert cost_value(40.0, 50.0, CostParams(0.5, 0.6)) == pytest.approx(800.0)

    def test_second_segment(self):
        # direct evaluation: 0.6 * 58.8**2
        assert cost_value(58.8, 50.0, CostParams(0.5, 0.6)) == pytest.approx(2074.464)

    def test_boundary_uses_first_segment(self):
        assert cost_value(50.0, 50.0, CostParams(0.5, 0.6)) == pytest.approx(1250.0)

    def test_negative_demand_rejected(self):
        with pytest.raises(ValueError):
            cost_value(-1.0, 50.0, CostParams(0.5, 0.6))

    def test_nondecreasing_per_segment_and_jump(self):
        cost = CostParams(0.5, 0.6)
        bn = 50.0
        grid1 = np.linspace(0, bn, 200)
        grid2 = np.linspace(bn + 1e-9, 3 * bn, 200)
        v1 = cost_value(grid1, bn, cost)
        v2 = cost_value(grid2, bn, cost)
        assert np.all(np.diff(v1) >= 0)
        assert np.all(np.diff(v2) >= 0)
        jump = (cost_value(bn + 1e-12, bn, cost) - cost_value(bn, bn, cost))
        assert jump == pytest.approx((0.6 - 0.5) * bn**2, rel=1e-6)


class TestCanonicalSplit:
    @pytest.mark.parametrize("x,b,expected", [
        (10.0, 25.0, (10.0, 25.0)),
        (30.0, 25.0, (25.0, 30.0)),
        (25.0, 25.0, (25.0, 25.0)),
    ])
    def test_examples(self, x, b, expected):
        assert canonical_split(x, b) == expected

    def test_round_trip_exact(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 100, size=1000)
        b = rng.uniform(1, 60, size=1000)
        y, z = canonical_split(x, b)
        # each pair is bitwise {x, b}; the reconstitution sum is then
        # exact up to one rounding of x + b
        assert np.all(((y == x) & (z == b)) | ((y == b) & (z == x)))
        np.testing.assert_allclose(y + z - b, x, rtol=1e-15, atol=1e-13)
        assert np.all(y <= b)
        assert np.all(b <= z)


class TestValidateScenario:
    def base_doc(self):
        return {
            "num_slots": 1,
            "customers": [
                {"id": 0, "w": 100, "alpha": 1.0, "d_min": 0, "d_max": 1000},
                {"id": 1, "w": 100, "alpha": 1.0, "d_min": 0, "d_max": 1000},
            ],
            "blocks": {"b": 25},
            "cost": {"beta1": 0.5, "beta2": 0.6},
        }

    def test_valid_worked_example_scenario(self):
        sc = self.base_doc()
        scenario = validate_scenario(sc)
        assert scenario.num_customers == 2
        assert scenario.num_slots == 1
        np.testing.assert_array_equal(scenario.blocks.b, [25.0])
        np.testing.assert_array_equal(scenario.customers[0].w, [100.0])

    def test_scalar_broadcast_to_slots(self):
        doc = self.base_doc()
        doc["num_slots"] = 3
        scenario = validate_scenario(doc)
        np.testing.assert_array_equal(scenario.cost.beta1, [0.5] * 3)
        np.testing.assert_array_equal(scenario.customers[1].w, [100.0] * 3)

    def test_per_slot_arrays_accepted(self):
        doc = self.base_doc()
        doc["num_slots"] = 2
        doc["customers"][0]["w"] = [60, 90]
        doc["blocks"]["b"] = [25, 30]
        scenario = validate_scenario(doc)
        np.testing.assert_array_equal(scenario.customers[0].w, [60.0, 90.0])

    def test_wrong_length_array_rejected(self):
        doc = self.base_doc()
        doc["customers"][0]["w"] = [60, 90]
        with pytest.raises(ScenarioError, match=r"customers\[0\]\.w"):
            validate_scenario(doc)

    def test_zero_alpha_rejected(self):
        doc = self.base_doc()
        doc["customers"][0]["alpha"] = 0.0
        with pytest.raises(ScenarioError, match="alpha must be strictly positive"):
            validate_scenario(doc)

    def test_d_min_exceeds_d_max_rejected(self):
        doc = self.base_doc()
        doc["customers"][1].update(d_min=10, d_max=5)
        with pytest.raises(ScenarioError, match="d_min exceeds d_max"):
            validate_scenario(doc)

    def test_unattainable_d_min_rejected(self):
        doc = self.base_doc()
        doc["customers"][0].update(d_min=150, d_max=500)  # sum(w/alpha) = 100
        with pytest.raises(ScenarioError, match="infeasible"):
            validate_scenario(doc)

    def test_nonpositive_threshold_rejected(self):
        doc = self.base_doc()
        doc["blocks"]["b"] = 0
        with pytest.raises(ScenarioError, match="blocks.b"):
            validate_scenario(doc)

    def test_nonpositive_beta_rejected(self):
        doc = self.base_doc()
        doc["cost"]["beta2"] = -1
        with pytest.raises(ScenarioError, match="beta2"):
            validate_scenario(doc)

    def test_underscore_keys_ignored(self):
        doc = self.base_doc()
        doc["_notes"] = ["free-form"]
        validate_scenario(doc)

    def test_fingerprint_stable_and_sensitive(self):
        a = validate_scenario(self.base_doc())
        b = validate_scenario(self.base_doc())
        assert a.fingerprint() == b.fingerprint()
        doc = self.base_doc()
        doc["cost"]["beta1"] = 0.51
        assert validate_scenario(doc).fingerprint() != a.fingerprint()
