import math

import numpy as np
import pytest

from bellkit.experiments import (
    AngleSet,
    CANONICAL_ANGLES,
    CascadeConfig,
    InsufficientCoverageError,
    KinematicsInput,
    NoViolationPossibleError,
    PdcConfig,
    bi1_min_efficiency,
    bi_margin,
    cascade_bi_maximum,
    cascade_inequality_reports,
    cascade_optics,
    cascade_rates,
    optimal_angles,
    spacelike_constraints,
    two_channel_rates,
    visibility_estimators,
)
from bellkit.inequalities import TwoChannelCounts, renormalized_correlation, s_star_bound_visibility

SQRT2 = math.sqrt(2.0)


class TestCascadeOptics:
    def test_half_aperture(self):
        eta, v, alpha = cascade_optics(math.acos(0.5), 1.0)
        assert eta == pytest.approx(0.25)
        assert v == pytest.approx(1 - 2 / 3 * 0.25)
        assert alpha == 1.0

    def test_small_aperture_limit(self):
        eta, v, _ = cascade_optics(1e-6, 1.0)
        assert eta == pytest.approx(0.0, abs=1e-12)
        assert v == pytest.approx(1.0, abs=1e-12)

    def test_full_aperture(self):
        eta, v, _ = cascade_optics(math.pi / 2, 1.0)
        assert eta == pytest.approx(0.5)
        assert v == pytest.approx(1 / 3)

    def test_monotonicity_in_theta(self):
        thetas = np.linspace(0.01, math.pi / 2, 200)
        etas, vs = zip(*[cascade_optics(t, 1.0)[:2] for t in thetas])
        assert all(b > a for a, b in zip(etas, etas[1:]))
        assert all(b < a for a, b in zip(vs, vs[1:]))


class TestCascadeRates:
    def test_aligned_polarizers(self):
        _, _, r12 = cascade_rates(r0=1.0, eta=0.3, v=0.9, alpha=1.0, phi=0.0)
        assert r12 == pytest.approx(0.25 * 0.09 * 1.9)

    def test_low_efficiency_scale(self):
        r1, r2, r12 = cascade_rates(r0=1.0, eta=1e-4, v=0.85, alpha=1.0, phi=0.0)
        assert r1 == r2 == pytest.approx(5e-5)
        assert r12 == pytest.approx(4.625e-9)

    def test_zero_visibility_flat(self):
        values = {cascade_rates(1.0, 0.2, 0.0, 1.0, phi)[2] for phi in (0.0, 0.4, 1.1)}
        assert len(values) == 1


class TestTwoChannelRates:
    def test_perfect_visibility_aligned(self):
        cfg = PdcConfig(v=1.0, eta=0.2, r0=1.0)
        rpp, rpm, rmp, rmm = two_channel_rates(cfg, 0.0)
        assert rpm == rmp == 0.0
        assert rpp == rmm == pytest.approx(0.2)

    def test_quarter_angle_equalizes(self):
        cfg = PdcConfig(v=0.9, eta=0.2, r0=1.0)
        rates = two_channel_rates(cfg, math.pi / 4)
        assert all(r == pytest.approx(0.1, abs=1e-15) for r in rates)

    def test_total_rate_is_angle_independent(self):
        cfg = PdcConfig(v=0.7, eta=0.35, r0=2.5)
        for phi in np.linspace(-math.pi, math.pi, 101):
            assert sum(two_channel_rates(cfg, phi)) == pytest.approx(
                2 * cfg.eta * cfg.r0, abs=1e-12
            )

    def test_renormalized_correlation_round_trip(self):
        cfg = PdcConfig(v=0.8, eta=0.05, r0=3.0)
        for phi in np.linspace(0, math.pi / 2, 31):
            tc = TwoChannelCounts(*two_channel_rates(cfg, phi))
            assert renormalized_correlation(tc) == pytest.approx(
                cfg.v * math.cos(2 * phi), abs=1e-12
            )


class TestBiMargin:
    def test_low_efficiency_fulfilled(self):
        lhs, fulfilled = bi_margin(1.0, 1e-4, 0.85)
        assert lhs == pytest.approx(2.2021e-4, rel=1e-4)
        assert fulfilled

    def test_boundary_visibility(self):
        lhs, _ = bi_margin(1.0, 1.0, SQRT2 / 2)
        assert lhs == pytest.approx(2.0, abs=1e-12)

    def test_ideal_detectors_violate(self):
        lhs, fulfilled = bi_margin(1.0, 1.0, 0.85)
        assert lhs == pytest.approx(2.2021, rel=1e-4)
        assert not fulfilled


class TestMinEfficiency:
    def test_perfect_visibility_threshold(self):
        assert bi1_min_efficiency(1.0) == pytest.approx(2 * (SQRT2 - 1), abs=1e-12)

    def test_boundary_visibility_requires_perfect_detection(self):
        assert bi1_min_efficiency(SQRT2 / 2) == pytest.approx(1.0, abs=1e-12)

    def test_intermediate_value(self):
        assert bi1_min_efficiency(0.9) == pytest.approx(2 / (1 + SQRT2 * 0.9), abs=1e-12)
        assert bi1_min_efficiency(0.9) == pytest.approx(0.88, abs=5e-3)

    def test_below_boundary_is_an_error(self):
        with pytest.raises(NoViolationPossibleError):
            bi1_min_efficiency(0.5)

    def test_inverse_consistency_with_bi_margin(self):
        for v in np.linspace(SQRT2 / 2 + 1e-9, 1.0, 100):
            lhs, _ = bi_margin(1.0, bi1_min_efficiency(v), v)
            assert lhs == pytest.approx(2.0, abs=1e-12)


class TestOptimalAngles:
    def test_canonical_maximum(self):
        angles, max_value = optimal_angles()
        assert max_value == pytest.approx(2 * SQRT2, abs=1e-12)
        assert angles.objective() == pytest.approx(2 * SQRT2, abs=1e-12)
        assert angles.as_tuple() == CANONICAL_ANGLES

    def test_zero_angles_suboptimal(self):
        assert AngleSet(0, 0, 0, 0).objective() == pytest.approx(2.0)

    def test_constraint_enforced(self):
        with pytest.raises(ValueError):
            AngleSet(0.1, 0.2, 0.3, 0.9)

    def test_grid_search_confirms_global_maximum(self):
        # two-stage grid over (phi1, phi2, phi3) with phi4 = phi2 + phi3 - phi1
        def objective(p1, p2, p3):
            p4 = p2 + p3 - p1
            return np.cos(2 * p1) + np.cos(2 * p2) + np.cos(2 * p3) - np.cos(2 * p4)

        coarse = np.linspace(-math.pi / 2, math.pi / 2, 64)
        g1, g2, g3 = np.meshgrid(coarse, coarse, coarse, indexing="ij")
        values = objective(g1, g2, g3)
        idx = np.unravel_index(values.argmax(), values.shape)
        center = (coarse[idx[0]], coarse[idx[1]], coarse[idx[2]])
        step = coarse[1] - coarse[0]
        fine = [np.linspace(c - step, c + step, 81) for c in center]
        f1, f2, f3 = np.meshgrid(*fine, indexing="ij")
        best = objective(f1, f2, f3).max()
        assert best == pytest.approx(2 * SQRT2, abs=1e-4)


class TestCascadeBiMaximum:
    def test_single_detector_maximum(self):
        max_lhs, theta_star = cascade_bi_maximum(1.0)
        assert max_lhs == pytest.approx(0.7436, abs=1e-3)
        assert 1 - math.cos(theta_star) == pytest.approx(0.9239, abs=1e-4)

    def test_both_detectors_doubles(self):
        max_single, _ = cascade_bi_maximum(1.0)
        max_both, _ = cascade_bi_maximum(1.0, both_detectors=True)
        assert max_both == pytest.approx(2 * max_single, abs=1e-12)
        assert max_both == pytest.approx(1.4871, abs=2e-3)

    def test_linear_in_zeta(self):
        full, _ = cascade_bi_maximum(1.0)
        half, _ = cascade_bi_maximum(0.5)
        assert half == pytest.approx(full / 2, abs=1e-9)

    def test_never_reaches_the_bound(self):
        for zeta in np.linspace(0.05, 1.0, 20):
            for both in (False, True):
                assert cascade_bi_maximum(zeta, both)[0] < 2.0


class TestCascadeReports:
    def test_genuine_and_auxiliary_verdicts_from_one_config(self):
        cfg = CascadeConfig(theta=math.pi / 3, zeta=0.2, r0=1e6)
        ch, fc = cascade_inequality_reports(cfg)
        assert ch.genuine and not fc.genuine
        assert ch.lhs == fc.lhs


class TestVisibilityEstimators:
    @staticmethod
    def samples(v, offset=0.0, n=9):
        phis = np.linspace(0, math.pi / 2, n)
        return [(float(p), v * math.cos(2 * p) + offset) for p in phis]

    def test_exact_curve_all_estimators_agree(self):
        v_fit, v_a, v_b = visibility_estimators(self.samples(0.9))
        assert v_fit == pytest.approx(0.9, abs=1e-9)
        assert v_a == pytest.approx(0.9, abs=1e-9)
        assert v_b == pytest.approx(0.9, abs=1e-9)

    def test_offset_separates_the_estimators(self):
        v_fit, v_a, _ = visibility_estimators(self.samples(0.9, offset=0.02))
        assert v_fit == pytest.approx(0.9, abs=1e-6)
        assert abs(v_fit - v_a) > 1e-3

    def test_v_b_from_s_star(self):
        assert s_star_bound_visibility(2.5) == pytest.approx(0.88388, abs=1e-5)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientCoverageError):
            visibility_estimators([(0.0, 0.9), (0.1, 0.85), (0.2, 0.8)])

    def test_insufficient_span(self):
        narrow = [(p, math.cos(2 * p)) for p in np.linspace(0, 0.5, 8)]
        with pytest.raises(InsufficientCoverageError):
            visibility_estimators(narrow)


class TestSpacelikeConstraints:
    SODIUM = KinematicsInput(mass=3.818e-26, speed=3000.0, separation=1.0, measure_time=1e-4)

    def test_measurement_time_separation(self):
        result = spacelike_constraints(self.SODIUM)
        assert result.l_meas == pytest.approx(2.99792458e4, rel=1e-9)

    def test_minimum_distance(self):
        result = spacelike_constraints(self.SODIUM)
        assert result.l_min == pytest.approx(1.84e-2, rel=1e-2)

    def test_arrival_time_spread(self):
        result = spacelike_constraints(self.SODIUM)
        assert result.dt_arrival == pytest.approx(4.52e-10, rel=1e-2)

    def test_optional_fields_absent(self):
        result = spacelike_constraints(KinematicsInput(mass=1e-26, speed=1000.0))
        assert result.dt_arrival is None and result.l_meas is None

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            KinematicsInput(mass=-1.0, speed=100.0)
        with pytest.raises(ValueError):
            KinematicsInput(mass=1e-26, speed=4e8)
