import math

import numpy as np
import pytest

from deltasub.analysis import DeltaBounds
from deltasub.bounds import (
    THEOREM_BIAN,
    THEOREM_CONFORTI,
    BoundInputs,
    BoundReport,
    bound_bian,
    bound_conforti,
    bound_delta,
    bound_reports,
    feasibility,
    sweep_bound,
)
from deltasub.const import LIMIT
from deltasub.errors import Infeasible, InvalidBudget, InvalidParameter


class TestConforti:
    """总曲率界"""

    def test_limit_at_full_curvature(self):
        assert bound_conforti(1.0, LIMIT) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
        assert bound_conforti(1.0, LIMIT) == pytest.approx(0.6321206, abs=1e-7)

    def test_two_steps(self):
        assert bound_conforti(1.0, 2) == pytest.approx(0.75)

    def test_zero_curvature_is_optimal(self):
        assert bound_conforti(0.0, 5) == 1.0
        assert bound_conforti(0.0, LIMIT) == 1.0

    def test_small_curvature_continuous(self):
        assert bound_conforti(1e-9, 5) == pytest.approx(bound_conforti(1e-7, 5), abs=1e-6)
        assert bound_conforti(1e-9, LIMIT) == pytest.approx(1.0, abs=1e-8)

    def test_decreasing_in_k(self):
        values = [bound_conforti(0.5, k) for k in range(1, 11)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert values[-1] >= bound_conforti(0.5, LIMIT)

    @pytest.mark.parametrize("alpha, k", [(1.5, 3), (-0.1, 3)])
    def test_invalid_alpha(self, alpha, k):
        with pytest.raises(InvalidParameter):
            bound_conforti(alpha, k)

    @pytest.mark.parametrize("k", [0, -2, True, "inf", 2.5])
    def test_invalid_budget(self, k):
        with pytest.raises(InvalidBudget):
            bound_conforti(0.5, k)


class TestBian:
    """子模比 + 广义曲率界"""

    def test_limit(self):
        assert bound_bian(1.0, 0.5, LIMIT) == pytest.approx(0.3934693, abs=1e-7)

    def test_zero_alpha_gives_gamma(self):
        assert bound_bian(0.0, 0.7, 4) == pytest.approx(0.7)

    def test_gamma_one_matches_conforti(self):
        assert bound_bian(0.4, 1.0, 6) == pytest.approx(bound_conforti(0.4, 6), abs=1e-15)

    def test_increasing_in_gamma(self):
        values = [bound_bian(0.8, gamma, 5) for gamma in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert values == sorted(values)


class TestDeltaBound:
    """δ-近似界"""

    @pytest.mark.parametrize("k", [1, 3, 10, LIMIT])
    def test_exact_surrogate_reduces_to_conforti(self, k):
        assert bound_delta(0.6, DeltaBounds.symmetric(0.0), k) == pytest.approx(bound_conforti(0.6, k), abs=1e-15)

    def test_full_curvature_reduces_to_bian(self):
        assert bound_delta(1.0, DeltaBounds.asymmetric(0.5, 1.0), LIMIT) == pytest.approx(
            bound_bian(1.0, 0.5, LIMIT), abs=1e-15
        )

    def test_single_step_is_ratio(self):
        assert bound_delta(0.3, DeltaBounds.symmetric(0.2), 1) == pytest.approx(2.0 / 3.0)

    def test_zero_lower_bound(self):
        assert bound_delta(0.5, DeltaBounds.asymmetric(0.0, 1.0), 4) == 0.0

    def test_one_sided_ratio(self):
        # r = 1/2, C = 1/2
        assert bound_delta(0.0, DeltaBounds.one_sided(2.0), LIMIT) == pytest.approx(2.0 * (1.0 - math.exp(-0.25)))

    def test_decreasing_in_delta(self):
        values = [bound_delta(0.5, DeltaBounds.symmetric(d), 5) for d in (0.0, 0.1, 0.2, 0.4, 0.8)]
        assert values == sorted(values, reverse=True)

    @pytest.mark.parametrize("k", [1, 2, 3, 7, LIMIT])
    def test_rounding_never_exceeds_one(self, k):
        for alpha in np.linspace(0.0, 1.0, 101):
            alpha = float(alpha)
            assert 0.0 <= bound_conforti(alpha, k) <= 1.0
            assert 0.0 <= bound_bian(alpha, 1.0, k) <= 1.0
            assert 0.0 <= bound_delta(alpha, DeltaBounds.symmetric(0.0), k) <= 1.0

    def test_single_step_exactly_one(self):
        alpha = 0.35000000000000003
        assert bound_conforti(alpha, 1) == 1.0
        assert bound_bian(alpha, 1.0, 1) == 1.0
        assert bound_delta(alpha, DeltaBounds.symmetric(0.0), 1) == 1.0

    def test_within_unit_interval(self):
        for alpha in (0.0, 0.25, 0.5, 1.0):
            for d in (0.0, 0.3, 0.9):
                assert 0.0 <= bound_delta(alpha, DeltaBounds.symmetric(d), 7) <= 1.0


class TestFeasibility:
    """三种结构的可行性判据"""

    def test_symmetric(self):
        assert not feasibility(DeltaBounds.symmetric(0.2), 0.5)
        assert feasibility(DeltaBounds.symmetric(0.2), 1.0)
        assert feasibility(DeltaBounds.symmetric(1.0 / 3.0), 0.5)

    def test_asymmetric(self):
        assert not feasibility(DeltaBounds.asymmetric(0.5, 1.0), 0.4)
        assert feasibility(DeltaBounds.asymmetric(0.5, 1.0), 0.6)

    def test_one_sided(self):
        assert feasibility(DeltaBounds.one_sided(2.0), 0.5)
        assert not feasibility(DeltaBounds.one_sided(2.0), 0.4)

    def test_one_sided_zero_gamma(self):
        with pytest.raises(Infeasible):
            feasibility(DeltaBounds.one_sided(5.0), 0.0)


class TestReports:
    def test_all_bounds(self):
        reports = bound_reports(
            BoundInputs(
                3,
                alpha_total=0.5,
                alpha=0.5,
                gamma=0.8,
                alpha_delta=0.5,
                deltas=[DeltaBounds.symmetric(0.1), DeltaBounds.symmetric(0.5), DeltaBounds.one_sided(2.0)],
                gamma_f=0.4,
            )
        )
        assert [r.theorem for r in reports] == [
            THEOREM_CONFORTI,
            THEOREM_BIAN,
            "delta-symmetric",
            "delta-symmetric",
            "delta-one-sided",
        ]
        # γ_f = 0.4 要求 δ ≥ 0.6/1.4
        assert not reports[2].feasible
        assert "0.428571" in reports[2].reason
        assert reports[3].feasible
        assert not reports[4].feasible
        assert reports[0].to_dict()["inputs"] == {"alpha": 0.5, "k": 3}

    def test_infeasible_structure_still_reported(self):
        reports = bound_reports(BoundInputs(LIMIT, alpha_delta=0.2, deltas=[DeltaBounds.one_sided(3.0)], gamma_f=0.0))
        assert len(reports) == 1
        assert not reports[0].feasible
        assert 0.0 <= reports[0].ratio <= 1.0

    def test_unknown_gamma_skips_feasibility(self):
        (report,) = bound_reports(BoundInputs(2, alpha_delta=0.2, deltas=[DeltaBounds.symmetric(0.5)]))
        assert report.feasible

    def test_ratio_out_of_range(self):
        with pytest.raises(InvalidParameter):
            BoundReport("conforti", 1.5)

    def test_inputs_validated(self):
        with pytest.raises(InvalidParameter):
            BoundInputs(3, gamma=2.0)
        with pytest.raises(InvalidBudget):
            BoundInputs(0)
        with pytest.raises(InvalidParameter):
            BoundInputs(LIMIT, alpha_delta=-0.1)
        assert BoundInputs(2, deltas=[DeltaBounds.symmetric(0.1)]).deltas == (DeltaBounds.symmetric(0.1),)


class TestSweep:
    def test_conforti_decreasing_in_alpha(self):
        rows = sweep_bound("conforti", [0.0, 0.5, 1.0], LIMIT)
        values = [row["value"] for row in rows]
        assert values == sorted(values, reverse=True)
        assert rows[0] == {"parameter": 0.0, "value": 1.0}

    def test_delta_ratio_increasing(self):
        rows = sweep_bound("delta-ratio", [0.2, 0.5, 1.0], 4, alpha=0.5)
        values = [row["value"] for row in rows]
        assert values == sorted(values)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameter):
            sweep_bound("nemhauser", [0.5], 3)
