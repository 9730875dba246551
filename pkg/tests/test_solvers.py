from itertools import combinations

import numpy as np
import pytest

from deltasub.errors import InvalidBudget, TooLarge
from deltasub.setfn import ModularFunction, Subset, TabularFunction, log_det_objective, neg_trace_inv
from deltasub.solvers import exhaustive_opt, greedy, random_baseline


class TestGreedy:
    """贪心选择"""

    def test_modular_picks_heaviest(self):
        trace = greedy(ModularFunction([1.0, 5.0, 3.0, 4.0]), 2)
        assert trace.selection.elements == (1, 3)
        assert trace.selection.gains == (5.0, 4.0)
        assert trace.value == pytest.approx(9.0)

    def test_ties_go_to_lowest_index(self):
        trace = greedy(ModularFunction([2.0, 2.0, 2.0]), 2)
        assert trace.selection.elements == (0, 1)

    def test_gains_are_marginals(self, small_model):
        f = neg_trace_inv(small_model)
        trace = greedy(f, 4)
        for i, a in enumerate(trace.selection.elements):
            prefix = trace.selection.prefix(i)
            assert trace.selection.gains[i] == pytest.approx(f.evaluate(prefix.add(a)) - f.evaluate(prefix), abs=1e-12)
        assert trace.value == pytest.approx(f.evaluate(trace.selection.subset), abs=1e-12)

    def test_record_candidates(self):
        trace = greedy(ModularFunction([1.0, 5.0, 3.0]), 2, record_candidates=True)
        assert len(trace.candidate_values) == 2
        assert np.isnan(trace.candidate_values[1][1])
        np.testing.assert_array_equal(trace.candidate_values[0], [1.0, 5.0, 3.0])

    @pytest.mark.parametrize("k", [0, 4])
    def test_invalid_budget(self, k):
        with pytest.raises(InvalidBudget):
            greedy(ModularFunction([1.0, 2.0, 3.0]), k)


class TestExhaustiveOpt:
    """枚举最优解"""

    def test_matches_manual_enumeration(self, small_model):
        f = log_det_objective(small_model)
        opt = exhaustive_opt(f, 3)
        best = max(f.evaluate(Subset.of(c, 8)) for c in combinations(range(8), 3))
        assert opt.best_value == pytest.approx(best, abs=1e-12)
        assert len(opt.best_set) == 3

    def test_greedy_never_beats_opt(self, small_model):
        f = neg_trace_inv(small_model)
        for k in (1, 2, 3):
            assert greedy(f, k).value <= exhaustive_opt(f, k).best_value + 1e-12

    def test_tie_breaks_by_smallest_mask(self):
        opt = exhaustive_opt(ModularFunction([1.0, 1.0, 1.0]), 2)
        assert opt.best_set.bits == 0b011

    def test_tabular_singleton_opt(self):
        f = TabularFunction([0.0, 1.0, 3.0, 3.0])
        opt = exhaustive_opt(f, 1)
        assert opt.best_set.elements() == (1,)

    def test_too_large(self):
        with pytest.raises(TooLarge):
            exhaustive_opt(ModularFunction(np.ones(25)), 2)


class TestRandomBaseline:
    """随机 k 子集基线"""

    def test_deterministic_per_seed(self):
        f = ModularFunction([1.0, 2.0, 3.0, 4.0, 5.0])
        a = random_baseline(f, 2, 50, seed=3)
        b = random_baseline(f, 2, 50, seed=3)
        assert a.samples == b.samples
        assert a.to_dict() == b.to_dict()

    def test_summary_ordering(self):
        f = ModularFunction([1.0, 2.0, 3.0, 4.0, 5.0])
        summary = random_baseline(f, 2, 200, seed=8)
        assert summary.minimum <= summary.q1 <= summary.median <= summary.q3 <= summary.maximum
        assert 3.0 <= summary.minimum and summary.maximum <= 9.0
        assert all(bin(mask).count("1") == 2 for mask, _ in summary.samples)

    def test_quantiles_are_sample_values(self):
        f = ModularFunction([1.0, 2.0, 4.0, 8.0])
        summary = random_baseline(f, 1, 31, seed=2)
        values = {value for _, value in summary.samples}
        assert summary.median in values

    def test_invalid_trials(self):
        with pytest.raises(InvalidBudget):
            random_baseline(ModularFunction([1.0, 2.0]), 1, 0, seed=1)
