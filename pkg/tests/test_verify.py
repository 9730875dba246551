import asyncio
import json

import numpy as np
import pytest

from deltasub.analysis import INCLUDE_BASE, RANK1_ONLY, find_nonsubmodular_witness
from deltasub.const import WITNESS_MIN_GAP
from deltasub.errors import UnknownSuite, WitnessNotFound
from deltasub.setfn import OBJECTIVES, Subset
from deltasub.verify import (
    ALL_SUITES,
    FROZEN_WITNESSES,
    MAX_FAILURES,
    RECORDED_SANDWICH_INSTANCE,
    FrozenWitness,
    SuiteResult,
    cmd_verify,
    frozen_min_eig_witness,
    frozen_neg_trace_inv_witness,
    frozen_witness,
    gamma_fixtures,
    resolve_suites,
    run_suite,
)

SEED = 20190612


class TestSuiteResult:
    def test_witness_only_on_failure(self):
        result = SuiteResult("demo")
        calls = []
        result.check(True, lambda: calls.append(1) or {})
        assert result.passed
        assert calls == []
        result.check(False, lambda: {"x": 1})
        assert not result.passed
        assert result.to_dict()["failures"] == [{"x": 1}]

    def test_failures_capped(self):
        result = SuiteResult("demo")
        for i in range(MAX_FAILURES + 5):
            result.check(False, lambda i=i: {"i": i})
        assert result.failed == MAX_FAILURES + 5
        assert len(result.failures) == MAX_FAILURES


class TestSuites:
    """快速套件在默认种子下通过"""

    @pytest.mark.parametrize("name", ["formula-reductions", "gamma-characterization", "prop1-sandwich"])
    def test_suite_passes(self, name):
        result = run_suite(name, SEED)
        assert result.passed, result.failures
        assert result.checks > 0

    def test_mutation_fails_with_witness(self):
        result = run_suite("mutation-theorem1", SEED)
        assert not result.passed
        witness = result.failures[0]
        assert witness["bound"] > 1.0
        assert witness["greedy_value"] < witness["bound"] * witness["opt_value"]

    def test_gamma_fixtures_cover_both_classes(self):
        names = set(gamma_fixtures(SEED))
        assert {"modular", "concave-square", "min-eig-witness"} <= names


class TestResolve:
    def test_all_excludes_mutation(self):
        names = resolve_suites("all")
        assert names == list(ALL_SUITES)
        assert not any(name.startswith("mutation-") for name in names)

    def test_unknown_suite(self):
        with pytest.raises(UnknownSuite):
            resolve_suites("theorem9")

    def test_cmd_verify_single(self):
        (result,) = asyncio.run(cmd_verify("formula-reductions", SEED))
        assert result.name == "formula-reductions"
        assert result.to_dict()["passed"]


class TestPropSandwich:
    """三种 δ 界在两种 W_ω 解释下的夹逼记录"""

    @pytest.fixture(scope="class")
    def result(self):
        return run_suite("props-sandwich", SEED)

    @staticmethod
    def _recorded(result, prop, interp):
        n, size, beta, seed = RECORDED_SANDWICH_INSTANCE
        (record,) = [
            r
            for r in result.observations
            if (r["n"], r["N"], r["beta"], r["seed"]) == (n, size, beta, seed)
            and (r["prop"], r["interp"]) == (prop, interp)
        ]
        return record

    def test_suite_passes(self, result):
        assert result.passed, result.failures
        assert "props-sandwich" in ALL_SUITES
        # 7 个实例 × 5 个 (界, 解释) 组合
        assert len(result.observations) == 35

    def test_prop1_holds(self, result):
        record = self._recorded(result, "prop1", None)
        assert record["holds"]
        assert record["violations"] == 0

    def test_prop2_include_base_violated_everywhere(self, result):
        record = self._recorded(result, "prop2", INCLUDE_BASE)
        assert not record["holds"]
        assert record["pairs"] == 6 * 2**5
        assert record["violations"] == record["pairs"]
        assert record["bounds"]["delta_l"] > 0.0

    def test_prop3_include_base_violated(self, result):
        record = self._recorded(result, "prop3", INCLUDE_BASE)
        assert not record["holds"]
        assert record["violations"] > record["pairs"] // 2
        assert record["worst"]["excess"] > 0.0

    def test_rank1_only(self, result):
        prop2 = self._recorded(result, "prop2", RANK1_ONLY)
        assert prop2["holds"]
        assert prop2["bounds"]["delta_l"] == 0.0
        assert prop2["bounds"]["delta_u"] == pytest.approx(1.0)
        prop3 = self._recorded(result, "prop3", RANK1_ONLY)
        assert prop3["unbounded"]
        assert "bounds" not in prop3

    def test_observations_serialized(self, result):
        data = result.to_dict()
        assert len(data["observations"]) == len(result.observations)
        assert json.loads(json.dumps(data))["suite"] == "props-sandwich"


class TestFrozenWitnesses:
    """固定反例由带种子的随机搜索得到"""

    @pytest.mark.parametrize("kind", sorted(FROZEN_WITNESSES))
    def test_search_reproduces_frozen_instance(self, kind):
        frozen = FROZEN_WITNESSES[kind]
        found = find_nonsubmodular_witness(
            kind, frozen.n, frozen.N, frozen.beta, frozen.seed, frozen.attempts, frozen.decades
        )
        assert found is not None
        witness = frozen_witness(kind)
        assert found.seed == witness.seed
        assert found.attempts == witness.attempts
        np.testing.assert_array_equal(found.model.columns, witness.model.columns)
        assert found.check.witness == witness.check.witness

    @pytest.mark.parametrize("kind", sorted(FROZEN_WITNESSES))
    def test_witness_is_non_submodular(self, kind):
        witness = frozen_witness(kind)
        f = OBJECTIVES[kind](witness.model)
        size = f.ground_size()
        s, t, a = witness.check.witness
        assert f.marginal(Subset(s, size), a) < f.marginal(Subset(t, size), a)
        assert witness.check.violation >= WITNESS_MIN_GAP

    def test_fixture_models_come_from_search(self):
        np.testing.assert_array_equal(frozen_neg_trace_inv_witness().columns, frozen_witness("neg-trace-inv").model.columns)
        np.testing.assert_array_equal(frozen_min_eig_witness().columns, frozen_witness("min-eig").model.columns)

    def test_exhausted_search_raises(self, monkeypatch):
        monkeypatch.setitem(FROZEN_WITNESSES, "log-det", FrozenWitness("log-det", n=2, N=4, beta=1.0, seed=1, attempts=2))
        with pytest.raises(WitnessNotFound):
            frozen_witness("log-det")
