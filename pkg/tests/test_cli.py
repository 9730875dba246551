import json
import math

import pytest
import yaml

from deltasub.const import EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY_FAILED
from deltasub.experiments import SWEEP_COLUMNS
from deltasub.main import main


@pytest.fixture
def config_path(tmp_path) -> str:
    """不存在的配置文件，使用内置默认值"""
    return str(tmp_path / "absent.yml")


def write(path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestCommands:
    def test_analyze_to_file(self, tmp_path, config_path):
        table = write(tmp_path / "f.csv", "0,0\n1,1\n2,2\n3,3\n")
        out = tmp_path / "out" / "report.json"
        code = main(["--config", config_path, "analyze", "--tabular", table, "--k", "1", "--out", str(out)])
        assert code == EXIT_OK
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["metadata"]["command"] == "analyze"
        assert data["rows"][0]["ground_size"] == 2

    def test_sweep_beta_csv(self, capsys, config_path):
        code = main(
            ["--config", config_path, "sweep-beta", "--n", "3", "--N", "6", "--k", "2", "--beta-grid", "1:2:2,lin"]
        )
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len(lines) == 3

    def test_verify_pass(self, capsys, config_path):
        code = main(["--config", config_path, "verify", "--suite", "formula-reductions", "--format", "json"])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["passed"] is True
        assert summary["suites"][0]["suite"] == "formula-reductions"

    def test_verify_mutation_fails(self, capsys, config_path):
        assert main(["--config", config_path, "verify", "--suite", "mutation-theorem1"]) == EXIT_VERIFY_FAILED
        summary = json.loads(capsys.readouterr().out)
        assert summary["suites"][0]["failures"]

    def test_bounds_sweep_csv(self, capsys, config_path):
        code = main(["--config", config_path, "bounds", "--kind", "conforti", "--grid", "0:1:3", "--limit"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "parameter,value"
        assert lines[1] == "0.0,1.0"
        assert len(lines) == 4
        parameter, value = map(float, lines[3].split(","))
        assert parameter == 1.0
        assert value == pytest.approx(1.0 - math.exp(-1.0))

    def test_bounds_budget_not_tied_to_ground_size(self, capsys, config_path):
        code = main(
            ["--config", config_path, "bounds", "--kind", "delta-symmetric", "--grid", "0:0.8:5", "--k", "50", "--format", "json"]
        )
        assert code == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["metadata"] == {"command": "bounds", "kind": "delta-symmetric", "k": 50, "alpha": 1.0}
        values = [row["value"] for row in data["rows"]]
        assert values == sorted(values, reverse=True)

    def test_analyze_budget_clamped_to_table(self, capsys, tmp_path, config_path):
        table = write(tmp_path / "f.csv", "0,0\n1,1\n2,2\n3,3\n")
        assert main(["--config", config_path, "analyze", "--tabular", table]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["metadata"]["config"]["k"] == 2
        assert data["rows"][0]["ground_size"] == 2

    def test_init_config(self, tmp_path):
        path = tmp_path / "config" / "config.yml"
        assert main(["--config", str(path), "init-config"]) == EXIT_OK
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert data["seed"] == 20190612
        assert [preset["id"] for preset in data["experiments"]] == ["sweep-beta", "sensor-select"]


class TestErrors:
    """错误映射为退出码 1，错误详情以 JSON 写到 stderr"""

    def test_malformed_tabular(self, tmp_path, capsys, config_path):
        table = write(tmp_path / "bad.csv", "0,0\n1,abc\n")
        assert main(["--config", config_path, "analyze", "--tabular", table]) == EXIT_VALIDATION
        err = capsys.readouterr().err
        payload = json.loads(err[err.index("{") :])
        assert payload["error"] == "ParseError"
        assert payload["line"] == 2
        assert payload["column"] == 2

    def test_bounds_invalid_grid(self, config_path):
        assert main(["--config", config_path, "bounds", "--kind", "bian", "--grid", "1:0:3"]) == EXIT_VALIDATION

    def test_bounds_symmetric_delta_out_of_range(self, config_path):
        assert main(["--config", config_path, "bounds", "--kind", "delta-symmetric", "--grid", "0:1:3"]) == EXIT_VALIDATION

    def test_unknown_suite(self, config_path):
        assert main(["--config", config_path, "verify", "--suite", "theorem9"]) == EXIT_VALIDATION

    def test_invalid_override(self, config_path):
        assert main(["--config", config_path, "sweep-beta", "--k", "0"]) == EXIT_VALIDATION

    def test_missing_input_file(self, tmp_path, config_path):
        missing = str(tmp_path / "nope.csv")
        assert main(["--config", config_path, "analyze", "--matrix", missing]) == EXIT_VALIDATION

    def test_missing_source_argument(self, config_path):
        with pytest.raises(SystemExit) as info:
            main(["--config", config_path, "analyze"])
        assert info.value.code == EXIT_VALIDATION
