import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from hybridgrp.build import fixtures, save_group_file
from hybridgrp.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def f1_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("groups") / "f1.json"
    save_group_file(fixtures()["F1"].group, str(path))
    return str(path)


def run_cli(args):
    return subprocess.run(
        [sys.executable, "-m", "hybridgrp.cli", *args],
        capture_output=True,
        text=True,
    )


class TestBuild:
    def test_build_summary(self, runner, f1_file, tmp_path):
        out = tmp_path / "artifact.json"
        res = runner.invoke(main, ["build", f1_file, "-o", str(out)])
        assert res.exit_code == 0
        assert "order: 6" in res.output
        artifact = json.loads(out.read_text())
        assert "caches" in artifact
        assert "pc" in artifact


class TestEval:
    def test_eval(self, runner):
        res = runner.invoke(
            main,
            ["eval", "--group", "F1", "(x1 | 1 * x1 | y1^1)^-1", "--order", "--image"],
        )
        assert res.exit_code == 0
        assert "order:" in res.output
        assert "image:" in res.output

    def test_eval_parse_error_exit_1(self):
        res = run_cli(["eval", "--group", "F1", "x7 | 1"])
        assert res.returncode == 1


class TestOrder:
    def test_group_order(self, runner):
        res = runner.invoke(main, ["order", "--group", "F2"])
        assert res.exit_code == 0
        assert res.output.strip() == "24"

    def test_element_order(self, runner):
        res = runner.invoke(main, ["order", "--group", "F5", "x1 | 1"])
        assert res.output.strip() == "4"


class TestSubgroup:
    def test_order(self, runner):
        res = runner.invoke(
            main, ["subgroup", "--group", "F1", "--op", "order", "1 | y1^1"]
        )
        assert res.output.strip() == "3"

    def test_contains(self, runner):
        res = runner.invoke(
            main,
            ["subgroup", "--group", "F1", "--op", "contains",
             "--element", "x1 | 1", "1 | y1^1"],
        )
        assert res.output.strip() == "false"

    def test_transversal_op(self, runner):
        res = runner.invoke(
            main,
            ["subgroup", "--group", "F1", "--op", "transversal",
             "--u", "1 | y1^1", "x1 | 1", "1 | y1^1"],
        )
        assert "index: 2" in res.output


class TestTransversal:
    def test_reps(self, runner):
        res = runner.invoke(
            main,
            ["transversal", "--group", "F1", "--s", "x1 | 1",
             "--s", "1 | y1^1", "--u", "x1 | 1"],
        )
        assert res.exit_code == 0
        assert "index: 3" in res.output
        assert res.output.count("\n") >= 4


class TestFactor:
    def test_quotient(self, runner, tmp_path):
        out = tmp_path / "quot.json"
        res = runner.invoke(
            main,
            ["factor", "--group", "F2", "-o", str(out),
             "1 | y1^1", "1 | y2^1"],
        )
        assert res.exit_code == 0
        assert "order: 6" in res.output
        doc = json.loads(out.read_text())
        assert "pc" in doc

    def test_non_normal_exit_2(self):
        res = run_cli(["factor", "--group", "F1", "x1 | 1"])
        assert res.returncode == 2


class TestValidate:
    def test_ok(self, runner):
        res = runner.invoke(
            main, ["validate", "--group", "F1", "--samples", "200"]
        )
        assert res.exit_code == 0
        assert "overall: ok" in res.output

    def test_strict(self, runner):
        res = runner.invoke(
            main, ["validate", "--group", "F5", "--strict", "--samples", "100"]
        )
        assert res.exit_code == 0


class TestBench:
    def test_table_and_machine_lines(self, runner, tmp_path):
        out = tmp_path / "bench.txt"
        res = runner.invoke(
            main,
            ["bench", "--group", "F1", "--ops", "mul,inv", "--samples", "40",
             "--seed", "2", "--log-ops", "-o", str(out)],
        )
        assert res.exit_code == 0
        assert "x*y" in res.output
        assert "x^-1" in res.output
        assert "oplog" in res.output
        lines = out.read_text().strip().splitlines()
        assert all(ln.startswith("bench group=") for ln in lines)


class TestComplete:
    def test_completes(self, runner, tmp_path):
        pres = tmp_path / "pres.txt"
        pres.write_text("presentation 2\norders 2 3\nx2 x1 = x1 x2 x2\n")
        res = runner.invoke(main, ["complete", str(pres)])
        assert res.exit_code == 0
        assert "confluent: True" in res.output

    def test_limit_exit_3(self, tmp_path):
        pres = tmp_path / "pres.txt"
        pres.write_text("presentation 2\norders 2 3\nx1 x2 x1 x2 = 1\n")
        res = run_cli(["complete", str(pres), "--limit-rules", "1"])
        assert res.returncode == 3


class TestCheckConfluence:
    def test_confluent(self, runner, tmp_path):
        rules = tmp_path / "rules.txt"
        rules.write_text("alphabet 1\nx1 x1 -> 1\n")
        res = runner.invoke(main, ["check-confluence", str(rules)])
        assert res.exit_code == 0
        assert "confluent" in res.output

    def test_not_confluent_exit_2(self, tmp_path):
        rules = tmp_path / "rules.txt"
        rules.write_text("alphabet 2\nx1 x1 -> 1\nx1 x2 x1 -> x2\n")
        res = run_cli(["check-confluence", str(rules)])
        assert res.returncode == 2
        assert "witness" in res.stderr


class TestExitCodes:
    def test_success_zero(self):
        res = run_cli(["order", "--group", "F1"])
        assert res.returncode == 0
        assert res.stdout.strip() == "6"

    def test_unknown_group_exit_1(self):
        res = run_cli(["order", "--group", "no-such-thing"])
        assert res.returncode == 1

    def test_usage_error_exit_1(self):
        res = run_cli(["order"])
        assert res.returncode == 1

    def test_unknown_command_exit_1(self):
        res = run_cli(["frobnicate"])
        assert res.returncode == 1
