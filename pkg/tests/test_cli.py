"""Tests for the command-line front end."""
import csv
import io
import json

import pytest

from starcluster import cli
from starcluster.core.tableau import Disagreement, VerificationReport
from starcluster.suite import chain_circuit


def _data_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def _rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(_data_lines(text)))))


class TestScalarCommands:
    """Tests for lmin and pf."""

    def test_lmin(self, capsys):
        assert cli.run(["lmin", "--ps", "0.9", "--pf-max", "0.01"]) == 0
        out = capsys.readouterr().out
        assert _data_lines(out) == ["L", "7"]
        assert out.startswith("# command: \"lmin\"")

    def test_pf_below_minimum(self, capsys):
        assert cli.run(["pf", "--L", "3", "--ps", "0.9"]) == 0
        assert _data_lines(capsys.readouterr().out)[-1] == "1.0"

    def test_json_format(self, capsys):
        assert cli.run(["lmin", "--ps", "0.5", "--format", "json"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["data"] == [{"L": 17}]
        assert document["provenance"]["inputs"] == {"p_s": 0.5, "p_f_max": 0.01}
        assert "generated_at" in document["provenance"]

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "pf.csv"
        assert cli.run(["pf", "--L", "7", "--ps", "0.9", "-o", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert float(_data_lines(target.read_text())[-1]) == pytest.approx(2.7279e-3, rel=1e-3)


class TestTables:
    """Tests for threshold, renorm, resources and compare output."""

    def test_threshold_grid(self, capsys):
        assert cli.run(["threshold", "--grid", "0.5:0.9:0.4", "--variant", "both"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert list(rows[0]) == ["p_s", "variant", "L", "p_f", "p_u_threshold"]
        assert [(r["p_s"], r["variant"], r["L"]) for r in rows] == [
            ("0.5", "p1", "17"),
            ("0.5", "p2", "17"),
            ("0.9", "p1", "7"),
            ("0.9", "p2", "7"),
        ]
        assert float(rows[2]["p_u_threshold"]) == pytest.approx(0.02 / 33.18, rel=1e-3)

    def test_renorm_breakdown(self, capsys):
        args = ["renorm", "--variant", "p1", "--pu", "0.001", "--L", "7"]
        assert cli.run(args + ["--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)["data"]
        assert data["p_r"] == pytest.approx(0.03318)
        assert data["crossover_L"] == 12.0

    def test_renorm_independent_csv(self, capsys):
        args = ["renorm", "--variant", "p1", "--pu", "0.001", "--L", "7"]
        assert cli.run(args + ["--independent"]) == 0
        values = {row["key"]: row["value"] for row in _rows(capsys.readouterr().out)}
        assert float(values["p_r"]) == pytest.approx(0.012)
        assert float(values["breakdown.DISCARDED_LEAVES"]) == pytest.approx(0.003)

    def test_resources(self, capsys):
        args = ["resources", "--L", "97", "--ps", "0.1", "--rtowc", "1e7", "--format", "json"]
        assert cli.run(args) == 0
        data = json.loads(capsys.readouterr().out)["data"]
        assert data["r_star"]["log10"] == pytest.approx(100.03, abs=0.01)
        assert set(data["log_base_sensitivity"]) == {"2", "10", "e"}

    def test_compare(self, capsys):
        assert cli.run(["compare", "--point", "0.9:6e-4:1e7"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert [r["scheme"] for r in rows] == ["star_cluster", "goto"]

    def test_compare_without_points(self, capsys):
        assert cli.run(["compare"]) == 0
        assert _data_lines(capsys.readouterr().out) == [
            "scheme,p_s,p_u,L,r_star_log10,r_towc_log10,r_total_log10,source"
        ]


class TestSimulate:
    """Tests for the simulate subcommands."""

    def test_pf_monte_carlo(self, capsys):
        args = ["simulate", "pf", "--ps", "0.9", "--L", "7", "--samples", "50000", "--seed", "3"]
        assert cli.run(args + ["--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)["data"]
        assert data["samples"] == 50000
        assert abs(data["rate"] - data["expected"]) <= 3 * data["stderr"]

    def test_coeffs_reproducible_across_workers(self, capsys):
        args = [
            "simulate", "coeffs", "--ps", "1.0", "--L-grid", "4,5,6,7,8",
            "--samples", "3", "--sources", "meas", "--seed", "8",
        ]
        assert cli.run(args + ["--workers", "1"]) == 0
        single = _data_lines(capsys.readouterr().out)
        assert cli.run(args + ["--workers", "2"]) == 0
        double = _data_lines(capsys.readouterr().out)
        assert single == double
        values = dict(line.split(",", 1) for line in single[1:])
        assert float(values["intercept"]) == pytest.approx(5.0)

    def test_unknown_source(self, capsys):
        args = ["simulate", "coeffs", "--ps", "0.9", "--sources", "gate,cosmic"]
        assert cli.run(args) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "InvalidArgumentError"
        assert error["exit_code"] == 2


class TestExitCodes:
    """Errors map to documented exit codes."""

    def test_argparse_error(self, capsys):
        assert cli.run(["pf", "--L", "7", "--ps", "1.5"]) == 2

    def test_invalid_argument(self, capsys):
        assert cli.run(["renorm", "--variant", "p1", "--pu", "0.001", "--L", "3"]) == 2

    def test_infeasible(self, capsys):
        args = ["threshold", "--ps", "0.9", "--variant", "p1", "--pp", "0.5", "--pm", "0.5"]
        assert cli.run(args) == 3
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "InfeasibleThresholdError"

    def test_resource_limit(self, capsys):
        assert cli.run(["lmin", "--ps", "0.01", "--cap", "10"]) == 4

    def test_unwritable_output(self, tmp_path, capsys):
        target = tmp_path / "missing" / "lmin.csv"
        assert cli.run(["lmin", "--ps", "0.9", "-o", str(target)]) == 6
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "OutputWriteError"
        assert error["exit_code"] == 6
        assert not target.exists()

    def test_verify_ok(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "builtin_suite", lambda: {"chain3": chain_circuit(3)})
        assert cli.run(["verify", "--seed", "1"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert rows[0]["circuit"] == "chain3"
        assert rows[0]["disagreements"] == "0"

    def test_verify_failure(self, capsys, monkeypatch):
        report = VerificationReport(qubits=3, disagreements=[Disagreement("flips", "forced")])
        monkeypatch.setattr(cli, "builtin_suite", lambda: {"chain3": chain_circuit(3)})
        monkeypatch.setattr(cli, "verify_against_oracle", lambda circuit, seed: report)
        assert cli.run(["verify"]) == 5

    def test_verify_circuit_file(self, capsys, tmp_path, read_fixture):
        path = tmp_path / "chain3.txt"
        path.write_text(read_fixture("chain3.txt"))
        assert cli.run(["verify", "--circuit", str(path), "--seed", "4"]) == 0


class TestProvenance:
    """Provenance records what was computed, not how the run was executed."""

    def test_recorded_argv(self):
        argv = [
            "simulate", "pf", "--workers", "4", "-o", "out.csv", "--verbose",
            "--output=x.json", "--workers=2", "-v", "--seed", "3",
        ]
        assert cli.recorded_argv(argv) == ["simulate", "pf", "--seed", "3"]

    def test_execution_options_leave_provenance_unchanged(self, tmp_path, capsys):
        args = [
            "simulate", "pf", "--ps", "0.9", "--L", "7", "--samples", "1000",
            "--seed", "2", "--format", "json",
        ]
        assert cli.run(args + ["--workers", "1"]) == 0
        first = json.loads(capsys.readouterr().out)
        target = tmp_path / "pf.json"
        assert cli.run(args + ["--workers=2", "-v", "-o", str(target)]) == 0
        second = json.loads(target.read_text())
        for document in (first, second):
            document["provenance"].pop("generated_at")
        assert first == second
        assert "--workers" not in first["provenance"]["argv"]
