"""Tests for the command-line front-end and report writers."""

import csv
import io
import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from prv_composer.budget.bounds import gaussian_epsilon
from prv_composer.cli import error_line, run
from prv_composer.commands.report import curve_csv, metadata_path
from prv_composer.models import CurvePoint, EpsEstimate

ROOT = Path(__file__).resolve().parents[1]
EXAMPLES = ROOT / "config" / "examples"

JobWriter = Callable[..., Path]


def invoke(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def gaussian_job(**query: Any) -> dict[str, Any]:
    return {
        "mechanisms": [{"kind": "gaussian", "params": {"noise_scale": 2.0}, "count": 4}],
        "query": query,
        "eps_error": 0.1,
    }


class TestCompose:
    def test_gaussian_example(self, tmp_path: Path) -> None:
        report_path = tmp_path / "report.json"
        code, out, err = invoke(
            "compose", "--config", str(EXAMPLES / "gaussian.json"), "--out", str(report_path)
        )
        assert code == 0, err
        assert "eps(delta=" in out

        report = json.loads(report_path.read_text())
        eps = report["eps"]
        exact = gaussian_epsilon(1.0, 0.12693)
        assert eps["lower"] <= exact <= eps["upper"]
        assert eps["upper"] - eps["lower"] <= 2 * 0.01 + 1e-3
        assert report["budget"]["k"] == 1

    def test_pure_dp_example(self, tmp_path: Path) -> None:
        report_path = tmp_path / "report.json"
        code, out, err = invoke(
            "compose", "--config", str(EXAMPLES / "pure_dp.json"), "--out", str(report_path)
        )
        assert code == 0, err
        assert "delta(eps=1.1)" in out
        report = json.loads(report_path.read_text())
        assert report["delta"]["upper"] <= 1e-9

    def test_curve_query_in_report(self, write_job: JobWriter, tmp_path: Path) -> None:
        job = write_job(gaussian_job(curve={"eps_min": 0.0, "eps_max": 2.0, "num_points": 5}))
        report_path = tmp_path / "report.json"
        code, out, _ = invoke("compose", "--config", str(job), "--out", str(report_path))
        assert code == 0
        assert "curve: 5 points" in out
        assert len(json.loads(report_path.read_text())["curve"]) == 5

    def test_delta_error_defaults_from_target(
        self, write_job: JobWriter, tmp_path: Path
    ) -> None:
        job = write_job(gaussian_job(delta_target=1e-5))
        report_path = tmp_path / "report.json"
        code, _, _ = invoke("compose", "--config", str(job), "--out", str(report_path))
        assert code == 0
        assert json.loads(report_path.read_text())["budget"]["delta_error"] == pytest.approx(1e-8)


class TestDpsgd:
    def test_small_run(self) -> None:
        code, out, err = invoke(
            "dpsgd",
            "--sigma", "1.0",
            "--sampling-prob", "0.01",
            "--steps", "100",
            "--delta", "1e-5",
            "--eps-error", "0.2",
        )  # fmt: skip
        assert code == 0, err
        assert "dpsgd" in out
        assert "eps(delta=0.00001)" in out

    @pytest.mark.slow
    def test_both_directions(self, tmp_path: Path) -> None:
        forward_path, reverse_path = tmp_path / "forward.json", tmp_path / "reverse.json"
        common = ["--sigma", "0.8", "--sampling-prob", "0.004", "--steps", "250", "--delta", "1e-6"]
        assert invoke("dpsgd", *common, "--out", str(forward_path))[0] == 0
        assert invoke("dpsgd", *common, "--inverted-direction", "--out", str(reverse_path))[0] == 0
        forward = json.loads(forward_path.read_text())["eps"]
        reverse = json.loads(reverse_path.read_text())["eps"]
        assert forward["upper"] > 0.0
        assert reverse["upper"] > 0.0


class TestCurve:
    def test_writes_csv_and_metadata(self, write_job: JobWriter, tmp_path: Path) -> None:
        job = write_job(gaussian_job(curve={"eps_min": 0.0, "eps_max": 2.0, "num_points": 21}))
        out_path = tmp_path / "curve.csv"
        code, out, err = invoke("curve", "--config", str(job), "--out", str(out_path))
        assert code == 0, err
        assert "wrote" in out

        with open(out_path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["eps", "delta_lower", "delta_est", "delta_upper"]
        assert len(rows) == 22
        for row in rows[1:]:
            lower, estimate, upper = (float(value) for value in row[1:])
            assert lower <= estimate <= upper

        metadata = json.loads((tmp_path / "curve.csv.json").read_text())
        assert metadata["k"] == 4
        assert metadata["delta_error"] == pytest.approx(1e-10)

    def test_requires_curve_query(self, write_job: JobWriter, tmp_path: Path) -> None:
        job = write_job(gaussian_job(delta_target=1e-5))
        code, _, err = invoke("curve", "--config", str(job), "--out", str(tmp_path / "c.csv"))
        assert code == 2
        assert err.startswith("error code=parameter exit=2 ")

    def test_metadata_path(self) -> None:
        assert metadata_path("out/curve.csv") == Path("out/curve.csv.json")
        assert metadata_path("out/curve.json") == Path("out/curve.meta.json")

    def test_values_are_plain_decimals(self) -> None:
        point = CurvePoint(eps=0.5, delta_lower=1.5e-12, delta_est=2.0e-11, delta_upper=1.0)
        rows = list(csv.reader(io.StringIO(curve_csv([point]))))
        assert rows[1] == ["0.5", "0.0000000000015", "0.00000000002", "1.0"]
        for text, value in zip(rows[1], point.model_dump().values(), strict=True):
            assert float(text) == value


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, write_job: JobWriter, tmp_path: Path) -> None:
        job = write_job(gaussian_job(curve={"eps_min": 0.0, "eps_max": 3.0, "num_points": 31}))
        outputs: list[list[bytes]] = []
        for attempt in ("first", "second"):
            curve_path = tmp_path / attempt / "curve.csv"
            report_path = tmp_path / attempt / "report.json"
            assert invoke("curve", "--config", str(job), "--out", str(curve_path))[0] == 0
            assert invoke("compose", "--config", str(job), "--out", str(report_path))[0] == 0
            outputs.append(
                [
                    curve_path.read_bytes(),
                    metadata_path(curve_path).read_bytes(),
                    report_path.read_bytes(),
                ]
            )
        assert outputs[0] == outputs[1]


class TestValidateGaussian:
    def test_all_points_pass(self) -> None:
        code, out, err = invoke(
            "validate-gaussian", "--sigma", "2.0", "--steps", "4", "--eps-error", "0.1"
        )
        assert code == 0, err
        assert out.count("PASS") == 21
        assert "FAIL" not in out


class TestErrors:
    def test_missing_config(self, tmp_path: Path) -> None:
        code, _, err = invoke("compose", "--config", str(tmp_path / "missing.json"))
        assert code == 4
        assert err.startswith("error code=io exit=4 ")

    def test_unknown_key(self, write_job: JobWriter) -> None:
        job = gaussian_job(delta_target=1e-5)
        job["mechanisms"][0]["params"]["noise"] = 1.0
        code, _, err = invoke("compose", "--config", str(write_job(job)))
        assert code == 2
        assert err.startswith("error code=validation exit=2 ")

    def test_delta_below_floor(self, write_job: JobWriter) -> None:
        job = write_job(gaussian_job(delta_target=1e-12))
        code, _, err = invoke("compose", "--config", str(job))
        assert code == 3
        assert err.startswith("error code=precision exit=3 ")

    def test_eps_outside_window(self, write_job: JobWriter) -> None:
        code, _, err = invoke("compose", "--config", str(write_job(gaussian_job(eps_target=1e3))))
        assert code == 2
        assert err.startswith("error code=range exit=2 ")

    def test_single_error_line(self, tmp_path: Path) -> None:
        _, _, err = invoke("compose", "--config", str(tmp_path / "missing.json"))
        assert err.count("\n") == 1

    def test_error_line_quotes_message(self) -> None:
        assert error_line("io", 4, 'no "file"') == 'error code=io exit=4 message="no \\"file\\""'

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        with pytest.raises(SystemExit) as excinfo:
            run(["--version"])
        assert excinfo.value.code == 0
        assert "prv-composer" in capsys.readouterr().out


class TestReportModels:
    def test_infinity_serializes_as_string(self) -> None:
        inf = float("inf")
        payload = json.loads(EpsEstimate(lower=1.0, estimate=inf, upper=inf).model_dump_json())
        assert payload["upper"] == "Infinity"
