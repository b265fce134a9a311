"""Tests for the glzeta command line."""
import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from glzeta.analysis import mean_cov
from glzeta.cli import EXIT_DOMAIN, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, run
from glzeta.model import LocationScale, normalizing_constant, preset


def schema(name):
    text = resources.files("glzeta").joinpath(f"schemas/{name}.json").read_text()
    return json.loads(text)


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def invoke_json(capsys, command, *argv):
    code, out, err = invoke(capsys, command, *argv, "--format", "json")
    assert code == EXIT_OK, err
    doc = json.loads(out)
    jsonschema.validate(doc, schema(command))
    return doc


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


class TestSchemas:
    def test_every_command_has_a_valid_schema(self):
        names = ["eval", "sample", "fit", "gof", "moments", "cf", "marginal", "conditional",
                 "dependence", "grid"]
        for name in names:
            jsonschema.Draft202012Validator.check_schema(schema(name))

    def test_outputs_validate(self, capsys):
        invoke_json(capsys, "eval", "--preset", "logistic", "--n", "2", "--point", "0,0")
        invoke_json(capsys, "sample", "--preset", "laplace", "--n", "2", "--count", "5")
        invoke_json(capsys, "gof", "--preset", "logistic", "--data", "table1", "--mu", "3", "--sigma2", "0.1")
        invoke_json(capsys, "moments", "--preset", "logistic", "--n", "2", "--product", "2,2")
        invoke_json(capsys, "cf", "--preset", "logistic", "--n", "2", "--t", "0.5,0")
        invoke_json(capsys, "marginal", "--preset", "logistic", "--n", "3", "--m", "1")
        invoke_json(capsys, "conditional", "--preset", "logistic", "--n", "2", "--m", "1",
                    "--given", "0.5", "--point", "0.1")
        invoke_json(capsys, "dependence", "--steps", "3")
        invoke_json(capsys, "grid", "--preset", "logistic", "--steps", "3")


class TestEval:
    def test_logistic_origin(self, capsys):
        doc = invoke_json(capsys, "eval", "--preset", "logistic", "--n", "2", "--point", "0,0")
        assert doc["pdf"] == pytest.approx(0.5 / math.pi, rel=1e-12)

    def test_params_override(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"N": 2, "a": 1, "b": 1, "r": 1}))
        doc = invoke_json(capsys, "eval", "--params", f"@{path}", "--point", "0.5")
        assert doc["params"]["N"] == 2.0 and doc["n"] == 1
        doc = invoke_json(capsys, "eval", "--preset", "kotz", "--params", '{"N": 2, "a": 1, "s1": 1}',
                          "--point", "0.5")
        assert doc["params"]["N"] == 2.0

    def test_location_scale(self, capsys):
        doc = invoke_json(capsys, "eval", "--preset", "normal", "--n", "2", "--point", "1,2",
                          "--mu", "1,2", "--sigma", "2,0;0,2")
        assert doc["pdf"] == pytest.approx(1 / (4 * math.pi), rel=1e-12)


class TestExitCodes:
    def test_help(self, capsys):
        code, out, _ = invoke(capsys, "--help")
        assert code == EXIT_OK and "usage" in out

    def test_usage_errors(self, capsys):
        assert invoke(capsys)[0] == EXIT_USAGE
        assert invoke(capsys, "eval", "--preset", "logistic")[0] == EXIT_USAGE
        assert invoke(capsys, "eval", "--preset", "logistic", "--point", "0", "--bogus")[0] == EXIT_USAGE
        assert invoke(capsys, "eval", "--preset", "logistic", "--n", "2", "--point", "0")[0] == EXIT_USAGE
        assert invoke(capsys, "sample", "--preset", "normal", "--count", "0")[0] == EXIT_USAGE
        assert invoke(capsys, "frobnicate")[0] == EXIT_USAGE

    def test_domain_errors(self, capsys):
        code, _, err = invoke(capsys, "eval", "--params", '{"N": 1, "a": -1}', "--point", "0")
        assert code == EXIT_DOMAIN and "a must be positive" in err
        assert invoke(capsys, "grid", "--preset", "logistic", "--rho", "1.5")[0] == EXIT_DOMAIN
        assert invoke(capsys, "fit", "--data", "/nonexistent/file.csv")[0] == EXIT_DOMAIN

    def test_non_converged_fit(self, capsys):
        code, out, err = invoke(capsys, "fit", "--data", "table1", "--fix", "N=1,a=1,s=1",
                                "--max-iter", "5", "--restarts", "1")
        assert code == EXIT_NOT_CONVERGED
        assert json.loads(out)["converged"] is False and "partial" in err

    def test_installed_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "glzeta.cli", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0 and "fit" in proc.stdout


class TestFitAndSample:
    def test_table1_fit(self, capsys):
        doc = invoke_json(capsys, "fit", "--data", "table1", "--fix", "N=1,a=1,s=1")
        assert doc["n_observations"] == 63 and doc["free_count"] == 4
        assert doc["log_likelihood"] == pytest.approx(-58.2822, abs=1e-3)
        assert doc["data_source"] == "table1"

    def test_sample_reproducible(self, capsys):
        a = invoke(capsys, "sample", "--preset", "logistic", "--n", "2", "--count", "20", "--seed", "9",
                   "--format", "csv")[1]
        b = invoke(capsys, "sample", "--preset", "logistic", "--n", "2", "--count", "20", "--seed", "9",
                   "--format", "csv")[1]
        header, rows = read_csv(a)
        assert a == b and header == ["x1", "x2"] and rows.shape == (20, 2)

    def test_round_trip(self, tmp_path):
        mu, count = 1.5, 10_000
        draws = subprocess.run([sys.executable, "-m", "glzeta.cli", "sample", "--preset", "logistic",
                                "--count", str(count), "--seed", "12", "--mu", str(mu), "--sigma", "2",
                                "--format", "csv"],
                               capture_output=True, text=True, check=True).stdout
        fitted = subprocess.run([sys.executable, "-m", "glzeta.cli", "fit", "--data", "-",
                                 "--fix", "N=1,a=1,b=1,s=1,r=1", "--restarts", "2"],
                                input=draws, capture_output=True, text=True, check=True).stdout
        est = json.loads(fitted)["estimates"]
        var = mean_cov(preset("logistic"), LocationScale([mu], [[2.0]])).covariance[0, 0]
        assert abs(est["mu"] - mu) < 3 * math.sqrt(var / count)
        assert est["sigma2"] == pytest.approx(2.0, rel=0.05)

    def test_gof(self, capsys):
        doc = invoke_json(capsys, "gof", "--preset", "normal", "--data", "table1", "--mu", "3.0593",
                          "--sigma2", "0.7588", "--free-count", "2")
        assert doc["aic"] == pytest.approx(4 - 2 * doc["log_likelihood"], abs=1e-12)
        assert 0 < doc["ks_p_value"] <= 1


class TestReports:
    def test_moments(self, capsys):
        doc = invoke_json(capsys, "moments", "--preset", "normal", "--n", "2", "--product", "2,2")
        np.testing.assert_allclose(doc["covariance"], np.eye(2), rtol=1e-12)

    def test_cf(self, capsys):
        doc = invoke_json(capsys, "cf", "--preset", "normal", "--n", "2", "--t", "0,0", "--t", "0.6,0.8")
        assert doc[0][1] == 1.0
        assert doc[1][1] == pytest.approx(math.exp(-0.5), abs=1e-10)
        doc = invoke_json(capsys, "cf", "--preset", "logistic", "--t-range", "0,2,3")
        assert doc[1][1] == pytest.approx(0.65949211900299492905, rel=1e-9)

    def test_marginal(self, capsys):
        doc = invoke_json(capsys, "marginal", "--preset", "logistic", "--n", "3", "--m", "1",
                          "--range", "0.5,1.5", "--steps", "3", "--method", "series")
        assert [row[0] for row in doc["generator_samples"]] == [0.5, 1.0, 1.5]
        assert doc["method"] == "series"

    def test_conditional(self, capsys):
        doc = invoke_json(capsys, "conditional", "--preset", "logistic", "--n", "2", "--m", "1",
                          "--given", "1.0", "--sigma", "1,0.5;0.5,1")
        assert doc["mu"] == pytest.approx([0.5], rel=1e-14)
        np.testing.assert_allclose(doc["sigma"], [[0.75]], rtol=1e-14)

    def test_dependence_csv(self, capsys):
        code, out, _ = invoke(capsys, "dependence", "--rho", "0.0", "--steps", "3")
        header, rows = read_csv(out)
        assert code == EXIT_OK and header == ["x", "y", "H"]
        assert np.all(rows[:, 2] == 0)

    def test_grid(self, capsys):
        code, out, _ = invoke(capsys, "grid", "--preset", "logistic", "--rho", "0.5", "--steps", "5")
        header, rows = read_csv(out)
        assert header == ["x", "y", "pdf"] and rows.shape == (25, 3) and np.all(rows[:, 2] >= 0)
        centre = rows[(rows[:, 0] == 0) & (rows[:, 1] == 0), 2][0]
        expected = normalizing_constant(preset("logistic"), 2) / math.sqrt(0.75) * 0.25
        assert centre == pytest.approx(expected, rel=1e-12)

    def test_grid_symmetric_at_zero_rho(self, capsys):
        _, out, _ = invoke(capsys, "grid", "--preset", "logistic", "--rho", "0", "--steps", "7")
        _, rows = read_csv(out)
        table = rows[:, 2].reshape(7, 7)
        np.testing.assert_allclose(table, table.T, rtol=1e-14)
