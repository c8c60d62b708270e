import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from semiprox.cli import TABLE_HEADER, main
from semiprox.moreau import falpha_values
from semiprox.penalty import ABS, RELU, box_abs, spec_to_dict


@pytest.fixture
def spec_file(tmp_path):
    def write(spec_or_text, name="spec.json"):
        p = tmp_path / name
        text = spec_or_text if isinstance(spec_or_text, str) else json.dumps(spec_to_dict(spec_or_text))
        p.write_text(text)
        return str(p)

    return write


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def common(path, alpha, beta):
    return ["--spec", path, "--alpha", str(alpha), "--beta", str(beta)]


class TestEval:
    def test_zero_region(self, spec_file):
        code, text = run(["eval", *common(spec_file(ABS), 1, 4), "--x", "1.9"])
        assert code == 0
        rec = json.loads(text)
        assert rec["prox_semiconvex"] == "Single(0)"
        assert rec["case"] == "ConcaveCase"

    def test_relu_identity(self, spec_file):
        code, text = run(["eval", *common(spec_file(RELU), 2, 1), "--x", "-5"])
        assert code == 0
        assert json.loads(text)["prox_semiconvex"] == "Single(-5)"

    def test_inf_is_a_string(self, spec_file):
        code, text = run(["eval", *common(spec_file(box_abs(1.0)), 1, 1), "--x", "3"])
        rec = json.loads(text)
        assert code == 0 and rec["f"] == "inf" and rec["f_alpha"] == "inf"

    def test_malformed_json(self, spec_file, capsys):
        code, _ = run(["eval", *common(spec_file('{"a1": 0,'), 1, 1), "--x", "1"])
        assert code == 2
        assert "malformed" in capsys.readouterr().err

    def test_violated_field_is_named(self, spec_file, capsys):
        bad = '{"a1": -1, "a2": 0, "b1": -1, "b2": 1, "interval": null}'
        code, _ = run(["eval", *common(spec_file(bad), 1, 1), "--x", "1"])
        assert code == 2
        assert "a1 >= 0" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["eval", *common(str(tmp_path / "nope.json"), 1, 1), "--x", "1"])[0] == 2

    @pytest.mark.parametrize("alpha, beta, x", [(0, 1, 1), (1, -1, 1), (1, 1, "inf"), ("nan", 1, 1)])
    def test_bad_numerics(self, spec_file, alpha, beta, x):
        assert run(["eval", *common(spec_file(ABS), alpha, beta), "--x", str(x)])[0] == 3

    def test_usage_error(self):
        assert run(["eval"])[0] == 2


class TestTable:
    def test_plateau_and_shape(self, spec_file):
        code, text = run(["table", *common(spec_file(ABS), 1, 0.5), "--lo", "-3", "--hi", "3", "--n", "7"])
        assert code == 0
        assert "\r" not in text
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0]) == TABLE_HEADER
        assert len(rows) == 7
        assert float(rows[-1]["x"]) == 3.0 and float(rows[-1]["f_alpha"]) == 0.5
        xs = [float(r["x"]) for r in rows]
        assert xs == sorted(xs) and len(set(xs)) == 7

    def test_two_points_are_the_endpoints(self, spec_file):
        _, text = run(["table", *common(spec_file(ABS), 1, 1), "--lo", "-2", "--hi", "5", "--n", "2"])
        rows = list(csv.DictReader(io.StringIO(text)))
        assert [float(r["x"]) for r in rows] == [-2.0, 5.0]

    def test_inf_tokens_outside_interval(self, spec_file):
        _, text = run(["table", *common(spec_file(box_abs(1.0)), 1, 1), "--lo", "-3", "--hi", "3", "--n", "7"])
        rows = list(csv.DictReader(io.StringIO(text)))
        assert rows[0]["f"] == "inf" and rows[0]["f_alpha"] == "inf"
        assert rows[3]["f"] == "0.0"

    def test_set_valued_rows_are_flagged(self, spec_file):
        _, text = run(["table", *common(spec_file(ABS), 1, 4), "--lo", "-2", "--hi", "2", "--n", "5"])
        rows = list(csv.DictReader(io.StringIO(text)))
        flagged = [(float(r["x"]), r["prox_semi_lo"], r["prox_semi_hi"]) for r in rows if r["set_valued"] == "true"]
        assert flagged == [(-2.0, "-2.0", "0.0"), (2.0, "0.0", "2.0")]

    def test_round_trip_of_falpha(self, spec_file):
        spec = box_abs(2.0)
        _, text = run(["table", *common(spec_file(spec), 0.7, 1.3), "--lo", "-4", "--hi", "4", "--n", "301"])
        for r in csv.DictReader(io.StringIO(text)):
            want = float(falpha_values(spec, 0.7, float(r["x"])))
            got = float(r["f_alpha"])
            assert (got == want) if math.isinf(want) else abs(got - want) <= 1e-12

    @pytest.mark.parametrize("lo, hi, n", [(1, 1, 5), (2, 1, 5), (0, 1, 1)])
    def test_bad_range(self, spec_file, lo, hi, n):
        assert run(["table", *common(spec_file(ABS), 1, 1), "--lo", str(lo), "--hi", str(hi), "--n", str(n)])[0] == 3

    def test_deterministic(self, spec_file):
        args = ["table", *common(spec_file(ABS), 1, 2), "--lo", "-3", "--hi", "3", "--n", "31"]
        assert run(args) == run(args)


class TestCheck:
    def test_pass_concave(self, spec_file):
        code, text = run(["check", *common(spec_file(ABS), 1, 4), "--samples", "200", "--seed", "3"])
        assert code == 0 and text.strip().endswith("PASS")

    def test_pass_with_breakpoints(self, spec_file):
        code, text = run(["check", *common(spec_file(ABS), 2, 1), "--samples", "50"])
        assert code == 0
        assert "max deviation" in text

    def test_mismatch_exit_code(self, spec_file, monkeypatch):
        import semiprox.check as check
        from semiprox.prox import CaseTag, ProxResult

        monkeypatch.setattr(check, "prox_semiconvex", lambda *a: (ProxResult.single(7.0), CaseTag("Broken")))
        code, text = run(["check", *common(spec_file(ABS), 1, 1), "--samples", "3"])
        assert code == 1
        assert "MISMATCH x=" in text

    def test_corrupted_spec(self, spec_file):
        assert run(["check", *common(spec_file("not json"), 1, 1)])[0] == 2

    def test_samples_must_be_positive(self, spec_file):
        assert run(["check", *common(spec_file(ABS), 1, 1), "--samples", "0"])[0] == 3


class TestSolve:
    @pytest.fixture
    def data(self, tmp_path):
        def write(X, y, header=True):
            xp, yp = tmp_path / "X.csv", tmp_path / "y.csv"
            X, y = np.atleast_2d(X), np.asarray(y, dtype=float).reshape(-1, 1)
            np.savetxt(xp, X, delimiter=",", header=",".join(f"x{j}" for j in range(X.shape[1])) if header else "", comments="")
            np.savetxt(yp, y, delimiter=",", header="y" if header else "", comments="")
            return ["--X", str(xp), "--y", str(yp)]

        return write

    def test_identity_demo(self, spec_file, data):
        args = data(np.eye(5), [3, 0.5, 0, -3, 0.2])
        code, text = run(["solve", *common(spec_file(ABS), 1, 5), "--lambda", "0.1", *args])
        assert code == 0
        rep = json.loads(text)
        assert rep["support"] == [1, 4]
        assert rep["converged"] is True
        assert set(rep) == {"gamma_hat", "support", "iterations", "converged", "objective_trace"}

    def test_headerless_csv(self, spec_file, data):
        args = data(np.eye(3), [2, 0, 0], header=False)
        code, text = run(["solve", *common(spec_file(ABS), 1, 3), "--lambda", "0.1", *args])
        assert code == 0 and json.loads(text)["support"] == [1]

    def test_least_squares_support(self, spec_file, data):
        rng = np.random.default_rng(2)
        X, y = rng.standard_normal((20, 4)), rng.standard_normal(20)
        args = data(X, y)
        beta = 0.99 * X.shape[0] / np.linalg.eigvalsh(X.T @ X).max()
        code, text = run(["solve", *common(spec_file(ABS), 1, beta), "--lambda", "0", "--tol", "1e-14", *args])
        rep = json.loads(text)
        ls = np.linalg.lstsq(X, y, rcond=None)[0]
        np.testing.assert_allclose(rep["gamma_hat"], ls, atol=1e-6)
        assert rep["support"] == [j + 1 for j in range(4) if rep["gamma_hat"][j] != 0]

    def test_step_too_large(self, spec_file, data):
        args = data(np.eye(5), [3, 0.5, 0, -3, 0.2])
        assert run(["solve", *common(spec_file(ABS), 1, 1), "--lambda", "1", *args])[0] == 4

    def test_shape_mismatch(self, spec_file, data, tmp_path):
        args = data(np.eye(3), [1, 2, 3])
        (tmp_path / "y.csv").write_text("y\n1\n2\n")
        assert run(["solve", *common(spec_file(ABS), 1, 1), *args])[0] == 2

    def test_ragged_csv(self, spec_file, data, tmp_path):
        args = data(np.eye(2), [1, 2])
        (tmp_path / "X.csv").write_text("a,b\n1,0\n0\n")
        assert run(["solve", *common(spec_file(ABS), 1, 1), *args])[0] == 2


def test_module_entry_point(spec_file):
    proc = subprocess.run(
        [sys.executable, "-m", "semiprox", "eval", *common(spec_file(ABS), 2, 1), "--x", "1.5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["prox_semiconvex"] == "Single(1)"
