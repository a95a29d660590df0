import json

import numpy as np
import pytest

from bpfail import io
from bpfail.cli import main


class TestIO:
    def test_matrix_round_trip(self, tmp_path, rng):
        M = rng.standard_normal((3, 4))
        io.write_matrix(tmp_path / "M.csv", M)
        np.testing.assert_array_equal(io.read_matrix(tmp_path / "M.csv"), M)

    def test_ragged(self, tmp_path):
        (tmp_path / "r.csv").write_text("1,2\n3\n")
        with pytest.raises(ValueError, match="columns"):
            io.read_matrix(tmp_path / "r.csv")

    def test_non_numeric(self, tmp_path):
        (tmp_path / "r.csv").write_text("1,x\n")
        with pytest.raises(ValueError, match="non-numeric"):
            io.read_matrix(tmp_path / "r.csv")

    def test_vector_shape(self, tmp_path):
        (tmp_path / "v.csv").write_text("1\n2\n3\n")
        np.testing.assert_array_equal(io.read_vector(tmp_path / "v.csv"), [1, 2, 3])
        (tmp_path / "m.csv").write_text("1,2\n3,4\n")
        with pytest.raises(ValueError):
            io.read_vector(tmp_path / "m.csv")

    def test_json_deterministic(self):
        obj = {"b": np.float64(0.1), "a": [1, np.int64(2)], "c": float("nan"), "d": np.array([1 / 3])}
        text = io.dumps(obj)
        assert text == io.dumps(dict(reversed(list(obj.items()))))
        data = json.loads(text)
        assert list(data) == ["a", "b", "c", "d"]
        assert data["c"] is None
        assert "0.10000000000000001" in text
        assert data["d"][0] == 1 / 3

    def test_pairs(self, tmp_path):
        io.write_pairs(tmp_path / "p.txt", [0.5, 2.0])
        assert (tmp_path / "p.txt").read_text() == "1 0.5\n2 2\n"


def _run(args, tmp_path):
    return main([*args, "--out", str(tmp_path)])


class TestCli:
    def test_gen_ctrb(self, tmp_path):
        assert _run(["gen", "ctrb", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "50"], tmp_path) == 0
        assert io.read_matrix(tmp_path / "V.csv").shape == (5, 50)

    def test_gen_bernstein(self, tmp_path):
        assert _run(["gen", "bernstein", "--degree", "10", "--points", "0.1,0.2,0.3,0.4"], tmp_path) == 0
        assert io.read_matrix(tmp_path / "V.csv").shape == (4, 11)

    def test_gen_fuel(self, tmp_path):
        args = ["gen", "fuel", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "40", "--impulse", "0:+1,9:-1"]
        assert _run(args, tmp_path) == 0
        inst = json.loads((tmp_path / "instance.json").read_text())
        np.testing.assert_allclose(inst["xi"], [8.0632, 33.9728, 163.7151, 1022, 9534.2432], atol=1e-3)
        assert inst["time_of_column"]["40"] == 0

    def test_gen_hankel_and_page(self, tmp_path):
        assert _run(["gen", "hankel", "--poles", "0.8,0.5,0.1", "--M", "5", "--N", "20"], tmp_path) == 0
        assert io.read_matrix(tmp_path / "V.csv").shape == (5, 20)
        io.write_matrix(tmp_path / "g.csv", np.arange(1.0, 7.0)[None])
        assert _run(["gen", "page", "--g", str(tmp_path / "g.csv"), "--M", "2"], tmp_path) == 0
        np.testing.assert_array_equal(io.read_matrix(tmp_path / "V.csv"), [[1, 3, 5], [2, 4, 6]])

    def test_certify_fig2(self, tmp_path, capsys):
        _run(["gen", "ctrb", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "50"], tmp_path)
        assert _run(["certify", str(tmp_path / "V.csv")], tmp_path) == 0
        rep = json.loads((tmp_path / "certificate.json").read_text())
        assert rep["certificate"]["critical_index"] == 36
        assert rep["certificate"]["route"] == "thm_unimodal_bisection"
        lines = (tmp_path / "p.txt").read_text().splitlines()
        assert len(lines) == 50 and lines[0].split()[0] == "1"

    def test_certify_slow_system(self, tmp_path):
        _run(["gen", "ctrb", "--diag", "0.98,0.97,0.96,0.95,0.94", "--N", "500"], tmp_path)
        assert _run(["certify", str(tmp_path / "V.csv"), "--no-bisection"], tmp_path) == 0
        rep = json.loads((tmp_path / "certificate.json").read_text())
        assert rep["certificate"]["failure_indices"] == []

    def test_certify_image_condition(self, tmp_path):
        io.write_matrix(tmp_path / "bad.csv", [[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        assert _run(["certify", str(tmp_path / "bad.csv")], tmp_path) == 2
        assert json.loads((tmp_path / "certificate.json").read_text())["error"] == "image_condition"

    def test_solve_fig1(self, tmp_path):
        args = ["gen", "fuel", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "40", "--impulse", "0:+1,9:-1"]
        _run(args, tmp_path)
        V, y = str(tmp_path / "V.csv"), str(tmp_path / "y.csv")
        assert _run(["solve-bp", V, y], tmp_path) == 0
        bp = json.loads((tmp_path / "bp.json").read_text())
        assert 3 <= len(bp["support"]) <= 5
        assert _run(["solve-l0", V, y, "--max-card", "2"], tmp_path) == 0
        l0 = json.loads((tmp_path / "l0.json").read_text())
        assert l0["min_cardinality"] == 2 and l0["exhaustive"] and l0["count"] == 1
        assert (tmp_path / "l0.txt").read_text().count("\n") == 40

    def test_solve_zero_and_square(self, tmp_path):
        io.write_matrix(tmp_path / "V.csv", [[2.0, 1.0], [1.0, 3.0]])
        io.write_matrix(tmp_path / "y0.csv", [[0.0], [0.0]])
        io.write_matrix(tmp_path / "y.csv", [[3.0], [4.0]])
        for y in ("y0.csv", "y.csv"):
            assert _run(["solve-bp", str(tmp_path / "V.csv"), str(tmp_path / y)], tmp_path) == 0
            bp = json.loads((tmp_path / "bp.json").read_text())
            assert _run(["solve-l0", str(tmp_path / "V.csv"), str(tmp_path / y)], tmp_path) == 0
            l0 = json.loads((tmp_path / "l0.json").read_text())
            np.testing.assert_allclose(bp["u"], l0["solutions"][0]["u"], atol=1e-12)

    def test_infeasible(self, tmp_path):
        io.write_matrix(tmp_path / "V.csv", [[1.0, 1.0], [1.0, 1.0]])
        io.write_matrix(tmp_path / "y.csv", [[1.0], [2.0]])
        assert _run(["solve-bp", str(tmp_path / "V.csv"), str(tmp_path / "y.csv")], tmp_path) == 3
        assert _run(["solve-l0", str(tmp_path / "V.csv"), str(tmp_path / "y.csv")], tmp_path) == 3

    def test_check(self, tmp_path):
        _run(["gen", "ctrb", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "50"], tmp_path)
        assert _run(["check", str(tmp_path / "V.csv"), "--order", "5", "--strict"], tmp_path) == 0
        rep = json.loads((tmp_path / "structure.json").read_text())
        assert rep["holds"] is True and rep["property"] == "SSC"

    def test_usage_errors(self, tmp_path):
        assert _run(["gen", "ctrb", "--N", "5"], tmp_path) == 1
        with pytest.raises(SystemExit) as exc:
            main(["certify", "x.csv", "--p-tol", "-1"])
        assert exc.value.code == 1
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1
        assert _run(["repro", "nope"], tmp_path) == 1

    def test_env_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BPFAIL_OUT", str(tmp_path / "env"))
        assert main(["gen", "ctrb", "--diag", "0.5", "--N", "3"]) == 0
        assert (tmp_path / "env" / "V.csv").exists()

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            _run(["gen", "ctrb", "--diag", "0.8,0.7,0.6,0.5,0.4", "--N", "50"], d)
            _run(["certify", str(d / "V.csv")], d)
        assert (a / "certificate.json").read_bytes() == (b / "certificate.json").read_bytes()
