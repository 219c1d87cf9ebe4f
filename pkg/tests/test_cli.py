import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vdfap.cli import COMMANDS, RunManifest, main, manifest_from_args, parse_grid
from vdfap.errors import ParameterError
from vdfap.sampling import read_batch


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def error_payload(err):
    payload = json.loads(err.strip().splitlines()[-1])
    assert set(payload) == {"code", "message", "context"}
    return payload


class TestCommands:
    def test_pdf(self, capsys):
        code, out, _ = run_cli(capsys, "pdf", "--u", -1, "--lambda", 1, "--x", "0,0")
        assert code == 0
        header, row = out.splitlines()
        assert header == "x1,x2,pdf"
        assert float(row.split(",")[-1]) == pytest.approx(1 / math.pi, rel=1e-14)

    def test_cf_infers_dimension(self, capsys):
        code, out, _ = run_cli(capsys, "cf", "--u", -1, "--lambda", 1, "--omega", "1")
        assert code == 0
        assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(math.exp(1 - math.sqrt(2)))

    def test_moments_json(self, capsys):
        code, out, _ = run_cli(capsys, "moments", "--u", -2, "--lambda", 3, "--format", "json")
        assert code == 0
        assert json.loads(out) == {"mean": [0.0, 0.0], "covariance": [[1.5, 0.0], [0.0, 1.5]]}

    def test_entropy_bits(self, capsys):
        _, nats, _ = run_cli(capsys, "entropy", "--u", -1, "--lambda", 1)
        _, bits, _ = run_cli(capsys, "entropy", "--u", -1, "--lambda", 1, "--units", "bits")
        assert bits.splitlines()[0].endswith("entropy_bits")
        vn = float(nats.splitlines()[1].split(",")[-1])
        vb = float(bits.splitlines()[1].split(",")[-1])
        assert vb == pytest.approx(vn / math.log(2), rel=1e-15)

    def test_bounds(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--u", -1, "--lambda", 1, "--sigma", "1,0,0,1")
        assert code == 0
        header, row = out.splitlines()
        assert header == "u,lambda,sigma_min,lower_nats,upper_nats"
        vals = [float(v) for v in row.split(",")]
        assert vals[3] == pytest.approx(0.7647385022743874, abs=1e-14)
        assert vals[4] == pytest.approx(0.8140078312012503, abs=1e-14)

    def test_sweep_is_byte_identical(self, capsys, tmp_path):
        args = ["sweep", "--sigma", "2,0.3,0.3,1", "--grid-u=-10:-0.1:6log", "--grid-lambda", "0.1:10:5log"]
        for name in ("a.csv", "b.csv"):
            assert run_cli(capsys, *args, "--out", tmp_path / name)[0] == 0
        a, b = ((tmp_path / n).read_bytes() for n in ("a.csv", "b.csv"))
        assert a == b
        assert len(a.decode().splitlines()) == 31

    def test_sweep_json_bits(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep", "--sigma", "1,0,0,1", "--grid-u=-2:-1:2", "--grid-lambda", "1:1:1",
            "--format", "json", "--units", "bits",
        )
        rows = json.loads(out)
        assert code == 0 and len(rows) == 2
        assert set(rows[0]) == {"u", "lambda", "sigma_min", "lower_bits", "upper_bits"}

    @pytest.mark.parametrize("extra", [[], ["--dt", "0.005"]])
    def test_sample(self, capsys, tmp_path, extra):
        path = tmp_path / "s.csv"
        code, out, _ = run_cli(capsys, "sample", "--u", -1, "--lambda", 1, "--dim", 1, "--n", 300, "--seed", 5, "--out", path, *extra)
        assert code == 0 and "wrote" in out
        b = read_batch(path)
        assert b.dim == 1 and b.seed == 5
        assert b.method.value == ("EulerMaruyama" if extra else "ExactMixture")
        assert not list(tmp_path.glob(".*"))

    def test_validate_single_suite(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "--suite", "cauchy")
        assert code == 0
        assert json.loads(out)[0]["test"] == "cauchy_limit"

    def test_mi(self, capsys):
        code, out, _ = run_cli(capsys, "mi", "--u", -1, "--lambda", 1, "--lambda-in", 1, "--n", 20000, "--format", "json")
        row = json.loads(out)[0]
        assert code == 0
        assert abs(row["mi_nats"] - row["closed_form_nats"]) < 0.06


class TestErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["pdf", "--u", "1", "--lambda", "1", "--x", "0,0"],
            ["pdf", "--u", "-1", "--lambda", "1"],
            ["pdf", "--u", "-1", "--lambda", "1", "--dim", "3", "--x", "0,0,0"],
            ["cf", "--u", "-1", "--lambda", "1", "--omega", "1,x"],
            ["bounds", "--u", "-1", "--lambda", "1", "--sigma", "1,0,0,1", "--dim", "1"],
            ["bounds", "--u", "-1", "--lambda", "1", "--sigma", "1,2,2,1"],
            ["sweep", "--sigma", "1,0,0,1", "--grid-u", "-1:-2", "--grid-lambda", "1:2:2"],
            ["sample", "--u", "-1", "--lambda", "1", "--n", "10"],
            ["sample", "--u", "-1", "--lambda", "1", "--n", "10", "--dt", "0.5", "--out", "x.csv"],
            ["validate", "--suite", "nope"],
            ["frobnicate"],
            ["pdf", "--units", "hartleys"],
        ],
    )
    def test_parameter_errors_exit_2(self, capsys, argv):
        code, out, err = run_cli(capsys, *argv)
        assert code == 2
        assert out == ""
        assert error_payload(err)["code"] == 2

    def test_context_reports_params(self, capsys):
        _, _, err = run_cli(capsys, "entropy", "--u", "0.5", "--lambda", "1")
        ctx = error_payload(err)["context"]
        assert ctx["command"] == "entropy" and ctx["params"]["u"] == 0.5

    def test_io_error_exit_4(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run_cli(capsys, "entropy", "--u", -1, "--lambda", 1, "--out", blocker / "sub" / "o.csv")
        assert code == 4 and error_payload(err)["code"] == 4

    def test_no_partial_file_on_failure(self, capsys, tmp_path):
        path = tmp_path / "o.csv"
        run_cli(capsys, "bounds", "--u", 1, "--lambda", 1, "--sigma", "1,0,0,1", "--out", path)
        assert not path.exists()


class TestManifest:
    @given(
        st.sampled_from(COMMANDS),
        st.dictionaries(st.sampled_from(["u", "lambda", "n", "seed", "sigma"]), st.integers() | st.floats(allow_nan=False) | st.text()),
        st.none() | st.text(min_size=1),
        st.sampled_from(["csv", "json"]),
        st.sampled_from(["nats", "bits"]),
    )
    def test_json_round_trip(self, command, params, out, fmt, units):
        m = RunManifest(command, params, out, fmt, units)
        assert RunManifest.from_json(m.to_json()) == m

    def test_from_args(self):
        m = manifest_from_args(["bounds", "--u", "-1", "--lambda", "2", "--sigma", "1,0,0,1", "--units", "bits"])
        assert m.params == {"u": -1.0, "lambda": 2.0, "sigma": "1,0,0,1"}
        assert (m.command, m.units, m.format, m.output_path) == ("bounds", "bits", "csv", None)

    @pytest.mark.parametrize("field, value", [("command", "x"), ("format", "xml"), ("units", "bits2")])
    def test_invalid(self, field, value):
        kwargs = {"command": "pdf", field: value}
        with pytest.raises(ParameterError):
            RunManifest(**kwargs)


class TestGrid:
    def test_linear(self):
        assert parse_grid("0:1:5", "g") == [0.0, 0.25, 0.5, 0.75, 1.0]

    @pytest.mark.parametrize("grid", ["0.1:10:3log", "0.1:10:3:log"])
    def test_log(self, grid):
        np.testing.assert_allclose(parse_grid(grid, "g"), [0.1, 1.0, 10.0])

    def test_single(self):
        assert parse_grid("-3:5:1", "g") == [-3.0]

    @pytest.mark.parametrize("grid", ["1:2", "a:b:3", "1:2:0", "-1:1:3log", "1:inf:3"])
    def test_invalid(self, grid):
        with pytest.raises(ParameterError):
            parse_grid(grid, "g")


def test_console_script():
    res = subprocess.run(
        [sys.executable, "-m", "vdfap.cli", "cf", "--u", "-1", "--lambda", "1", "--omega", "0,0"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[1] == "0,0,1"
