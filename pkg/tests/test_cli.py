import io
import json
import math
import os
import subprocess
import sys

import mpmath
import numpy as np
import pytest

from entromax.cli import RunConfig, run
from entromax.errors import ValidationError


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, (json.loads(out.getvalue()) if out.getvalue() else None), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)
    return write


def mat(M):
    M = np.asarray(M, dtype=float)
    return {"n": M.shape[0], "re": M.tolist()}


class TestEval:
    def test_zero(self, files):
        code, out, _ = call(["eval", "--manifold", "pk", "--k", "1", "--y", files("z.json", [0.0, 0.0])])
        assert code == 0
        assert float(out["E"]) == 0.0
        assert [float(g) for g in out["grad"]] == [-0.5, -0.5]

    def test_gradient_in_input_order(self, files):
        code, out, _ = call(["eval", "--manifold", "pk", "--k", "1", "--y", files("y.json", [0.0, 1.0])])
        g = [float(v) for v in out["grad"]]
        assert g[1] > g[0]          # larger weight, smaller mass
        assert sum(g) == pytest.approx(-1, abs=1e-15)

    def test_matrix_input(self, files):
        Y = {"n": 2, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}
        code, out, _ = call(["eval", "--manifold", "pk", "--k", "1", "--y", files("m.json", Y)])
        G = np.array(out["grad"]["re"])
        assert code == 0 and np.trace(G) == pytest.approx(-1)

    def test_v1(self, files):
        code, out, _ = call(["eval", "--manifold", "v1", "--y", files("i.json", mat(np.eye(2)))])
        assert abs(mpmath.mpf(out["E"]) - mpmath.log(mpmath.pi)) < 1e-15

    def test_v1_not_pd(self, files):
        code, out, _ = call(["eval", "--manifold", "v1", "--y", files("d.json", mat(np.diag([0.0, 1.0])))])
        assert code == 0 and out["E"] == "Infinity" and out["grad"] is None

    def test_decimal_round_trip(self, files):
        code, out, _ = call(["eval", "--manifold", "pk", "--k", "2", "--y", files("y.json", [1.0, 0.5, 0.0])])
        from entromax.precision import from_decimal, to_decimal
        assert to_decimal(from_decimal(out["E"], 256), 256) == out["E"]

    def test_env_precision(self, files):
        y = files("y.json", [1.0, 0.0])
        env = dict(os.environ, ENTROMAX_PRECISION="64")
        r = subprocess.run([sys.executable, "-m", "entromax.cli", "eval", "--manifold", "pk",
                            "--k", "1", "--y", y], env=env, capture_output=True, text=True)
        short = json.loads(r.stdout)["E"]
        _, out, _ = call(["eval", "--manifold", "pk", "--k", "1", "--y", y])
        assert r.returncode == 0 and len(short) < len(out["E"])


class TestOtherCommands:
    def test_entropy_mixed(self, files):
        code, out, _ = call(["entropy", "--rho", files("r.json", mat(np.eye(2) / 2)), "--eps", "1e-6"])
        assert code == 0 and abs(float(out["H_b"])) <= 1e-6

    def test_gw(self, files, frozen):
        code, out, _ = call(["gw", "--a", files("a.json", mat(np.eye(2)))])
        assert np.allclose(out["Y_star"]["re"], 0.5 * np.eye(2))
        # E(I/2) = log pi - (1/2) log det(I/2) = log(2 pi)
        assert abs(float(out["E"]) - frozen["log_2pi"]) < 1e-15

    def test_bound(self, frozen):
        code, out, _ = call(["bound", "--n", "2", "--k", "1", "--eta", "0.1"])
        assert out["R"] == pytest.approx(frozen["bound_pk_2_1_01"], rel=1e-15)

    def test_solve(self, files, tmp_path):
        trace = tmp_path / "t.jsonl"
        code, out, _ = call(["--trace", str(trace), "solve", "--marginal",
                             files("a.json", mat(np.diag([0.7, 0.3]))), "--k", "1", "--eps", "1e-6"])
        assert code == 0 and out["converged"]
        assert trace.read_text().count("\n") == out["iterations"]

    def test_sample_byte_identical(self, files, tmp_path):
        y = files("y.json", [2.0, 1.0, 0.0])
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert call(["sample", "--y", y, "--n", "20", "--seed", "3", "--out", str(a)])[0] == 0
        assert call(["sample", "--y", y, "--n", "20", "--seed", "3", "--out", str(b)])[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 20

    def test_stdout_byte_identical(self, files):
        y = files("y.json", [1.0, -2.0, 0.5])
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            run(["eval", "--manifold", "pk", "--k", "2", "--y", y], buf, io.StringIO())
            outs.append(buf.getvalue())
        assert outs[0] == outs[1]


class TestExitCodes:
    def test_unknown_command(self):
        code, _, err = call(["frobnicate"])
        assert code == 1 and err.startswith("entromax:")

    def test_unknown_flag(self, files):
        assert call(["bound", "--n", "2", "--k", "1", "--eta", "0.1", "--bogus"])[0] == 1

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        code, _, err = call(["eval", "--manifold", "pk", "--k", "1", "--y", str(p)])
        assert code == 1 and "invalid JSON" in err

    def test_missing_file(self):
        assert call(["eval", "--manifold", "pk", "--k", "1", "--y", "/nonexistent.json"])[0] == 1

    def test_interiority(self, files):
        code, _, err = call(["solve", "--marginal", files("a.json", mat(np.eye(2))), "--k", "1"])
        assert code == 3 and "not in the interior" in err

    def test_low_precision(self, files):
        assert call(["--precision", "32", "bound", "--n", "2", "--k", "1", "--eta", "0.1"])[0] == 1

    def test_numeric_instability(self, files, monkeypatch):
        from entromax import cli
        from entromax.errors import NumericInstabilityError

        def boom(*args, **kwargs):
            raise NumericInstabilityError("forced")
        monkeypatch.setattr(cli, "eval_and_grad_Ek", boom)
        code, _, err = call(["eval", "--manifold", "pk", "--k", "1", "--y", files("y.json", [1.0, 0.0])])
        assert code == 2 and "instability" in err


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert (cfg.precision_bits, cfg.cluster_tol, cfg.epsilon, cfg.seed) == (256, 1e-9, 1e-6, 0)

    @pytest.mark.parametrize("kw", [{"precision_bits": 32}, {"epsilon": 0.0}, {"seed": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            RunConfig(**kw)
