import json

import numpy as np
import pytest

from annulus_cert.cli import main
from annulus_cert.io import load_matrix, matrix_from_dict, matrix_to_dict, save_matrix
from annulus_cert.errors import ContractViolationError
from annulus_cert.generators import random_normal_annulus
from annulus_cert.misra import jordan_block, misra_threshold
from annulus_cert.pencil import AnnulusParams

AP5 = AnnulusParams(0.5)


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, matrix):
        path = tmp_path / f"{name}.json"
        save_matrix(matrix, path)
        paths[name] = str(path)
        return str(path)

    put("eye", np.eye(3))
    put("shrunk", np.diag([0.1 + 0j]))
    w = 0.7
    th = misra_threshold(w, 0.5)
    put("t", np.array([[w]]))
    put("x_small", np.array([[0.5 * th]]))
    # near the inner circle the sampler finds violating functions reliably
    put("bad", jordan_block(0.55, 1.5 * misra_threshold(0.55, 0.5)))
    paths["tmp"] = tmp_path
    return paths


class TestMatrixFiles:
    def test_round_trip_bit_identical(self, tmp_path):
        t = random_normal_annulus(4, AP5, seed=12)
        path = tmp_path / "m.json"
        save_matrix(t, path)
        first = path.read_text()
        again = load_matrix(path)
        save_matrix(again, path)
        assert path.read_text() == first
        assert np.array_equal(t, again)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ContractViolationError):
            matrix_from_dict({"n": 2, "data": [[1.0, 0.0]] * 3})

    def test_non_finite_rejected(self):
        with pytest.raises(ContractViolationError):
            matrix_from_dict({"n": 1, "data": [[float("inf"), 0.0]]})

    def test_string_forms_rejected(self):
        with pytest.raises(ContractViolationError):
            matrix_from_dict({"n": 1, "data": [["1+2j", 0.0]]})

    def test_dict_round_trip(self):
        m = np.array([[0.5 + 0.25j]])
        assert np.array_equal(matrix_from_dict(matrix_to_dict(m)), m)


class TestCertifyCommand:
    def test_unitary_exit_zero(self, files, capsys):
        code = main(["certify", "--matrix", files["eye"], "--r", "0.5"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        assert doc["verdict"] == "certified"
        assert doc["records"]

    def test_spectrum_refuted_exit_one(self, files, capsys):
        code = main(["certify", "--matrix", files["shrunk"], "--r", "0.5"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 1
        assert doc["spectrum_ok"] is False

    def test_misra_refuted_with_worst_point(self, files, tmp_path):
        out = str(tmp_path / "cert.json")
        code = main(["certify", "--matrix", files["bad"], "--r", "0.5", "--out", out])
        assert code == 1
        doc = json.loads(open(out).read())
        assert doc["worst"] is not None

    def test_custom_grid_flags(self, files, capsys):
        code = main([
            "certify", "--matrix", files["eye"], "--r", "0.5",
            "--eps", "0.5,0.25", "--alphas", "8",
        ])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        assert len(doc["records"]) == 16

    def test_missing_file_usage_error(self, files):
        assert main(["certify", "--matrix", "nope.json", "--r", "0.5"]) == 64

    def test_bad_r_usage_error(self, files, capsys):
        assert main(["certify", "--matrix", files["eye"], "--r", "1.5"]) == 64

    def test_malformed_json_usage_error(self, files, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text("{not json")
        assert main(["certify", "--matrix", str(bad), "--r", "0.5"]) == 64

    def test_threads_env_override(self, files, capsys, monkeypatch):
        monkeypatch.setenv("ANNULUS_CERT_THREADS", "2")
        code = main(["certify", "--matrix", files["eye"], "--r", "0.5", "--threads", "1"])
        assert code == 0

    def test_bad_threads_env(self, files, monkeypatch):
        monkeypatch.setenv("ANNULUS_CERT_THREADS", "lots")
        assert main(["certify", "--matrix", files["eye"], "--r", "0.5"]) == 64


class TestBlockCommand:
    def test_tx_zero_block_diagonal(self, files, tmp_path):
        zero = str(tmp_path / "zero.json")
        save_matrix(np.zeros((1, 1)), zero)
        out = str(tmp_path / "blk.json")
        code = main(["block", "--kind", "tx", "--t1", files["t"], "--x", zero, "--out", out])
        assert code == 0
        block = load_matrix(out)
        assert block.shape == (2, 2)
        assert block[0, 1] == 0.0

    def test_written_block_reparses_bit_identically(self, files, tmp_path):
        out = tmp_path / "blk.json"
        main(["block", "--kind", "tx", "--t1", files["t"], "--x", files["x_small"], "--out", str(out)])
        text = out.read_text()
        save_matrix(load_matrix(out), out)
        assert out.read_text() == text

    def test_hat_equal_diagonals(self, files, tmp_path):
        out = str(tmp_path / "blk.json")
        code = main([
            "block", "--kind", "hat", "--t1", files["t"], "--t2", files["t"],
            "--x", files["x_small"], "--out", out,
        ])
        assert code == 0
        assert abs(load_matrix(out)[0, 1]) == 0.0

    def test_general_matches_hat(self, files, tmp_path):
        t1 = str(tmp_path / "t1.json"); save_matrix(np.diag([0.6, 0.8]), t1)
        t2 = str(tmp_path / "t2.json"); save_matrix(np.diag([0.7, 0.9]), t2)
        x = str(tmp_path / "x.json"); save_matrix(np.diag([0.2, 0.1]), x)
        y = str(tmp_path / "y.json")
        save_matrix(np.diag([0.2, 0.1]) @ (np.diag([0.6, 0.8]) - np.diag([0.7, 0.9])), y)
        hat_out = str(tmp_path / "hat.json")
        gen_out = str(tmp_path / "gen.json")
        assert main(["block", "--kind", "hat", "--t1", t1, "--t2", t2, "--x", x, "--out", hat_out]) == 0
        assert main(["block", "--kind", "general", "--t1", t1, "--t2", t2, "--x", y, "--out", gen_out]) == 0
        assert np.array_equal(load_matrix(hat_out), load_matrix(gen_out))

    def test_general_singular_difference_warns(self, files, tmp_path, capsys):
        out = str(tmp_path / "blk.json")
        code = main([
            "block", "--kind", "general", "--t1", files["t"], "--t2", files["t"],
            "--x", files["x_small"], "--out", out,
        ])
        assert code == 0
        assert "singular" in capsys.readouterr().err

    def test_commutation_violation_exit_65(self, tmp_path):
        t = str(tmp_path / "t.json"); save_matrix(np.array([[0.6, 0.1], [0.0, 0.6]]), t)
        x = str(tmp_path / "x.json"); save_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]), x)
        out = str(tmp_path / "o.json")
        assert main(["block", "--kind", "tx", "--t1", t, "--x", x, "--out", out]) == 65


class TestOtherCommands:
    def test_factor_identity_weights(self, files, tmp_path, capsys):
        half = str(tmp_path / "half.json")
        save_matrix(0.5 * np.eye(3), half)
        eye = str(tmp_path / "eye3.json")
        save_matrix(np.eye(3), eye)
        code = main(["factor", "--p", eye, "--q", eye, "--rmat", half])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        assert doc["verdict"] is True
        assert doc["k_norm"] == pytest.approx(0.5, abs=1e-12)

    def test_factor_failure_exit_one(self, files, tmp_path, capsys):
        eye = str(tmp_path / "eye3.json"); save_matrix(np.eye(3), eye)
        big = str(tmp_path / "big.json"); save_matrix(2.0 * np.eye(3), big)
        assert main(["factor", "--p", eye, "--q", eye, "--rmat", big]) == 1

    def test_misra_prints_threshold(self, capsys):
        code = main(["misra", "--r", "0.25", "--w", "0.5,0"])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert float(out) == pytest.approx(misra_threshold(0.5, 0.25), rel=1e-12)

    def test_misra_bad_w_usage(self, capsys):
        assert main(["misra", "--r", "0.25", "--w", "0.1,0"]) == 64

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--r", "0.5", "--samples", "3", "--seed", "1", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "w_re,w_im,r,threshold_kernel,threshold_pencil,rel_gap"
        assert len(lines) == 4
        for line in lines[1:]:
            assert float(line.split(",")[-1]) <= 0.01

    def test_sweep_deterministic(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        main(["sweep", "--r", "0.5", "--samples", "2", "--seed", "3", "--out", str(a)])
        main(["sweep", "--r", "0.5", "--samples", "2", "--seed", "3", "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_vn_violation_exit_one(self, files, capsys):
        code = main(["vn", "--matrix", files["bad"], "--r", "0.5", "--count", "100", "--seed", "1"])
        doc = json.loads(capsys.readouterr().out)
        assert code == 1
        assert doc["violation"] is True
        assert doc["witness"] is not None

    def test_thm_block1_agreement(self, files, capsys):
        code = main([
            "thm", "--which", "block1", "--t1", files["t"], "--x", files["x_small"],
            "--r", "0.5",
        ])
        doc = json.loads(capsys.readouterr().out)
        assert code == 0
        assert doc["agree"] is True
        assert doc["factor_verdict"] is True
        assert doc["points"]
        point = doc["points"][0]
        assert {"eps", "alpha", "k_norm", "lambda_min", "residual"} <= set(point)
        assert point["lambda_min"] is not None

    def test_thm_block2_requires_t2(self, files):
        assert main([
            "thm", "--which", "block2", "--t1", files["t"], "--x", files["x_small"],
            "--r", "0.5",
        ]) == 64

    def test_usage_no_command(self):
        assert main([]) == 64
