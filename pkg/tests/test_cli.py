import json
import subprocess
import sys

import pytest

from aligned_smm.cli import main
from aligned_smm.ffield import FieldMatrix, mat_mul
from aligned_smm.serialization import parse_matrix, write_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_optimize_rate_at_max_collusion(capsys):
    code, out, _ = run(capsys, "optimize-rate", "--n", "1000", "--ell", "499", "--json")
    assert code == 0
    res = json.loads(out)["results"][0]
    assert (res["r_A"], res["r_B"], res["rate"]) == (1, 1, "1/999")


def test_optimize_rate_theorem1(capsys):
    code, out, _ = run(capsys, "optimize-rate", "--n", "1000", "--ell", "10",
                       "--method", "theorem1", "--json")
    res = json.loads(out)["results"][0]
    assert code == 0 and (res["r_A"], res["r_B"], res["rate"]) == (90, 9, "810/999")


def test_optimize_rate_both_prints_gap(capsys):
    code, out, _ = run(capsys, "optimize-rate", "--n", "1000", "--ell", "10", "--method", "both")
    assert code == 0 and "additive gap" in out


def test_optimize_rate_too_small(capsys):
    code, _, err = run(capsys, "optimize-rate", "--n", "2", "--ell", "1")
    assert code != 0 and "NoFeasiblePartition" in err


def test_optimize_threshold(capsys):
    code, out, _ = run(capsys, "optimize-threshold", "--n", "100", "--ell", "1",
                       "--rth", "1/2", "--json")
    res = json.loads(out)["results"][0]
    assert code == 0 and (res["Q"], res["r_A"], res["r_B"]) == (8, 2, 2)
    code, out, _ = run(capsys, "optimize-threshold", "--n", "100", "--ell", "1",
                       "--rth", "1/3", "--json")
    assert json.loads(out)["results"][0]["Q"] == 3
    code, _, err = run(capsys, "optimize-threshold", "--n", "10", "--ell", "1", "--rth", "99/100")
    assert code != 0 and "InfeasibleRateThreshold" in err


def test_bad_rational_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["optimize-threshold", "--n", "10", "--ell", "1", "--rth", "half"])
    assert exc.value.code == 2


@pytest.fixture
def mats(tmp_path):
    A = FieldMatrix.random(4, 6, rng=1)
    B = FieldMatrix.random(6, 2, rng=2)
    write_matrix(tmp_path / "A.txt", A)
    write_matrix(tmp_path / "B.txt", B)
    return tmp_path, A, B


def test_roundtrip_identity(capsys, tmp_path):
    eye = FieldMatrix.identity(3)
    write_matrix(tmp_path / "I.txt", eye)
    code, out, err = run(capsys, "roundtrip", "--n", "3", "--ell", "1",
                         "--a", str(tmp_path / "I.txt"), "--b", str(tmp_path / "I.txt"))
    assert code == 0 and "VERIFIED" in err
    assert parse_matrix(out) == eye


def test_roundtrip_drop_N_minus_Q(capsys, mats):
    d, A, B = mats
    # r_A = 2, r_B = 2, l = 1: Q = 8 on N = 10, two stragglers
    code, out, err = run(capsys, "roundtrip", "--n", "10", "--ell", "1", "--ra", "2", "--rb", "2",
                         "--a", str(d / "A.txt"), "--b", str(d / "B.txt"), "--drop", "3,7",
                         "--shares-dir", str(d / "shares"), "--out", str(d / "C.txt"))
    assert code == 0 and "VERIFIED" in out
    assert parse_matrix((d / "C.txt").read_text()) == mat_mul(A, B)
    assert len(list((d / "shares").iterdir())) == 10


def test_roundtrip_drop_one_too_many(capsys, mats):
    d, _, _ = mats
    code, _, err = run(capsys, "roundtrip", "--n", "10", "--ell", "1", "--ra", "2", "--rb", "2",
                       "--a", str(d / "A.txt"), "--b", str(d / "B.txt"), "--drop", "1,2,3")
    assert code != 0 and "TooFewAnswers" in err


def test_roundtrip_q_mismatch(capsys, mats):
    d, _, _ = mats
    code, _, err = run(capsys, "roundtrip", "--n", "5", "--ell", "1", "--q", "101",
                       "--a", str(d / "A.txt"), "--b", str(d / "B.txt"))
    assert code != 0 and "does not match" in err


def test_sweeps(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep-rate", "--n", "30")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1 + 14 and lines[0].startswith("ell,")
    code, out, err = run(capsys, "sweep-gap", "--n", "30", "--out", str(tmp_path / "g.csv"))
    assert code == 0 and "max gap" in err
    assert (tmp_path / "g.csv").read_text().startswith("ell,")
    code, out, _ = run(capsys, "sweep-gap", "--n", "30", "--json")
    assert json.loads(out)["N"] == 30


def test_security_check(capsys):
    code, out, _ = run(capsys, "security-check", "--n", "9", "--ell", "3", "--ra", "2", "--rb", "1")
    doc = json.loads(out)
    assert code == 0 and doc["all_invertible"] and doc["subsets_checked"] == 84
    code, out, _ = run(capsys, "security-check", "--n", "40", "--ell", "5", "--mode", "sampled",
                       "--count", "10")
    assert code == 0 and json.loads(out)["subsets_checked"] == 10


def test_simulate(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--n", "6", "--ell", "1", "--ra", "2",
                       "--model", "fixed_slow_set", "--slow", "1")
    doc = json.loads(out)
    assert code == 0 and doc["responders_used"] == [2, 3, 4, 5, 6] and doc["decoded_ok"]
    cfg = tmp_path / "s.cfg"
    cfg.write_text("model=fixed_slow_set\nslow=1,2\n")
    code, out, _ = run(capsys, "simulate", "--n", "6", "--ell", "1", "--ra", "2",
                       "--config", str(cfg))
    doc = json.loads(out)
    assert code != 0 and doc["error"] == "TooFewAnswers"


def test_outputs_are_deterministic(capsys):
    argv = ["simulate", "--n", "12", "--ell", "1", "--ra", "2", "--rb", "3", "--p", "6",
            "--model", "exponential", "--mean", "2", "--seed", "4"]
    assert run(capsys, *argv) == run(capsys, *argv)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aligned_smm", "optimize-rate", "--n", "3",
                           "--ell", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "r_A=1 r_B=1 Q=3" in proc.stdout
