import csv
import math

import numpy as np
import pytest

from entpower.cli import main, read_kv
from entpower.search import InverseScanConfig, inverse_reach_fraction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_theorem_check_codes(capsys):
    code, out, _ = run(capsys, "theorem-check")
    assert code == 0
    assert "max deviation" in out and "FAIL" not in out
    assert run(capsys, "theorem-check", "--tol", "1e-30")[0] == 1
    assert run(capsys, "theorem-check", "--gamma-step", "0.5")[0] == 0
    assert run(capsys, "theorem-check", "--gamma-step", "-1")[0] == 2
    assert run(capsys, "theorem-check", "--bogus")[0] == 2


def test_gate_info(capsys):
    code, out, _ = run(capsys, "gate-info", "--alpha", "0.6pi,0.3pi,0.1pi")
    assert code == 0
    assert "canonical (0.2pi, 0.1pi, 0.1pi)" in out
    code, out, _ = run(capsys, "gate-info", "--alpha", "0,0,0")
    assert "G1 = 1+0i" in out and "G2 = 3" in out
    code, out, _ = run(capsys, "gate-info", "--alpha", "-0.25pi,0,0")
    assert code == 0 and "canonical (0.25pi, 0pi, 0pi)" in out
    assert run(capsys, "gate-info", "--alpha", "1,2")[0] == 2


def test_mems_info(capsys):
    code, out, _ = run(capsys, "mems-info", "--gamma", "1")
    assert code == 0 and "purity      = 1\n" in out and "eof         = 1\n" in out
    code, out, _ = run(capsys, "mems-info", "--gamma", "0.8")
    assert "eof         = 0.721928" in out
    code, out, _ = run(capsys, "mems-info", "--mu", "0.5555555556", "--rank", "2")
    assert code == 0 and "gamma       = 0.66666666" in out
    assert run(capsys, "mems-info", "--mu", "0.9", "--rank", "3")[0] == 2
    assert run(capsys, "mems-info", "--mu", "0.9")[0] == 2
    assert run(capsys, "mems-info", "--gamma", "0.5", "--mu", "0.5", "--rank", "3")[0] == 2


def test_ep_scan_csv_and_manifest(capsys, tmp_path):
    out = tmp_path / "ep.csv"
    code, _, _ = run(
        capsys, "ep-scan", "--gate", "0.125pi,0.125pi,0", "--mu-step", "0.05",
        "--samples", "30", "--out", str(out),
    )
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["mu", "ep", "n_samples"]
    mu = np.array([float(r[0]) for r in rows[1:]])
    ep = np.array([float(r[1]) for r in rows[1:]])
    from entpower.search import mems_eof_curve

    np.testing.assert_allclose(ep, mems_eof_curve(mu).ep, atol=1e-10)
    assert len(rows[1][1].replace(".", "").lstrip("0")) >= 12
    man = read_kv(str(out) + ".manifest")
    assert man["subcommand"] == "ep-scan"
    assert man["oracle_seeding"] == "on" and man["seed"] == "0"
    assert {"version", "duration_s", "samples_per_bin", "gate"} <= set(man)


def test_manifest_rerun_is_bitwise(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--mu-step", "0.05", "--samples", "25", "--oracle-seeding", "off", "--seed", "5"]
    assert run(capsys, "ep-scan", *args, "--out", str(a))[0] == 0
    monkeypatch.setenv("ENTPOWER_THREADS", "2")
    assert run(capsys, "ep-scan", "--config", str(a) + ".manifest", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    # flags override the config file
    c = tmp_path / "c.csv"
    assert run(capsys, "ep-scan", "--config", str(a) + ".manifest", "--seed", "6", "--out", str(c))[0] == 0
    assert a.read_bytes() != c.read_bytes()
    assert read_kv(str(c) + ".manifest")["seed"] == "6"


def test_ep_scan_zero_gate(capsys, tmp_path):
    out = tmp_path / "z.csv"
    assert run(capsys, "ep-scan", "--gate", "0,0,0", "--samples", "20", "--out", str(out))[0] == 0
    assert all(float(r[1]) == 0 for r in read_csv(out)[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["--gate", "1,2"],
        ["--source", "mixed"],
        ["--samples", "0"],
        ["--oracle-seeding", "maybe"],
        ["--threads", "0"],
        ["--config", "/nonexistent/file"],
    ],
)
def test_ep_scan_usage_errors_leave_no_files(capsys, tmp_path, argv):
    out = tmp_path / "bad.csv"
    assert run(capsys, "ep-scan", *argv, "--out", str(out))[0] == 2
    assert list(tmp_path.iterdir()) == []


def test_bad_config_key(capsys, tmp_path):
    conf = tmp_path / "c.txt"
    conf.write_text("# comment\nnot_a_key=1\n")
    assert run(capsys, "ep-scan", "--config", str(conf), "--out", str(tmp_path / "o.csv"))[0] == 2


def test_inverse_scan_only_cell(capsys, tmp_path):
    out = tmp_path / "cell.csv"
    code, _, _ = run(capsys, "inverse-scan", "--only-cell", "0.25pi,0", "--rot-step", "pi/50",
                     "--out", str(out))
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["alpha_x", "alpha_y", "fraction_all", "fraction_rank2", "fraction_rank3"]
    direct = inverse_reach_fraction((math.pi / 4, 0, 0), InverseScanConfig(rot_step=math.pi / 50))
    assert tuple(float(v) for v in rows[1][2:]) == direct
    man = read_kv(str(out) + ".manifest")
    assert man["subcommand"] == "inverse-scan"


def test_inverse_scan_coarse_sweep(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "inverse-scan", "--grid-step", "pi/8", "--rot-step", "pi/20",
                     "--gamma-step", "0.1", "--out", str(out))
    assert code == 0
    rows = read_csv(out)[1:]
    assert len(rows) == 9
    full = [(float(r[0]), float(r[1])) for r in rows if float(r[2]) == 1.0]
    assert full == [(math.pi / 8, math.pi / 8)]


def test_inverse_scan_bad_axes(capsys, tmp_path):
    out = tmp_path / "x.csv"
    assert run(capsys, "inverse-scan", "--rot-axes", "z,w", "--out", str(out))[0] == 2
    assert run(capsys, "inverse-scan", "--only-cell", "1", "--out", str(out))[0] == 2
    assert not out.exists()
