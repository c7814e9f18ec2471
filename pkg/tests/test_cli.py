import json
import shutil
import subprocess

import numpy as np
import pytest

from qweyl.cli import main
from qweyl.grid import QField2, QField4, read_field


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_defaults(capsys):
    code, out, _ = run(["defaults"], capsys)
    assert code == 0
    assert json.loads(out)["grids"]["qft"] == {"n": 64, "l": 6.0}


def test_suite_writes_report_and_exit_code(tmp_path, capsys):
    p = tmp_path / "r.json"
    code, _, _ = run(["suite", "tsm", "--out", p, "--trials", "tsm_split=1"], capsys)
    doc = json.loads(p.read_text())
    assert code == 0 and doc["summary"]["failed"] == 0
    # an impossible tolerance turns a pass into a failure with exit status 1
    code, out, _ = run(["--format", "text", "suite", "tsm", "--trials", "tsm_split=1", "--tol", "sphere_quadrature=1e-300"], capsys)
    assert code == 1 and "[FAIL]" in out


def test_global_flags_before_or_after_verb(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["--seed", 3, "suite", "tsm", "--trials", "tsm_split=1", "--out", a], capsys)
    run(["suite", "tsm", "--trials", "tsm_split=1", "--seed", 3, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"suite": "tsm", "seed": 5, "format": "csv", "trials": {"tsm_split": 1}}))
    code, out, _ = run(["suite", "--config", cfg, "--seed", 6], capsys)
    assert code == 0 and out.startswith("suite,name")
    assert run(["suite", "--config", tmp_path / "missing.json"], capsys)[0] == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["suite", "nope"])
    assert e.value.code == 2
    code, _, err = run(["suite", "tsm", "--tol", "bogus=1"], capsys)
    assert code == 2 and "bogus" in err
    assert run(["sample", "gaussian"], capsys)[0] == 2  # needs --out


def test_sample_and_qft_roundtrip(tmp_path, capsys):
    f, F, g = tmp_path / "f.qf2", tmp_path / "F.qf2", tmp_path / "g.qf2"
    assert run(["sample", "random", "--out", f, "--grid-n", 16, "--domain-l", 3], capsys)[0] == 0
    assert run(["qft", "--in", f, "--out", F], capsys)[0] == 0
    assert run(["qft", "--in", F, "--direction", "inv", "--path", "direct", "--out", g], capsys)[0] == 0
    a, b = read_field(f), read_field(g)
    assert isinstance(b, QField2)
    np.testing.assert_allclose(b.values, a.values, atol=1e-12)


def test_wigner_and_moyal(tmp_path, capsys):
    phi = tmp_path / "phi.qf2"
    run(["sample", "gaussian", "--grid-n", 16, "--domain-l", 2, "--out", phi], capsys)
    w = tmp_path / "w.qf4"
    assert run(["wigner", "--f", phi, "--out", w], capsys)[0] == 0
    W = read_field(w)
    assert isinstance(W, QField4) and W.values[16, 16, 16, 16, 0] == pytest.approx(2.0, rel=1e-7)
    assert run(["fourier-wigner", "--f", phi, "--g", phi, "--out", tmp_path / "v.qf4"], capsys)[0] == 0
    code, out, _ = run(["moyal", "--f1", phi, "--g1", phi, "--f2", phi, "--g2", phi], capsys)
    assert code == 0 and json.loads(out)["records"][0]["passed"]
    odd = tmp_path / "odd.qf2"
    run(["sample", "random", "--grid-n", 16, "--domain-l", 2, "--seed", 4, "--out", odd], capsys)
    assert run(["moyal", "--f1", odd, "--g1", phi, "--f2", phi, "--g2", phi], capsys)[0] == 2


def test_weyl_op(tmp_path, capsys):
    s = tmp_path / "s.qf4"
    run(["sample", "symbol-gaussian", "--grid-n", 16, "--out", s], capsys)
    code, out, _ = run(["weyl-op", "--symbol", s, "--check", "hs,weakform"], capsys)
    recs = json.loads(out)["records"]
    assert code == 0 and [r["name"] for r in recs] == ["hs_identity_defect", "weak_form_defect"]
    assert run(["weyl-op", "--symbol", s, "--check", "spectrum"], capsys)[0] == 2


def test_galpha(capsys):
    code, out, _ = run(["galpha", "--alpha", 0.4, "--domains", "4,8,16"], capsys)
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["relation"] == ">=" and rec["defect"] >= 0.05
    assert run(["galpha", "--alpha", 0.4, "--domains", "4"], capsys)[0] == 2


def test_group_weyl_and_bab(tmp_path, capsys):
    g = tmp_path / "g.qf4"
    run(["sample", "random-g", "--values", "j", "--out", g], capsys)
    assert run(["group-weyl", "--g", g], capsys)[0] == 0
    m = tmp_path / "a.qmk"
    run(["sample", "mask", "--density", 0.3, "--out", m], capsys)
    code, out, _ = run(["bab", "--mask-a", m, "--rank", 2, "--trials", 3], capsys)
    assert code == 0 and len(json.loads(out)["records"]) == 2
    assert run(["bab", "--rank", 0], capsys)[0] == 2


def test_tsm_closed_forms_and_files(tmp_path, capsys):
    code, out, _ = run(["tsm", "--f", "gaussian", "--r", 0.5], capsys)
    assert code == 0
    assert json.loads(out)["value"][0] == pytest.approx(np.exp(-np.pi * 0.25), abs=1e-12)
    code, out, _ = run(["tsm", "--f", "bump:0.5", "--witness", "bump:1", "--r", 0.5, "--check", "support"], capsys)
    recs = json.loads(out)["records"]
    assert code == 0 and recs[0]["defect"] == 0.0 and recs[1]["defect"] >= 1e-3
    f = tmp_path / "g4.qf4"
    run(["sample", "gaussian4", "--grid-n", 8, "--domain-l", 4, "--out", f], capsys)
    assert run(["tsm", "--f", f, "--r", 0.5], capsys)[0] == 0
    assert run(["tsm", "--f", tmp_path / "nothere.qf4", "--r", 0.5], capsys)[0] == 2


@pytest.mark.skipif(shutil.which("qweyl") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["qweyl", "defaults"], capture_output=True, text=True)
    assert res.returncode == 0 and "tolerances" in res.stdout
