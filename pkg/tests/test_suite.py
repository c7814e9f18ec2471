import json

import pytest

from qweyl import suite as suite_mod
from qweyl.suite import (
    CHECKS,
    DEFAULT_TOLERANCES,
    SUITES,
    Check,
    CheckRecord,
    SuiteConfig,
    SuiteReport,
    defaults_document,
    emit_report,
    parse_report,
    render_report,
    run_suite,
    threads_from_env,
)


@pytest.fixture(scope="module")
def qft_report():
    return run_suite(SuiteConfig(suite="qft", trials={"qft": 4}), threads=1)


def test_qft_suite_passes_with_enough_records(qft_report):
    assert qft_report.ok
    assert len(qft_report.records) >= 6
    assert [r.name for r in qft_report.records] == [c.name for c in CHECKS["qft"]]


def test_every_check_has_a_tolerance():
    for checks in CHECKS.values():
        for c in checks:
            assert c.name in DEFAULT_TOLERANCES
            assert c.relation in ("<=", ">=")


def test_report_is_deterministic_and_thread_independent(qft_report):
    cfg = SuiteConfig(suite="qft", trials={"qft": 4})
    a = render_report(qft_report)
    assert render_report(run_suite(cfg, threads=1)) == a
    assert render_report(run_suite(cfg, threads=3)) == a


def test_different_seed_changes_measurements(qft_report):
    other = run_suite(SuiteConfig(suite="qft", seed=2, trials={"qft": 4}), threads=1)
    assert [r.defect for r in other.records] != [r.defect for r in qft_report.records]


def test_json_roundtrip(qft_report):
    back = parse_report(render_report(qft_report))
    assert back.to_dict() == qft_report.to_dict()
    assert back.summary == qft_report.summary


def test_timing_only_on_request(qft_report):
    assert "wall_time" not in render_report(qft_report)
    assert "wall_time" in render_report(qft_report, timing=True)


def test_small_grid_skips_underresolved_checks():
    rep = run_suite(SuiteConfig(suite="all", grid_n=4, trials={k: 1 for k in ("qft", "rho", "inversion", "bab", "tsm_split")}), threads=1)
    statuses = {r.name: r.status for r in rep.records}
    assert statuses["qft_plancherel"] == "skipped: below minimum n"
    assert statuses["rho_composition"] == "skipped: below minimum n"
    # only the checks with their own fixed grids still run
    fixed = {c.name for checks in CHECKS.values() for c in checks if c.fixed_grid}
    ran = {r.name for r in rep.records if r.passed is not None}
    assert ran and ran <= fixed


def test_budget_skips_remaining_checks():
    rep = run_suite(SuiteConfig(suite="qft", budget=1e-9), threads=1)
    assert all(r.status == "skipped: budget" for r in rep.records)
    assert rep.summary["skipped"] == len(rep.records)


def test_crashing_check_becomes_failed_record(monkeypatch):
    def boom(ctx):
        raise RuntimeError("kaput")

    monkeypatch.setitem(CHECKS, "qft", [Check("qft_plancherel", "anchor", boom)])
    rep = run_suite(SuiteConfig(suite="qft"), threads=1)
    (rec,) = rep.records
    assert rec.passed is False and rec.status.startswith("error: RuntimeError")
    assert not rep.ok


def test_lower_bound_relation(monkeypatch):
    monkeypatch.setitem(CHECKS, "qft", [Check("galpha_divergent_increment", "a", lambda ctx: 0.07, relation=">="),
                                        Check("galpha_convergent_increment", "b", lambda ctx: 0.07)])
    a, b = run_suite(SuiteConfig(suite="qft"), threads=1).records
    assert a.passed and not b.passed


def test_empty_report_in_all_formats(tmp_path):
    rep = SuiteReport("qft", 1, [])
    doc = json.loads(emit_report(rep, tmp_path / "r.json"))
    assert doc["records"] == [] and doc["summary"]["total"] == 0
    assert (tmp_path / "r.json").read_text() == render_report(rep)
    assert render_report(rep, "csv").strip().startswith("suite,name")
    assert "total 0" in render_report(rep, "text")
    assert rep.ok


def test_failure_visible_in_every_format():
    rec = CheckRecord("x", "anchor", 1.0, 0.1, "<=", False, "fail", "qft")
    rep = SuiteReport("qft", 1, [rec])
    assert not rep.ok
    assert '"passed": false' in render_report(rep, "json")
    assert ",False,fail" in render_report(rep, "csv")
    assert "[FAIL]" in render_report(rep, "text")
    with pytest.raises(ValueError):
        render_report(rep, "xml")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_report(SuiteReport("qft", 1, []), tmp_path / "missing" / "r.json")


@pytest.mark.parametrize(
    "kw",
    [
        {"suite": "nope"},
        {"grid_n": 7},
        {"domain_l": 0.0},
        {"tolerances": {"qft_plancherel": 0.0}},
        {"tolerances": {"bogus": 1.0}},
        {"trials": {"qft": 0}},
        {"format": "yaml"},
        {"budget": -1.0},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SuiteConfig(**kw)


def test_config_files(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"suite": "tsm", "seed": 7}))
    cfg = SuiteConfig.load(p)
    assert cfg.suite == "tsm" and cfg.seed == 7
    p.write_text("{not json")
    with pytest.raises(ValueError):
        SuiteConfig.load(p)
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"colour": "red"})


def test_grid_overrides():
    assert SuiteConfig().grid_for("qft").n == 64
    cfg = SuiteConfig(grid_n=16)
    assert cfg.grid_for("weyl").is_self_dual
    assert cfg.grid_for("qft").l == 6.0
    assert SuiteConfig(grid_n=16, domain_l=3.0).grid_for("weyl").l == 3.0


def test_defaults_document():
    d = defaults_document()
    assert d["suites"] == list(SUITES)
    assert d["tolerances"] == DEFAULT_TOLERANCES
    json.dumps(d)


def test_threads_from_env(monkeypatch):
    monkeypatch.delenv("QWEYL_THREADS", raising=False)
    assert threads_from_env() == 1
    monkeypatch.setenv("QWEYL_THREADS", "4")
    assert threads_from_env() == 4
    for bad in ("0", "many"):
        monkeypatch.setenv("QWEYL_THREADS", bad)
        with pytest.raises(ValueError):
            threads_from_env()


def test_schema_version_checked():
    with pytest.raises(ValueError):
        SuiteReport.from_dict({"schema_version": 99, "suite": "qft", "seed": 1, "records": []})


def test_info_checks_are_reported_separately():
    info = suite_mod.run_info_checks(SuiteConfig())
    assert set(info) == {"bab_fs_idempotency"}
    assert info["bab_fs_idempotency"]["value"] >= 0
