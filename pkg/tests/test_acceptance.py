"""Acceptance criteria 1-14, each judged on the default suite configuration (seed 1).

Every test prints one PASS/FAIL line with the measured defects; the same
lines are collected in the terminal summary.  Criteria are checked as
stated: a failing measurement fails the test.
"""

import numpy as np
import pytest

from qweyl.suite import SuiteConfig, render_report, run_suite
from qweyl.weyl import increments, unboundedness_probe


@pytest.fixture(scope="module")
def report():
    return run_suite(SuiteConfig(suite="all", seed=1), threads=1)


@pytest.fixture(scope="module")
def records(report):
    return {r.name: r for r in report.records}


def judge(acceptance_log, number, title, records, names, extra=()):
    """Record and assert one criterion; ``extra`` holds (label, ok, detail) triples."""
    parts, ok = [], True
    for n in names:
        r = records[n]
        d = "-" if r.defect is None else f"{r.defect:.2e}"
        parts.append(f"{n} {d} {r.relation} {r.tolerance:.0e} {r.status}")
        ok = ok and r.passed is True
    for label, good, detail in extra:
        parts.append(f"{label} {detail} {'pass' if good else 'fail'}")
        ok = ok and good
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: " + "; ".join(parts)
    acceptance_log[number] = line
    print(line)
    assert ok, line


def test_criterion_01_qft_plancherel(records, acceptance_log):
    judge(acceptance_log, 1, "QFT Plancherel and dual-path agreement", records, ["qft_plancherel", "qft_dual_path"])


def test_criterion_02_inverse_roundtrip(records, acceptance_log):
    judge(acceptance_log, 2, "inverse QFT roundtrip", records, ["qft_inverse_roundtrip"])


def test_criterion_03_split_identities(records, acceptance_log):
    judge(acceptance_log, 3, "split identities", records, ["split_pointwise", "commutation_relations", "split_euclidean_reduction"])


def test_criterion_04_wigner_is_qft_of_fourier_wigner(records, acceptance_log):
    judge(acceptance_log, 4, "Wigner = QFT of Fourier-Wigner, Gaussian closed forms", records,
          ["qft_of_fw_equals_wigner", "fourier_wigner_gaussian", "wigner_gaussian"])


def test_criterion_05_moyal(records, acceptance_log):
    judge(acceptance_log, 5, "Moyal identity for even fields", records, ["moyal_even_fields", "moyal_gaussian"])


def test_criterion_06_boundedness(records, acceptance_log):
    judge(acceptance_log, 6, "sup bound and L2 identity of W(f,g)", records, ["wigner_sup_bound", "wigner_l2_identity"])


def test_criterion_07_weyl_hs_trace_weak(records, acceptance_log):
    judge(acceptance_log, 7, "Weyl HS identity, trace bound, weak form", records,
          ["weyl_hs_gaussian", "weyl_hs_random", "weyl_trace_bound_gaussian", "weyl_trace_bound_random",
           "weak_form_gaussian", "weak_form_random"])


def test_criterion_08_unboundedness_probe(records, acceptance_log):
    v = unboundedness_probe(0.4, 1.5, [4, 8, 16])
    inc = increments(v)
    strictly = all(d > 0 for d in inc)
    judge(acceptance_log, 8, "unboundedness probe", records, ["galpha_divergent_increment", "galpha_convergent_increment"],
          extra=[("alpha=0.4 strictly increasing", strictly, np.round(v, 6).tolist())])


def test_criterion_09_rho_calculus(records, acceptance_log):
    judge(acceptance_log, 9, "rho unitarity, composition, complex agreement", records,
          ["rho_unitarity", "rho_composition", "rho_classical_agreement"])


def test_criterion_10_inversion_plancherel(records, acceptance_log):
    judge(acceptance_log, 10, "inversion formula and Plancherel for W(g)", records, ["weyl_inversion", "group_weyl_plancherel"])


def test_criterion_11_bab_engine(records, acceptance_log):
    judge(acceptance_log, 11, "HS bound for E_A F_S, dimension proxy, kernel vs direct", records,
          ["bab_hs_bound", "bab_dimension_proxy", "bab_kernel_vs_direct"])


def test_criterion_12_gaussian_coefficient(records, acceptance_log):
    judge(acceptance_log, 12, "Gaussian matrix coefficient", records, ["gaussian_coefficient"])


def test_criterion_13_support_theorem(records, acceptance_log):
    judge(acceptance_log, 13, "TSM support theorem and Gaussian centre value", records,
          ["support_forward_bump", "support_converse_witness", "tsm_gaussian_center"])


def test_criterion_14_determinism(report, acceptance_log):
    first = render_report(report).encode()
    second = render_report(run_suite(SuiteConfig(suite="all", seed=1), threads=1)).encode()
    same = first == second
    line = f"criterion 14 [{'PASS' if same else 'FAIL'}] byte-identical JSON across two runs: {len(first)} bytes, identical={same}"
    acceptance_log[14] = line
    print(line)
    assert same, line
