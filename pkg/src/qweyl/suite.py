"""Verification suites: seeded batches of identity checks with structured reports.

Each check returns a measured defect (or, for lower-bound checks, a measured
value) which is compared against its tolerance.  All randomness comes from
the configured seed; every check draws from its own stream derived from the
seed and the check name, so results do not depend on execution order or on
the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from .fields import gaussian, gaussian_fn, random_field, random_symbol
from .grid import Grid2, QField2, QField4, inner, lp_norm
from .heisenberg import (
    classical_agreement,
    classical_composition_defect,
    composition_defect,
    ea_fs_apply,
    ea_fs_hs_bound,
    fourier_weyl,
    fs_apply_direct,
    fs_idempotency_defect,
    gaussian_coefficient_defect,
    gram_defect,
    group_weyl,
    inversion_defect,
    matrix_coefficients,
    near_one_count,
    plancherel_defect,
    projection_minus,
    projection_plus,
    random_g,
    random_pair,
    rho,
    trace_minus,
)
from .qft import qft_forward, qft_inverse, parseval_defect
from .quaternion import E_MINUS, commutator_exp, from_split_coeffs, iexp, jexp, qabs, qabs2, qmul, split_coeffs, split_pm
from .tsm import (
    SphereQuad4,
    bump_field,
    gaussian4_fn,
    reflection_sides,
    split_reduction_sides,
    support_theorem_check,
    tsm,
)
from .weyl import (
    WeylSymbol,
    apply_weyl,
    compactness_tail,
    direct_weyl_apply,
    galpha_euclidean_ft,
    galpha_field,
    galpha_qft,
    hs_identity_defect,
    increments,
    kernel_from_symbol,
    probe_grid,
    symbol_grids,
    trace_bound_check,
    unboundedness_probe,
    weak_form_defect,
)
from .wigner import MAX_4D_N, fourier_wigner, moyal_sides, qft_of_fw_equals_wigner, wigner, wigner_covariance_defect, zero_free_pair

SCHEMA_VERSION = 1
SUITES = ("qft", "wigner", "weyl", "group-weyl", "bab", "tsm")

# default grid per suite; the operator suites use self-dual grids (n = 4 l^2)
SUITE_GRIDS = {
    "qft": (64, 6.0),
    "wigner": (16, 2.0),
    "weyl": (12, math.sqrt(3.0)),
    "group-weyl": (8, math.sqrt(2.0)),
    "bab": (8, math.sqrt(2.0)),
    "tsm": (16, 4.0),
}
SELF_DUAL_SUITES = ("weyl", "group-weyl", "bab")
MIN_N = {"qft": 16, "wigner": 8, "weyl": 8, "group-weyl": 8, "bab": 8, "tsm": 8}

DEFAULT_TRIALS = {
    "qft": 20,
    "qft_of_fw": 3,
    "moyal": 10,
    "boundedness": 20,
    "covariance": 3,
    "weak_form": 3,
    "weyl_random": 3,
    "rho": 50,
    "inversion": 10,
    "bab": 50,
    "tsm_split": 4,
}

DEFAULT_TOLERANCES = {
    "qft_plancherel": 1e-10,
    "qft_dual_path": 1e-10,
    "qft_inverse_roundtrip": 1e-10,
    "split_pointwise": 1e-12,
    "commutation_relations": 1e-12,
    "split_euclidean_reduction": 1e-12,
    "parseval": 1e-9,
    "gaussian_fixed_point": 1e-10,
    "qft_of_fw_equals_wigner": 1e-7,
    "fourier_wigner_gaussian": 1e-7,
    "wigner_gaussian": 1e-7,
    "moyal_even_fields": 1e-7,
    "moyal_complex_fields": 1e-7,
    "moyal_gaussian": 1e-8,
    "wigner_sup_bound": 1e-9,
    "wigner_l4_bound": 1e-9,
    "wigner_l2_identity": 1e-9,
    "wigner_covariance": 1e-8,
    "zero_free_pair": 1e-9,
    "weyl_hs_gaussian": 1e-8,
    "weyl_hs_random": 1e-8,
    "weyl_trace_bound_gaussian": 1e-6,
    "weyl_trace_bound_random": 1e-6,
    "weak_form_gaussian": 1e-7,
    "weak_form_random": 1e-6,
    "weak_form_random_separately_even": 1e-6,
    "weyl_kernel_vs_direct": 1e-8,
    "weyl_operator_bound": 1e-12,
    "weyl_compactness_tail": 0.1,
    "galpha_euclidean_reduction": 1e-12,
    "galpha_divergent_increment": 0.05,
    "galpha_convergent_increment": 0.01,
    "rho_unitarity": 1e-11,
    "rho_composition": 1e-11,
    "rho_classical_agreement": 1e-11,
    "classical_composition": 1e-11,
    "projections": 1e-12,
    "group_weyl_plancherel": 1e-6,
    "weyl_inversion": 1e-6,
    "trace_basis_independence": 1e-10,
    "gaussian_coefficient": 1e-9,
    "fourier_weyl_zero_frequency": 1e-12,
    "fourier_weyl_coefficient": 1e-10,
    "bab_orthonormal_family": 1e-10,
    "bab_hs_bound": 1e-12,
    "bab_dimension_proxy": 1e-12,
    "bab_kernel_vs_direct": 1e-9,
    "sphere_quadrature": 1e-10,
    "tsm_gaussian_center": 1e-8,
    "support_forward_bump": 1e-6,
    "support_converse_witness": 1e-3,
    "support_forward_gaussian": 1e-6,
    "tsm_split_reduction": 1e-12,
    "tsm_reflection": 1e-12,
}


# -- configuration -------------------------------------------------------------


@dataclass
class SuiteConfig:
    suite: str = "all"
    grid_n: int | None = None  # overrides every suite's default grid size
    domain_l: float | None = None  # overrides every suite's default half-width
    seed: int = 1
    trials: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"
    budget: float | None = None  # wall-time cap in seconds
    record_timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.suite != "all" and self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {SUITES + ('all',)}")
        if self.grid_n is not None and (int(self.grid_n) != self.grid_n or self.grid_n < 2 or self.grid_n % 2):
            raise ValueError("grid_n must be a positive even integer")
        if self.domain_l is not None and not self.domain_l > 0:
            raise ValueError("domain_l must be positive")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ValueError(f"unknown tolerance key {k!r}")
            if not v > 0:
                raise ValueError(f"tolerance {k!r} must be > 0")
        for k, v in self.trials.items():
            if k not in DEFAULT_TRIALS:
                raise ValueError(f"unknown trials key {k!r}")
            if int(v) != v or v < 1:
                raise ValueError(f"trials {k!r} must be a positive integer")
        if self.format not in ("json", "csv", "text"):
            raise ValueError("format must be json, csv or text")
        if self.budget is not None and not self.budget > 0:
            raise ValueError("budget must be positive")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def count(self, name: str) -> int:
        return int(self.trials.get(name, DEFAULT_TRIALS[name]))

    def grid_for(self, suite: str) -> Grid2:
        n, l = SUITE_GRIDS[suite]
        if self.grid_n is not None:
            n = int(self.grid_n)
            if self.domain_l is None and suite in SELF_DUAL_SUITES:
                l = math.sqrt(n) / 2
        if self.domain_l is not None:
            l = float(self.domain_l)
        return Grid2(n, l)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SuiteConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise ValueError(f"malformed config {path}: {e}") from e
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(d)


def defaults_document() -> dict:
    """Everything `qweyl defaults` prints: config defaults, grids, trials and tolerances."""
    return {
        "schema_version": SCHEMA_VERSION,
        "config": SuiteConfig().to_dict(),
        "suites": list(SUITES),
        "grids": {k: {"n": n, "l": l} for k, (n, l) in SUITE_GRIDS.items()},
        "minimum_n": dict(MIN_N),
        "trials": dict(DEFAULT_TRIALS),
        "tolerances": dict(DEFAULT_TOLERANCES),
    }


# -- records -------------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    anchor: str
    defect: float | None
    tolerance: float
    relation: str  # "<=": pass iff defect <= tolerance; ">=": pass iff defect >= tolerance
    passed: bool | None  # None for skipped checks
    status: str  # "pass", "fail", "error: ...", "skipped: ..."
    suite: str
    note: str | None = None
    wall_time: float | None = None


@dataclass
class SuiteReport:
    suite: str
    seed: int
    records: list
    schema_version: int = SCHEMA_VERSION

    @property
    def summary(self) -> dict:
        s = {"total": len(self.records), "passed": 0, "failed": 0, "skipped": 0}
        for r in self.records:
            if r.passed is None:
                s["skipped"] += 1
            elif r.passed:
                s["passed"] += 1
            else:
                s["failed"] += 1
        return s

    @property
    def ok(self) -> bool:
        return all(r.passed is not False for r in self.records)

    def to_dict(self, timing: bool = False) -> dict:
        recs = []
        for r in self.records:
            d = asdict(r)
            if not timing:
                d.pop("wall_time")
            recs.append(d)
        return {
            "schema_version": self.schema_version,
            "suite": self.suite,
            "seed": self.seed,
            "summary": self.summary,
            "records": recs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        recs = [CheckRecord(**r) for r in d["records"]]
        return cls(d["suite"], d["seed"], recs, d["schema_version"])


def _judge(defect: float, tol: float, relation: str) -> bool:
    if defect is None or not math.isfinite(defect):
        return False
    return defect <= tol if relation == "<=" else defect >= tol


# -- check declarations ----------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    fn: Callable  # fn(ctx) -> defect or (defect, note)
    min_n: int = 0
    max_n: int | None = None
    relation: str = "<="
    fixed_grid: bool = False  # runs on its own grid, independent of the configured one


@dataclass
class Context:
    cfg: SuiteConfig
    grid: Grid2
    rng: np.random.Generator


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    den = float(np.sqrt(np.sum(b**2)))
    return float(np.sqrt(np.sum((a - b) ** 2))) / (den if den else 1.0)


def _max_abs(a) -> float:
    return float(np.abs(np.asarray(a)).max(initial=0.0))


# qft ------------------------------------------------------------------------------


def _qft_plancherel(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("qft")):
        f = random_field(ctx.grid, ctx.rng)
        nf = lp_norm(f)
        worst = max(worst, abs(lp_norm(qft_forward(f)) - nf) / nf)
    return worst


def _qft_dual_path(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("qft")):
        f = random_field(ctx.grid, ctx.rng)
        a = qft_forward(f, "split").values
        b = qft_forward(f, "direct").values
        worst = max(worst, _rel(a, b))
    return worst


def _qft_roundtrip(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("qft")):
        f = random_field(ctx.grid, ctx.rng)
        back = qft_inverse(qft_forward(f))
        worst = max(worst, _rel(back.values, f.values))
    return worst


def _split_pointwise(ctx):
    q = ctx.rng.standard_normal((1000, 4))
    qp, qm = split_pm(q)
    i = np.broadcast_to([0.0, 1.0, 0.0, 0.0], q.shape)
    j = np.broadcast_to([0.0, 0.0, 1.0, 0.0], q.shape)
    iqj = qmul(qmul(i, q), j)
    d = [
        _max_abs(qp + qm - q),
        _max_abs(qp - (q + iqj) / 2),
        _max_abs(qm - (q - iqj) / 2),
        _max_abs(qabs2(q) - qabs2(qp) - qabs2(qm)),
        _max_abs(qabs2(qp) - np.abs(split_coeffs(q)[0]) ** 2 / 2),
        _max_abs(from_split_coeffs(*split_coeffs(q)) - q),
    ]
    return max(d)


def _commutation(ctx):
    worst = 0.0
    for a in ctx.rng.uniform(-10, 10, 200):
        for side in ("plus", "minus"):
            lhs, rhs = commutator_exp(side, a)
            worst = max(worst, _max_abs(lhs - rhs))
    return worst


def _euclidean_ft(c: np.ndarray, grid: Grid2, flip_second: bool) -> np.ndarray:
    """h^2 sum_x e^{-2 pi i (x1 y1 +- x2 y2)} c(x) as dense complex matrix products."""
    x = grid.points
    y = grid.reciprocal().points
    e = np.exp(-2j * np.pi * np.outer(y, x))
    e2 = np.conj(e) if flip_second else e
    return grid.h**2 * (e @ c @ e2.T)


def _split_euclidean(ctx):
    f = random_field(ctx.grid, ctx.rng)
    F = qft_forward(f).values
    cp, cm = split_coeffs(f.values)
    # the "+" coefficient sees the second frequency with flipped sign
    ref = from_split_coeffs(_euclidean_ft(cp, f.grid, True), _euclidean_ft(cm, f.grid, False))
    return _max_abs(F - ref) / _max_abs(F)


def _parseval(ctx):
    worst = 0.0
    for _ in range(5):
        f = random_field(ctx.grid, ctx.rng)
        g = random_field(ctx.grid, ctx.rng)
        worst = max(worst, parseval_defect(f, g))
    return worst


def _gaussian_fixed_point(ctx):
    # self-dual grid of the same size, so the frequency window is as wide as the spatial one
    phi = gaussian(Grid2(ctx.grid.n, math.sqrt(ctx.grid.n) / 2))
    F = qft_forward(phi)
    ref = QField2.from_function(F.grid, gaussian_fn)
    return _max_abs(F.values - ref.values)


QFT_CHECKS = [
    Check("qft_plancherel", "||F(f)||_2 = ||f||_2", _qft_plancherel, min_n=16),
    Check("qft_dual_path", "split-FFT path equals direct quadrature", _qft_dual_path, min_n=16),
    Check("qft_inverse_roundtrip", "inverse QFT recovers f", _qft_roundtrip, min_n=16),
    Check("split_pointwise", "q = q+ + q-, q± = (q ± iqj)/2, |q|^2 = |q+|^2 + |q-|^2", _split_pointwise),
    Check("commutation_relations", "(1±k) e^{aj} = e^{∓ai} (1±k)", _commutation),
    Check("split_euclidean_reduction", "F(f) from two Euclidean transforms of the split parts", _split_euclidean, min_n=16),
    Check("parseval", "<F f, F g> = <f~i, g~i>", _parseval, min_n=16),
    Check("gaussian_fixed_point", "F(e^{-pi|x|^2}) = e^{-pi|y|^2}", _gaussian_fixed_point, min_n=16),
]


# wigner ---------------------------------------------------------------------------


def _qft_of_fw(ctx):
    worst = qft_of_fw_equals_wigner(gaussian(ctx.grid), gaussian(ctx.grid))
    for _ in range(ctx.cfg.count("qft_of_fw")):
        f = random_field(ctx.grid, ctx.rng)
        g = random_field(ctx.grid, ctx.rng)
        worst = max(worst, qft_of_fw_equals_wigner(f, g))
    return worst


def _fw_gaussian(ctx):
    phi = gaussian(ctx.grid)
    V = fourier_wigner(phi, phi)
    q = V.grid_a.points
    p = V.grid_b.points
    q1, q2, p1, p2 = np.meshgrid(q, q, p, p, indexing="ij")
    ref = np.zeros(V.values.shape)
    ref[..., 0] = 0.5 * np.exp(-np.pi * (q1**2 + q2**2 + p1**2 + p2**2) / 2)
    return _max_abs(V.values - ref) / 0.5


def _wigner_gaussian(ctx):
    phi = gaussian(ctx.grid)
    W = wigner(phi, phi).data
    x = W.grid_a.points
    s = W.grid_b.points
    x1, x2, s1, s2 = np.meshgrid(x, x, s, s, indexing="ij")
    ref = np.zeros(W.values.shape)
    ref[..., 0] = 2 * np.exp(-2 * np.pi * (x1**2 + x2**2 + s1**2 + s2**2))
    return _max_abs(W.values - ref) / 2


def _moyal_even(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("moyal")):
        fs = [random_field(ctx.grid, ctx.rng, even_x1=True) for _ in range(4)]
        lhs, rhs = moyal_sides(*fs)
        worst = max(worst, (lhs - rhs).norm())
    return worst, "generic quaternion values; complex or single-ideal fields satisfy the identity"


def _moyal_complex(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("moyal")):
        fs = [random_field(ctx.grid, ctx.rng, kind="complex", even_x1=True) for _ in range(4)]
        lhs, rhs = moyal_sides(*fs)
        worst = max(worst, (lhs - rhs).norm())
    return worst


def _moyal_gaussian(ctx):
    phi = gaussian(ctx.grid)
    lhs, rhs = moyal_sides(phi, phi, phi, phi)
    quarter = np.array([0.25, 0, 0, 0])
    return max(_max_abs(lhs.array - quarter), _max_abs(rhs.array - quarter))


def _resolved_field(ctx) -> QField2:
    """Random field whose tails and sublattice aliasing both sit near 1e-10 on the 4D lattice.

    The Wigner lattice pairs samples from the two parity classes of the
    half-step grid, so the L2 identity sees the aliasing of |f|^2 at
    frequency 1/h as well as the mass outside [-l, l)^2.  Widths close to one
    with centres near the origin balance the two on the n = 16, l = 2 grid.
    """
    return random_field(ctx.grid, ctx.rng, width=(0.95, 1.05), spread=0.05)


def _model_field(ctx, margin: float) -> QField2:
    """Random field below 1e-12 at distance ``margin`` inside the domain boundary (periodic model)."""
    spread = 0.1
    a = math.log(1e12) / (math.pi * (ctx.grid.l - spread - margin) ** 2)
    return random_field(ctx.grid, ctx.rng, width=(a, 1.15 * a), spread=spread)


def _wigner_sup(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("boundedness")):
        f = _resolved_field(ctx)
        g = _resolved_field(ctx)
        W = wigner(f, g)
        sup = float(qabs(W.values).max())
        worst = max(worst, sup / W.bound() - 1.0)
    return max(worst, 0.0), "defect = max(0, sup|W| / (||f|| ||g||) - 1)"


def _wigner_l4(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("boundedness")):
        W = wigner(_resolved_field(ctx), _resolved_field(ctx))
        worst = max(worst, lp_norm(W.data, 4) / W.bound() - 1.0)
    return max(worst, 0.0), "defect = max(0, ||W||_4 / (||f|| ||g||) - 1)"


def _wigner_l2(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("boundedness")):
        f = _resolved_field(ctx)
        g = _resolved_field(ctx)
        W = wigner(f, g)
        worst = max(worst, abs(lp_norm(W.data) - W.bound()) / W.bound())
    return worst


def _wigner_cov(ctx):
    h = ctx.grid.h
    worst = 0.0
    for _ in range(ctx.cfg.count("covariance")):
        f = _model_field(ctx, 2 * h)
        g = _model_field(ctx, 2 * h)
        a = ctx.rng.integers(-2, 3, 2) * h
        c = ctx.rng.integers(-2, 3, 2) * h
        b = ctx.rng.uniform(-0.5, 0.5, 2)
        d = ctx.rng.uniform(-0.5, 0.5, 2)
        worst = max(worst, wigner_covariance_defect(f, g, a, b, c, d))
    return worst


def _zero_free(ctx):
    phi = gaussian(ctx.grid)
    base = wigner(phi, phi).values
    out = 0.0
    for a, b in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
        W = zero_free_pair(phi, phi, a, b).values
        ref = qmul(base, np.array([a, 0.0, 0.0, -b]))
        out = max(out, _max_abs(W - ref))
        if qabs(W).min() <= 0:
            return float("inf"), "a zero was found"
    return out


WIGNER_CHECKS = [
    Check("qft_of_fw_equals_wigner", "QFT of the Fourier-Wigner transform is the Wigner transform", _qft_of_fw, 8, MAX_4D_N),
    Check("fourier_wigner_gaussian", "V(phi,phi) = (1/2) e^{-pi(|q|^2+|p|^2)/2}", _fw_gaussian, 8, MAX_4D_N),
    Check("wigner_gaussian", "W(phi,phi) = 2 e^{-2pi(|x|^2+|xi|^2)}", _wigner_gaussian, 8, MAX_4D_N),
    Check("moyal_even_fields", "<W(f1,g1), W(f2,g2)> = <f1, f2 <conj g2, conj g1>>", _moyal_even, 8, MAX_4D_N),
    Check("moyal_complex_fields", "Moyal identity for complex-valued even fields", _moyal_complex, 8, MAX_4D_N),
    Check("moyal_gaussian", "Moyal identity for f = g = phi equals 1/4", _moyal_gaussian, 8, MAX_4D_N),
    Check("wigner_sup_bound", "||W(f,g)||_inf <= ||f||_2 ||g||_2", _wigner_sup, 8, MAX_4D_N),
    Check("wigner_l4_bound", "||W(f,g)||_4 <= ||f||_2 ||g||_2", _wigner_l4, 8, MAX_4D_N),
    Check("wigner_l2_identity", "||W(f,g)||_2 = ||f||_2 ||g||_2", _wigner_l2, 8, MAX_4D_N),
    Check("wigner_covariance", "W under modulation and lattice translation", _wigner_cov, 8, MAX_4D_N),
    Check("zero_free_pair", "W(f, (a+bk) g) = W(f, g)(a - bk)", _zero_free, 8, MAX_4D_N),
]


# weyl -----------------------------------------------------------------------------


def _gauss_symbol(x1, x2, s1, s2):
    x1, x2, s1, s2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, s1, s2)))
    out = np.zeros(x1.shape + (4,))
    out[..., 0] = np.exp(-np.pi * (x1**2 + x2**2 + s1**2 + s2**2))
    return out


def _random_weyl_symbol(ctx, parity="joint") -> WeylSymbol:
    xg, sg = symbol_grids(ctx.grid)
    return WeylSymbol.from_field(random_symbol(xg, sg, ctx.rng, parity=parity), ctx.grid)


def _hs_gauss(ctx):
    return hs_identity_defect(WeylSymbol.from_function(ctx.grid, _gauss_symbol))


def _hs_random(ctx):
    return max(hs_identity_defect(_random_weyl_symbol(ctx)) for _ in range(ctx.cfg.count("weyl_random")))


def _trace_excess(s: WeylSymbol) -> float:
    nuc, l1 = trace_bound_check(s)
    return max(0.0, nuc / l1 - 1.0)


def _trace_gauss(ctx):
    return _trace_excess(WeylSymbol.from_function(ctx.grid, _gauss_symbol)), "defect = max(0, ||W_sigma||_S1 / ||sigma||_1 - 1)"


def _trace_random(ctx):
    worst = max(_trace_excess(_random_weyl_symbol(ctx)) for _ in range(ctx.cfg.count("weyl_random")))
    return worst, "defect = max(0, ||W_sigma||_S1 / ||sigma||_1 - 1)"


def _weak_gauss(ctx):
    phi = gaussian(ctx.grid)
    return weak_form_defect(WeylSymbol.from_function(ctx.grid, _gauss_symbol), phi, phi)


def _weak_random(parity):
    def run(ctx):
        worst = 0.0
        for _ in range(ctx.cfg.count("weak_form")):
            s = _random_weyl_symbol(ctx, parity)
            f = random_field(ctx.grid, ctx.rng)
            g = random_field(ctx.grid, ctx.rng)
            worst = max(worst, weak_form_defect(s, f, g))
        return worst

    return run


def _kernel_vs_direct(ctx):
    s = WeylSymbol.from_function(ctx.grid, _gauss_symbol)
    op = kernel_from_symbol(s)
    worst = 0.0
    for f in (gaussian(ctx.grid), random_field(ctx.grid, ctx.rng)):
        worst = max(worst, _max_abs(apply_weyl(op, f).values - direct_weyl_apply(s, f).values))
    return worst


def _operator_bound(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("weyl_random")):
        s = _random_weyl_symbol(ctx)
        op = kernel_from_symbol(s)
        f = random_field(ctx.grid, ctx.rng)
        ratio = lp_norm(apply_weyl(op, f)) / (lp_norm(s.sigma) * lp_norm(f))
        worst = max(worst, ratio - 1.0)
    return max(worst, 0.0), "defect = max(0, ||W_sigma f|| / (||sigma||_2 ||f||) - 1)"


def _compact_tail(ctx):
    return compactness_tail(kernel_from_symbol(WeylSymbol.from_function(ctx.grid, _gauss_symbol)))


def _galpha_reduction(ctx):
    grid = probe_grid(4.0)
    F = galpha_qft(galpha_field(0.4, 0.5, grid))
    gh = galpha_euclidean_ft(0.4, 0.5, grid)
    ref = qmul(np.stack([gh.real, gh.imag, np.zeros(gh.shape), np.zeros(gh.shape)], -1), E_MINUS)
    return _max_abs(F.values - ref) / _max_abs(ref)


def _galpha_divergent(ctx):
    v = unboundedness_probe(0.4, 1.5, [4, 8, 16])
    inc = increments(v)
    value = inc[-1] if all(d > 0 for d in inc) else min(inc)
    return value, f"alpha=0.4, r'=1.5, l in (4, 8, 16): norms {_fmt(v)}; value is the final increment"


def _galpha_convergent(ctx):
    v = unboundedness_probe(0.1, 1.5, [4, 8, 16])
    inc = increments(v)
    return abs(inc[-1]), f"alpha=0.1, r'=1.5, l in (4, 8, 16): norms {_fmt(v)}; defect is the final increment"


def _fmt(v) -> str:
    return "[" + ", ".join(f"{x:.6g}" for x in v) + "]"


WEYL_CHECKS = [
    Check("weyl_hs_gaussian", "||W_sigma||_S2^2 = ||sigma||_2^2 (Gaussian symbol)", _hs_gauss, 8, MAX_4D_N),
    Check("weyl_hs_random", "||W_sigma||_S2^2 = ||sigma||_2^2 (random even symbols)", _hs_random, 8, MAX_4D_N),
    Check("weyl_trace_bound_gaussian", "||W_sigma||_S1 <= ||sigma||_1 (Gaussian symbol)", _trace_gauss, 8, MAX_4D_N),
    Check("weyl_trace_bound_random", "||W_sigma||_S1 <= ||sigma||_1 (random even symbols)", _trace_random, 8, MAX_4D_N),
    Check("weak_form_gaussian", "<W_sigma f, g> = int sigma W(f,g), Gaussian sigma, f = g = phi", _weak_gauss, 8, MAX_4D_N),
    Check("weak_form_random", "<W_sigma f, g> = int sigma W(f,g), sigma(x,xi) = sigma(x,-xi)", _weak_random("joint"), 8, MAX_4D_N),
    Check(
        "weak_form_random_separately_even",
        "<W_sigma f, g> = int sigma W(f,g), sigma even in xi1 and in xi2",
        _weak_random("separate"),
        8,
        MAX_4D_N,
    ),
    Check("weyl_kernel_vs_direct", "kernel operator equals direct double-integral quadrature", _kernel_vs_direct, 8, MAX_4D_N),
    Check("weyl_operator_bound", "||W_sigma f||_2 <= ||sigma||_2 ||f||_2", _operator_bound, 8, MAX_4D_N),
    Check("weyl_compactness_tail", "singular-value tail beyond n^2/2 carries <= 10% of HS mass", _compact_tail, 8, MAX_4D_N),
    Check("galpha_euclidean_reduction", "F(f_alpha) = g_alpha^ (1-k)/2", _galpha_reduction, fixed_grid=True),
    Check("galpha_divergent_increment", "alpha > 1 - 1/r': truncated norms keep growing", _galpha_divergent, relation=">=", fixed_grid=True),
    Check("galpha_convergent_increment", "alpha < 1 - 1/r': truncated norms converge", _galpha_convergent, fixed_grid=True),
]


# group-weyl -------------------------------------------------------------------------


def _lattice_vec(ctx, span: int = None) -> np.ndarray:
    n = ctx.grid.n
    span = span or n // 2
    return ctx.rng.integers(-span, span, 2) * ctx.grid.h


def _rho_unitarity(ctx):
    worst = float(_max_abs(rho((0.0, 0.0), (0.0, 0.0), ctx.grid).matrix - np.eye(4 * ctx.grid.n**2)))
    for _ in range(10):
        x = ctx.rng.normal(size=2)
        worst = max(worst, rho(x, _lattice_vec(ctx), ctx.grid).unitarity_defect())
    return worst


def _rho_composition(ctx):
    worst = 0.0
    for _ in range(ctx.cfg.count("rho")):
        u, v, x, y = (_lattice_vec(ctx) for _ in range(4))
        worst = max(worst, composition_defect(u, v, x, y, ctx.grid))
    return worst


def _rho_classical(ctx):
    worst = 0.0
    for _ in range(10):
        worst = max(worst, classical_agreement(ctx.rng.normal(size=2), _lattice_vec(ctx), ctx.grid))
    return worst


def _classical_composition(ctx):
    worst = 0.0
    for _ in range(10):
        u, v, x, y = (_lattice_vec(ctx) for _ in range(4))
        worst = max(worst, classical_composition_defect(u, v, x, y, ctx.grid))
    return worst


def _projections(ctx):
    pm = projection_minus(ctx.grid)
    pp = projection_plus(ctx.grid)
    eye = np.eye(pm.shape[0])
    f = random_field(ctx.grid, ctx.rng)
    v = f.values.reshape(-1)
    norms = abs(np.sum(v**2) - np.sum((pm @ v) ** 2) - np.sum((pp @ v) ** 2)) * ctx.grid.h**2
    return max(_max_abs(pm @ pm - pm), _max_abs(pp @ pm), _max_abs(pm + pp - eye), _max_abs(pm - pm.T), norms)


def _g_instances(ctx):
    k = ctx.cfg.count("inversion")
    # alternate full quaternion and pure-j values
    return [random_g(ctx.grid, ctx.rng, "j" if t % 2 else "quaternion") for t in range(k)]


def _gw_plancherel(ctx):
    return max(plancherel_defect(g) for g in _g_instances(ctx))


def _gw_inversion(ctx):
    return max(inversion_defect(g) for g in _g_instances(ctx))


def _trace_basis(ctx):
    g = random_g(ctx.grid, ctx.rng)
    t = group_weyl(g).matrix
    worst = 0.0
    for _ in range(3):
        r = rho(ctx.rng.normal(size=2), _lattice_vec(ctx), ctx.grid).matrix
        a = trace_minus(t @ r, ctx.grid, "delta")
        b = trace_minus(t @ r, ctx.grid, "fourier")
        worst = max(worst, (a - b).norm())
    return worst


def _gaussian_coefficient(ctx):
    d = gaussian_coefficient_defect(Grid2(64, 4.0))
    return d, "computed constant 1/2 = ||phi||_2^2; the unnormalized e^{-pi(|x|^2+|y|^2)/2} lacks this factor"


def _fw_zero(ctx):
    g = random_g(ctx.grid, ctx.rng)
    return _max_abs(fourier_weyl(g, (0.0, 0.0), (0.0, 0.0)) - group_weyl(g).matrix)


def _fw_coefficient(ctx):
    grid = ctx.grid
    g = random_g(grid, ctx.rng)
    xp = ctx.rng.uniform(-0.5, 0.5, 2)
    xpp = ctx.rng.uniform(-0.5, 0.5, 2)
    m = fourier_weyl(g, xp, xpp)
    phi = gaussian(grid)
    applied = QField2(grid, (m @ phi.values.reshape(-1)).reshape(grid.n, grid.n, 4))
    lhs = inner(applied, phi).array
    c = matrix_coefficients(phi, phi)
    p = grid.points
    d = 2 * np.pi * (p[:, None] * xpp[0] - p[None, :] * xp[0])
    e = 2 * np.pi * (p[:, None] * xpp[1] - p[None, :] * xp[1])
    prod = qmul(qmul(iexp(d)[:, None, :, None, :], qmul(g.values, c.values)), jexp(e)[None, :, None, :, :])
    rhs = prod.reshape(-1, 4).sum(0) * grid.h**4
    return _max_abs(lhs - rhs)


GROUP_CHECKS = [
    Check("rho_unitarity", "rho(x,y) is unitary and rho(0,0) = I", _rho_unitarity, 8),
    Check("rho_composition", "rho(u,v) rho(x,y) = e^{pi i(x1v1-u1y1)} rho(u+x,v+y) e^{pi j(x2v2-u2y2)}", _rho_composition, 8),
    Check("rho_classical_agreement", "rho(x,y) on L2_- equals the complex pi(x,y)", _rho_classical, 8),
    Check("classical_composition", "rho(u,v) rho(x,y) phi_- = pi(u,v) pi(x,y) phi_-", _classical_composition, 8),
    Check("projections", "P_-^2 = P_-, P_+ P_- = 0, P_+ + P_- = I, norms split", _projections, 8),
    Check("group_weyl_plancherel", "||W(g) P_-||_HS^2 = ||g||_2^2", _gw_plancherel, 8),
    Check("weyl_inversion", "g(x,y) = tr(W(g) rho(-x,-y) P_-)", _gw_inversion, 8),
    Check("trace_basis_independence", "trace over two orthonormal bases agrees", _trace_basis, 8),
    Check("gaussian_coefficient", "<rho(x,y) phi, phi> = (1/2) e^{-pi(|x|^2+|y|^2)/2}", _gaussian_coefficient, fixed_grid=True),
    Check("fourier_weyl_zero_frequency", "Fourier-Weyl transform at zero frequency is W(g)", _fw_zero, 8),
    Check("fourier_weyl_coefficient", "<F~(W(g))(xi) phi, phi> is the Fourier transform of g <rho phi, phi>", _fw_coefficient, 8),
]


# bab --------------------------------------------------------------------------------


def _bab_draws(ctx):
    ranks = (1, 2, 4)
    return [random_pair(ctx.grid, ctx.rng, ranks[t % 3]) for t in range(ctx.cfg.count("bab"))]


def _bab_gram(ctx):
    return max(gram_defect(p.S) for p in _bab_draws(ctx))


def _bab_bound(ctx):
    worst = -np.inf
    for p in _bab_draws(ctx):
        hs, bound = ea_fs_hs_bound(p)
        worst = max(worst, (hs - bound) / bound)
    note = "defect = max (||E_A F_S||_HS^2 - m(A) N^2) / (m(A) N^2), clipped at 0; N = 1 attains equality"
    return max(float(worst), 0.0), note


def _bab_proxy(ctx):
    worst = 0.0
    for p in _bab_draws(ctx):
        hs, _ = ea_fs_hs_bound(p)
        worst = max(worst, near_one_count(p) - hs)
    return max(worst, 0.0), "defect = max(0, #(singular values > 1 - 1e-6) - ||E_A F_S||_HS^2)"


def _bab_paths(ctx):
    worst = 0.0
    for t, p in enumerate(_bab_draws(ctx)[:6]):
        g = random_g(ctx.grid, ctx.rng)
        k = ea_fs_apply(p, g)
        d = fs_apply_direct(p, g).values[p.mask]
        worst = max(worst, _max_abs(k - d))
    return worst


def _bab_idempotency(ctx):
    p = _bab_draws(ctx)[0]
    return fs_idempotency_defect(p, random_g(ctx.grid, ctx.rng))


BAB_CHECKS = [
    Check("bab_orthonormal_family", "Gram matrix of S is the identity", _bab_gram, 8),
    Check("bab_hs_bound", "||E_A F_S||_HS^2 <= m(A) N^2", _bab_bound, 8),
    Check("bab_dimension_proxy", "dim R(E_A cap F_S) <= ||E_A F_S||_HS^2", _bab_proxy, 8),
    Check("bab_kernel_vs_direct", "kernel path equals direct operator composition", _bab_paths, 8),
]
INFO_CHECKS = {"bab_fs_idempotency": ("F_S F_S g = F_S g (informational)", _bab_idempotency)}


# tsm --------------------------------------------------------------------------------


def _sphere_quadrature(ctx):
    worst = 0.0
    for r in (0.5, 1.3):
        q = SphereQuad4.build(r)
        z = q.nodes
        worst = max(worst, abs(q.weights.sum() - 1.0), _max_abs(q.integrate(z)))
        # second moments r^2/4 delta_ab, odd third moments vanish
        m2 = np.einsum("k,ka,kb->ab", q.weights, z, z)
        worst = max(worst, _max_abs(m2 - np.eye(4) * r * r / 4))
        m3 = np.einsum("k,ka,kb,kc->abc", q.weights, z, z, z)
        worst = max(worst, _max_abs(m3))
    return worst


def _tsm_gaussian(ctx):
    g8 = Grid2(16, 8.0)
    f = QField4.from_function(g8, g8, gaussian4_fn)
    worst = 0.0
    for r in (0.3, 1.0, 2.0):
        v = tsm(f, (0.0, 0.0), (0.0, 0.0), r)
        worst = max(worst, _max_abs(v - np.array([np.exp(-np.pi * r * r), 0, 0, 0])))
    return worst


def _bump_report(ctx):
    grid = ctx.grid
    f = bump_field(grid, 0.5)
    w = bump_field(grid, 1.0)
    rng = np.random.default_rng(ctx.rng.integers(2**32))
    return support_theorem_check(f, 0.5, 0.2, witness=w, rng=rng)


def _support_forward(ctx):
    return _bump_report(ctx).forward_max


def _support_converse(ctx):
    rep = _bump_report(ctx)
    return rep.converse_max, f"witness B_1(0) bump; best point (p, q, s) = {rep.converse_point}"


def _support_gaussian(ctx):
    g8 = Grid2(16, 8.0)
    f = QField4.from_function(g8, g8, gaussian4_fn)
    return support_theorem_check(f, 3.3, 0.2, rng=ctx.rng).forward_max


def _random_callable4(rng):
    c = rng.standard_normal((3, 4))
    mu = rng.uniform(-0.4, 0.4, (3, 4))

    def fn(a1, a2, b1, b2):
        a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (a1, a2, b1, b2)))
        out = np.zeros(a1.shape + (4,))
        for ck, m in zip(c, mu):
            d = (a1 - m[0]) ** 2 + (a2 - m[1]) ** 2 + (b1 - m[2]) ** 2 + (b2 - m[3]) ** 2
            out += np.exp(-np.pi * d)[..., None] * ck
        return out

    return fn


def _tsm_sides(fun):
    def run(ctx):
        worst = 0.0
        for _ in range(ctx.cfg.count("tsm_split")):
            fn = _random_callable4(ctx.rng)
            p, q = ctx.rng.uniform(-1, 1, 2), ctx.rng.uniform(-1, 1, 2)
            lhs, rhs = fun(fn, p, q, float(ctx.rng.uniform(0.2, 1.5)))
            worst = max(worst, _max_abs(lhs - rhs))
        return worst

    return run


TSM_CHECKS = [
    Check("sphere_quadrature", "weights sum to 1, moments up to degree 3 exact", _sphere_quadrature),
    Check("tsm_gaussian_center", "mean of e^{-pi(|p|^2+|q|^2)} at the origin is e^{-pi r^2}", _tsm_gaussian, fixed_grid=True),
    Check("support_forward_bump", "supp f in B_r(0) implies vanishing means for s > |(p,q)| + r", _support_forward, 8),
    Check("support_converse_witness", "a field not supported in B_r(0) has a nonzero admissible mean", _support_converse, 8, relation=">="),
    Check("support_forward_gaussian", "effective support of the Gaussian (below 1e-14 outside B_3.3)", _support_gaussian, fixed_grid=True),
    Check("tsm_split_reduction", "quaternion mean = two complex twisted means of the split parts", _tsm_sides(split_reduction_sides)),
    Check("tsm_reflection", "mean of f at the reflected centre = mean of the reflected f", _tsm_sides(reflection_sides)),
]

CHECKS = {
    "qft": QFT_CHECKS,
    "wigner": WIGNER_CHECKS,
    "weyl": WEYL_CHECKS,
    "group-weyl": GROUP_CHECKS,
    "bab": BAB_CHECKS,
    "tsm": TSM_CHECKS,
}


# -- runner ---------------------------------------------------------------------------


def _check_seed(seed: int, name: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), zlib.crc32(name.encode())])


def threads_from_env() -> int:
    raw = os.environ.get("QWEYL_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"QWEYL_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ValueError("QWEYL_THREADS must be >= 1")
    return k


def _skip(check: Check, suite: str, tol: float, why: str) -> CheckRecord:
    return CheckRecord(check.name, check.anchor, None, tol, check.relation, None, f"skipped: {why}", suite)


def _run_one(check: Check, suite: str, cfg: SuiteConfig, grid: Grid2, deadline: float | None) -> CheckRecord:
    tol = cfg.tol(check.name) if check.name in DEFAULT_TOLERANCES else 0.0
    if deadline is not None and time.monotonic() > deadline:
        return _skip(check, suite, tol, "budget")
    if not check.fixed_grid:
        if grid.n < max(check.min_n, MIN_N[suite]):
            return _skip(check, suite, tol, "below minimum n")
        if check.max_n is not None and grid.n > check.max_n:
            return _skip(check, suite, tol, "above the 4D size limit")
    ctx = Context(cfg, grid, np.random.default_rng(_check_seed(cfg.seed, check.name)))
    t0 = time.perf_counter()
    note = None
    try:
        out = check.fn(ctx)
        if isinstance(out, tuple):
            defect, note = out
        else:
            defect = out
        defect = float(defect)
        passed = _judge(defect, tol, check.relation)
        status = "pass" if passed else "fail"
    except Exception as e:  # a crashing check is a failed record, not a crashed run
        defect, passed, status = None, False, f"error: {type(e).__name__}: {e}"
    wall = time.perf_counter() - t0
    return CheckRecord(check.name, check.anchor, defect, tol, check.relation, passed, status, suite, note, wall)


def run_suite(cfg: SuiteConfig, threads: int | None = None) -> SuiteReport:
    """Run the configured suite(s); records come back in declaration order."""
    cfg.validate()
    threads = threads if threads is not None else threads_from_env()
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    jobs = []
    for s in names:
        grid = cfg.grid_for(s)
        for c in CHECKS[s]:
            jobs.append((c, s, grid))
    deadline = time.monotonic() + cfg.budget if cfg.budget is not None else None
    if threads <= 1:
        records = [_run_one(c, s, cfg, g, deadline) for c, s, g in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(_run_one, c, s, cfg, g, deadline) for c, s, g in jobs]
            records = [f.result() for f in futs]
    return SuiteReport(cfg.suite, cfg.seed, records)


def run_info_checks(cfg: SuiteConfig) -> dict:
    """Informational measurements with no pass/fail meaning."""
    grid = cfg.grid_for("bab")
    out = {}
    for name, (anchor, fn) in INFO_CHECKS.items():
        ctx = Context(cfg, grid, np.random.default_rng(_check_seed(cfg.seed, name)))
        out[name] = {"anchor": anchor, "value": float(fn(ctx))}
    return out


# -- report emission -------------------------------------------------------------------

CSV_FIELDS = ["suite", "name", "anchor", "defect", "tolerance", "relation", "passed", "status", "note", "wall_time"]


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def render_report(report: SuiteReport, fmt: str = "json", timing: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(timing), indent=2, default=_json_default, allow_nan=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        cols = CSV_FIELDS if timing else CSV_FIELDS[:-1]
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in report.records:
            w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
        return buf.getvalue()
    if fmt == "text":
        lines = [f"qweyl report (schema {report.schema_version}) suite={report.suite} seed={report.seed}"]
        for r in report.records:
            glyph = {True: "[PASS]", False: "[FAIL]", None: "[SKIP]"}[r.passed]
            d = "-" if r.defect is None else f"{r.defect:.3e}"
            line = f"{glyph} {r.suite:<10} {r.name:<34} {d:>10} {r.relation} {r.tolerance:.1e}  {r.status}"
            if timing and r.wall_time is not None:
                line += f"  ({r.wall_time:.2f}s)"
            lines.append(line)
            if r.note:
                lines.append(f"       note: {r.note}")
        s = report.summary
        lines.append(f"total {s['total']}  passed {s['passed']}  failed {s['failed']}  skipped {s['skipped']}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: SuiteReport, path=None, fmt: str = "json", timing: bool = False) -> str:
    """Render the report and write it to ``path`` (if given); returns the rendered text."""
    text = render_report(report, fmt, timing)
    if path is not None:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as e:
            raise OSError(f"cannot write report to {path}: {e}") from e
    return text


def parse_report(text: str) -> SuiteReport:
    return SuiteReport.from_dict(json.loads(text))


__all__ = [
    "SCHEMA_VERSION",
    "SUITES",
    "SuiteConfig",
    "CheckRecord",
    "SuiteReport",
    "run_suite",
    "run_info_checks",
    "render_report",
    "emit_report",
    "parse_report",
    "defaults_document",
    "threads_from_env",
]
