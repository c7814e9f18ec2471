"""Command-line interface: ``qweyl <verb> [options]``.

Global flags (--config, --seed, --out, --format, --grid-n, --domain-l) may be
given before or after the verb.  Verbs that run checks print or write a
report and exit 0 only when every non-skipped check passes; verbs that
produce fields write qf2/qf4 files.  QWEYL_THREADS caps how many checks the
suite runner executes concurrently.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .fields import gaussian, gaussian4, random_field
from .grid import Grid2, QField2, QField4, read_field, read_mask, write_field, write_mask
from .heisenberg import (
    ProjectionPair,
    ea_fs_hs_bound,
    gram_schmidt,
    inversion_defect,
    near_one_count,
    plancherel_defect,
    random_g,
)
from .qft import qft_forward, qft_inverse
from .suite import (
    DEFAULT_TOLERANCES,
    SUITES,
    CheckRecord,
    SuiteConfig,
    SuiteReport,
    defaults_document,
    emit_report,
    run_suite,
    threads_from_env,
)
from .tsm import bump_field, support_theorem_check, tsm
from .weyl import (
    WeylSymbol,
    divergence_threshold,
    hs_identity_defect,
    increments,
    symbol_grids,
    trace_bound_check,
    unboundedness_probe,
    weak_form_defect,
)
from .wigner import fourier_wigner, moyal_sides, wigner

GLOBAL_FLAGS = ("config", "seed", "out", "format", "grid_n", "domain_l")


class UsageError(Exception):
    pass


# -- argument parsing ----------------------------------------------------------------


def _global_parent(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=d, help="JSON config file (flags override its fields)")
    g.add_argument("--seed", type=int, default=d, help="random seed (default 1)")
    g.add_argument("--out", default=d, help="output path (default: stdout for reports)")
    g.add_argument("--format", choices=("json", "csv", "text"), default=d, help="report format")
    g.add_argument("--grid-n", dest="grid_n", type=int, default=d, help="points per axis")
    g.add_argument("--domain-l", dest="domain_l", type=float, default=d, help="domain half-width")
    return p


def _floats(text: str, k: int | None = None) -> list:
    try:
        v = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if k is not None and len(v) != k:
        raise argparse.ArgumentTypeError(f"expected {k} numbers, got {len(v)}")
    return v


def _pair(text: str) -> list:
    return _floats(text, 2)


def _kv(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    parent = _global_parent(suppress=True)
    root = argparse.ArgumentParser(
        prog="qweyl",
        description="Quaternion Fourier, Wigner and Weyl transforms on grids, with verification suites.",
        parents=[_global_parent(suppress=False)],
    )
    sub = root.add_subparsers(dest="verb", required=True, metavar="verb")

    p = sub.add_parser("suite", parents=[parent], help="run a verification suite and emit a report")
    p.add_argument("name", nargs="?", choices=SUITES + ("all",), help="suite to run (default from config, else all)")
    p.add_argument("--budget", type=float, help="wall-time cap in seconds; later checks are skipped")
    p.add_argument("--record-timing", action="store_true", help="include wall times (reports are then not reproducible)")
    p.add_argument("--trials", type=_kv, action="append", default=[], metavar="KEY=N", help="override a trial count")
    p.add_argument("--tol", type=_kv, action="append", default=[], metavar="KEY=X", help="override a tolerance")

    sub.add_parser("defaults", parents=[parent], help="print the embedded defaults as JSON")

    p = sub.add_parser("sample", parents=[parent], help="write a test field (qf2/qf4) or mask file")
    p.add_argument(
        "kind",
        choices=("gaussian", "random", "gaussian4", "random-g", "bump4", "symbol-gaussian", "mask"),
        help="what to write",
    )
    p.add_argument("--values", default="quaternion", choices=("quaternion", "complex", "minus", "plus", "j"))
    p.add_argument("--even-x1", action="store_true", help="random field even in the first variable")
    p.add_argument("--radius", type=float, default=0.5, help="bump radius")
    p.add_argument("--density", type=float, default=0.1, help="mask density per factor")

    p = sub.add_parser("qft", parents=[parent], help="two-sided quaternion Fourier transform of a qf2 field")
    p.add_argument("--in", dest="inp", required=True, help="input qf2 file")
    p.add_argument("--direction", choices=("fwd", "inv"), default="fwd")
    p.add_argument("--path", choices=("split", "direct"), default="split")

    p = sub.add_parser("wigner", parents=[parent], help="Wigner transform W(f, g) as a qf4 file")
    p.add_argument("--f", required=True)
    p.add_argument("--g", help="second field (default: f)")

    p = sub.add_parser("fourier-wigner", parents=[parent], help="Fourier-Wigner transform V(f, g) as a qf4 file")
    p.add_argument("--f", required=True)
    p.add_argument("--g", help="second field (default: f)")

    p = sub.add_parser("moyal", parents=[parent], help="Moyal identity defect for four fields")
    for name in ("f1", "g1", "f2", "g2"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--no-check", action="store_true", help="skip the even-in-x1 hypothesis check")

    p = sub.add_parser("weyl-op", parents=[parent], help="checks on the Weyl operator of a symbol")
    p.add_argument("--symbol", required=True, help="qf4 symbol over (x, xi)")
    p.add_argument("--check", default="hs", help="comma list of hs, trace, weakform")
    p.add_argument("--f", help="field for weakform (default Gaussian)")
    p.add_argument("--g", help="field for weakform (default Gaussian)")

    p = sub.add_parser("galpha", parents=[parent], help="truncated norms of F(f_alpha) over growing domains")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rprime", type=float, default=1.5)
    p.add_argument("--domains", type=_floats, default=[4.0, 8.0, 16.0])
    p.add_argument("--a", type=float, default=0.5, help="cube half-width")

    p = sub.add_parser("group-weyl", parents=[parent], help="checks on the group-type Weyl transform W(g)")
    p.add_argument("--g", required=True, help="qf4 field g(x, y)")
    p.add_argument("--check", default="inversion,plancherel", help="comma list of inversion, plancherel")

    p = sub.add_parser("bab", parents=[parent], help="Hilbert-Schmidt bound for E_A F_S on random families")
    p.add_argument("--mask-a", help="mask file (two factor bitmaps); random masks when omitted")
    p.add_argument("--rank", type=int, default=1, help="N, the size of the orthonormal family")
    p.add_argument("--trials", type=int, default=50)

    p = sub.add_parser("tsm", parents=[parent], help="quaternion twisted spherical means")
    p.add_argument("--f", required=True, help="qf4 field over (p, q), or bump:R, or gaussian")
    p.add_argument("--r", type=float, required=True, help="radius (support: the ball radius)")
    p.add_argument("--p", type=_pair, default=[0.0, 0.0])
    p.add_argument("--q", type=_pair, default=[0.0, 0.0])
    p.add_argument("--check", choices=("none", "support"), default="none")
    p.add_argument("--margin", type=float, default=0.2)
    p.add_argument("--witness", help="field not supported in B_r(0) (same forms as --f), for the converse direction")
    return root


# -- config -----------------------------------------------------------------------------


def make_config(args) -> SuiteConfig:
    base = {}
    if getattr(args, "config", None):
        base = SuiteConfig.load(args.config).to_dict()
    for k in GLOBAL_FLAGS[1:]:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    if getattr(args, "verb", None) == "suite":
        if args.name:
            base["suite"] = args.name
        if args.budget is not None:
            base["budget"] = args.budget
        if args.record_timing:
            base["record_timing"] = True
        trials = dict(base.get("trials", {}))
        for k, v in args.trials:
            trials[k] = int(v)
        tols = dict(base.get("tolerances", {}))
        for k, v in args.tol:
            tols[k] = float(v)
        base["trials"], base["tolerances"] = trials, tols
    return SuiteConfig.from_dict(base)


def _grid(cfg: SuiteConfig, suite: str = "qft") -> Grid2:
    return cfg.grid_for(suite)


def _read2(path) -> QField2:
    f = read_field(path)
    if not isinstance(f, QField2):
        raise UsageError(f"{path} is not a 2D (qf2) field")
    return f


def _read4(path) -> QField4:
    f = read_field(path)
    if not isinstance(f, QField4):
        raise UsageError(f"{path} is not a 4D (qf4) field")
    return f


def _need_out(cfg: SuiteConfig, verb: str) -> str:
    if not cfg.out:
        raise UsageError(f"`qweyl {verb}` writes a field file; pass --out PATH")
    return cfg.out


def _record(verb, name, anchor, defect, tol_key, relation="<=", note=None, tol=None) -> CheckRecord:
    t = DEFAULT_TOLERANCES[tol_key] if tol is None else tol
    ok = defect is not None and math.isfinite(defect) and (defect <= t if relation == "<=" else defect >= t)
    return CheckRecord(name, anchor, float(defect), t, relation, ok, "pass" if ok else "fail", verb, note)


def _emit(cfg: SuiteConfig, report: SuiteReport) -> int:
    text = emit_report(report, cfg.out, cfg.format, cfg.record_timing)
    if cfg.out is None:
        sys.stdout.write(text)
    return 0 if report.ok else 1


def _emit_json(cfg: SuiteConfig, doc: dict) -> int:
    text = json.dumps(doc, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# -- verbs ------------------------------------------------------------------------------


def cmd_suite(args, cfg):
    report = run_suite(cfg, threads_from_env())
    return _emit(cfg, report)


def cmd_defaults(args, cfg):
    return _emit_json(cfg, defaults_document())


def cmd_sample(args, cfg):
    out = _need_out(cfg, "sample")
    rng = np.random.default_rng(cfg.seed)
    k = args.kind
    if k == "mask":
        grid = _grid(cfg, "bab")
        m = [rng.random((grid.n, grid.n)) < args.density for _ in range(2)]
        write_mask(out, grid, m[0], m[1])
        return 0
    if k in ("random-g",):
        f = random_g(_grid(cfg, "group-weyl"), rng, "j" if args.values == "j" else "quaternion")
    elif k == "gaussian4":
        f = gaussian4(_grid(cfg, "tsm"))
    elif k == "bump4":
        f = bump_field(_grid(cfg, "tsm"), args.radius)
    elif k == "symbol-gaussian":
        xg, sg = symbol_grids(_grid(cfg, "weyl"))

        def fn(x1, x2, s1, s2):
            x1, x2, s1, s2 = np.broadcast_arrays(x1, x2, s1, s2)
            v = np.zeros(x1.shape + (4,))
            v[..., 0] = np.exp(-np.pi * (x1**2 + x2**2 + s1**2 + s2**2))
            return v

        f = QField4.from_function(xg, sg, fn)
    elif k == "gaussian":
        f = gaussian(_grid(cfg, "qft"))
    else:
        f = random_field(_grid(cfg, "qft"), rng, kind=args.values, even_x1=args.even_x1)
    write_field(out, f)
    return 0


def cmd_qft(args, cfg):
    f = _read2(args.inp)
    out = _need_out(cfg, "qft")
    F = qft_forward(f, args.path) if args.direction == "fwd" else qft_inverse(f, args.path)
    write_field(out, F)
    return 0


def _pair_fields(args):
    f = _read2(args.f)
    g = _read2(args.g) if args.g else f
    return f, g


def cmd_wigner(args, cfg):
    f, g = _pair_fields(args)
    write_field(_need_out(cfg, "wigner"), wigner(f, g).data)
    return 0


def cmd_fourier_wigner(args, cfg):
    f, g = _pair_fields(args)
    write_field(_need_out(cfg, "fourier-wigner"), fourier_wigner(f, g))
    return 0


def cmd_moyal(args, cfg):
    fs = [_read2(getattr(args, k)) for k in ("f1", "g1", "f2", "g2")]
    lhs, rhs = moyal_sides(*fs, check=not args.no_check)
    note = f"lhs {lhs.array.tolist()}, rhs {rhs.array.tolist()}"
    rec = _record("moyal", "moyal_defect", "<W(f1,g1), W(f2,g2)> = <f1, f2 <conj g2, conj g1>>", (lhs - rhs).norm(), "moyal_even_fields", note=note)
    return _emit(cfg, SuiteReport("moyal", cfg.seed, [rec]))


def cmd_weyl_op(args, cfg):
    s = WeylSymbol.from_field(_read4(args.symbol))
    recs = []
    for c in [t.strip() for t in args.check.split(",") if t.strip()]:
        if c == "hs":
            recs.append(_record("weyl-op", "hs_identity_defect", "||W_sigma||_S2^2 = ||sigma||_2^2", hs_identity_defect(s), "weyl_hs_random"))
        elif c == "trace":
            nuc, l1 = trace_bound_check(s)
            note = f"nuclear {nuc:.12g}, ||sigma||_1 {l1:.12g}"
            recs.append(_record("weyl-op", "trace_bound", "||W_sigma||_S1 <= ||sigma||_1", max(0.0, nuc / l1 - 1), "weyl_trace_bound_random", note=note))
        elif c == "weakform":
            grid = s.field_grid
            f = _read2(args.f) if args.f else gaussian(grid)
            g = _read2(args.g) if args.g else gaussian(grid)
            recs.append(_record("weyl-op", "weak_form_defect", "<W_sigma f, g> = int sigma W(f,g)", weak_form_defect(s, f, g), "weak_form_random"))
        else:
            raise UsageError(f"unknown weyl-op check {c!r} (hs, trace, weakform)")
    return _emit(cfg, SuiteReport("weyl-op", cfg.seed, recs))


def cmd_galpha(args, cfg):
    v = unboundedness_probe(args.alpha, args.rprime, args.domains, args.a)
    inc = increments(v)
    thr = divergence_threshold(args.rprime)
    note = f"domains {args.domains}, norms {[round(x, 10) for x in v]}, increments {[round(x, 10) for x in inc]}"
    if not inc:
        raise UsageError("galpha needs at least two domains")
    if args.alpha > thr:
        value = inc[-1] if all(d > 0 for d in inc) else min(inc)
        rec = _record("galpha", "galpha_divergent_increment", "alpha > 1 - 1/r': truncated norms keep growing", value, "galpha_divergent_increment", ">=", note)
    else:
        rec = _record("galpha", "galpha_convergent_increment", "alpha < 1 - 1/r': truncated norms converge", abs(inc[-1]), "galpha_convergent_increment", note=note)
    return _emit(cfg, SuiteReport("galpha", cfg.seed, [rec]))


def cmd_group_weyl(args, cfg):
    g = _read4(args.g)
    recs = []
    for c in [t.strip() for t in args.check.split(",") if t.strip()]:
        if c == "inversion":
            recs.append(_record("group-weyl", "inversion_defect", "g(x,y) = tr(W(g) rho(-x,-y) P_-)", inversion_defect(g), "weyl_inversion"))
        elif c == "plancherel":
            recs.append(_record("group-weyl", "plancherel_defect", "||W(g) P_-||_HS^2 = ||g||_2^2", plancherel_defect(g), "group_weyl_plancherel"))
        else:
            raise UsageError(f"unknown group-weyl check {c!r} (inversion, plancherel)")
    return _emit(cfg, SuiteReport("group-weyl", cfg.seed, recs))


def cmd_bab(args, cfg):
    rng = np.random.default_rng(cfg.seed)
    if args.rank < 1:
        raise UsageError("--rank must be >= 1")
    if args.mask_a:
        grid, m13, m24 = read_mask(args.mask_a)
    else:
        grid, m13, m24 = _grid(cfg, "bab"), None, None
    worst_ratio, worst_proxy = 0.0, 0.0
    for _ in range(args.trials):
        if m13 is None:
            a = rng.random((grid.n, grid.n)) < 0.1
            b = rng.random((grid.n, grid.n)) < 0.1
        else:
            a, b = m13, m24
        S = gram_schmidt([random_field(grid, rng, spread=0.6) for _ in range(args.rank)])
        pair = ProjectionPair(grid, a, b, tuple(S))
        hs, bound = ea_fs_hs_bound(pair)
        if bound > 0:
            worst_ratio = max(worst_ratio, (hs - bound) / bound)
        worst_proxy = max(worst_proxy, near_one_count(pair) - hs)
    recs = [
        _record("bab", "bab_hs_bound", "||E_A F_S||_HS^2 <= m(A) N^2", max(worst_ratio, 0.0), "bab_hs_bound", note=f"{args.trials} trials, N = {args.rank}"),
        _record("bab", "bab_dimension_proxy", "dim R(E_A cap F_S) <= ||E_A F_S||_HS^2", max(worst_proxy, 0.0), "bab_dimension_proxy"),
    ]
    return _emit(cfg, SuiteReport("bab", cfg.seed, recs))


def _tsm_input(spec: str, cfg: SuiteConfig) -> QField4:
    """A qf4 file, or a closed form: ``bump:R`` (bump of radius R) or ``gaussian``.

    Closed forms are evaluated exactly at the sphere nodes; sampled files go
    through trigonometric interpolation, whose leakage shows up in the
    support check.
    """
    if spec.startswith("bump:"):
        return bump_field(_grid(cfg, "tsm"), float(spec[5:]))
    if spec == "gaussian":
        return gaussian4(_grid(cfg, "tsm"))
    return _read4(spec)


def cmd_tsm(args, cfg):
    f = _tsm_input(args.f, cfg)
    if args.check == "support":
        w = _tsm_input(args.witness, cfg) if args.witness else None
        rep = support_theorem_check(f, args.r, args.margin, witness=w, rng=np.random.default_rng(cfg.seed))
        recs = [_record("tsm", "support_forward", "supp f in B_r(0) implies vanishing means", rep.forward_max, "support_forward_bump", note=f"{rep.samples} admissible samples")]
        if w is not None:
            recs.append(_record("tsm", "support_converse", "a witness outside B_r(0) has a nonzero mean", rep.converse_max, "support_converse_witness", ">=", note=f"best (p, q, s) = {rep.converse_point}"))
        return _emit(cfg, SuiteReport("tsm", cfg.seed, recs))
    v = tsm(f, args.p, args.q, args.r)
    return _emit_json(cfg, {"p": args.p, "q": args.q, "r": args.r, "value": [float(t) for t in v]})


COMMANDS = {
    "suite": cmd_suite,
    "defaults": cmd_defaults,
    "sample": cmd_sample,
    "qft": cmd_qft,
    "wigner": cmd_wigner,
    "fourier-wigner": cmd_fourier_wigner,
    "moyal": cmd_moyal,
    "weyl-op": cmd_weyl_op,
    "galpha": cmd_galpha,
    "group-weyl": cmd_group_weyl,
    "bab": cmd_bab,
    "tsm": cmd_tsm,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.verb](args, cfg)
    except (UsageError, ValueError, OSError) as e:
        print(f"qweyl {args.verb}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
