"""Quaternion twisted spherical means on R^4 = R^2 x R^2.

    (f x mu_r)(p, q) = int_{|(u,v)|=r} e^{pi i (u1 q1 - p1 v1)} f(p - u, q - v) e^{pi j (u2 q2 - p2 v2)} dmu_r

with mu_r the normalised surface measure.  The sphere is integrated with a
Hopf-coordinate product rule:

    (u1, v1) = r cos(eta) (cos t1, sin t1),  (u2, v2) = r sin(eta) (cos t2, sin t2),

where s = sin^2(eta) is uniform on [0, 1] for the surface measure, so
Gauss-Legendre in s and the trapezoid rule in t1, t2 are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid2, QField4
from .quaternion import from_split_coeffs, iexp, jexp, qabs, qmul, split_coeffs

DEFAULT_NODES = (16, 16, 16)


@dataclass(frozen=True)
class SphereQuad4:
    """Nodes (u1, u2, v1, v2) on the 3-sphere of radius r with weights summing to one."""

    r: float
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, r: float, counts=DEFAULT_NODES) -> "SphereQuad4":
        if r < 0:
            raise ValueError("radius must be non-negative")
        ns, n1, n2 = (int(c) for c in counts)
        x, w = np.polynomial.legendre.leggauss(ns)
        s = (x + 1) / 2
        ws = w / 2
        t1 = 2 * np.pi * np.arange(n1) / n1
        t2 = 2 * np.pi * np.arange(n2) / n2
        S, T1, T2 = np.meshgrid(s, t1, t2, indexing="ij")
        W = np.broadcast_to(ws[:, None, None], S.shape) / (n1 * n2)
        c = np.sqrt(1 - S)
        sn = np.sqrt(S)
        u1 = r * c * np.cos(T1)
        v1 = r * c * np.sin(T1)
        u2 = r * sn * np.cos(T2)
        v2 = r * sn * np.sin(T2)
        nodes = np.stack([u1, u2, v1, v2], -1).reshape(-1, 4)
        return cls(float(r), nodes, W.reshape(-1).copy())

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """sum_k w_k values[k] (values may carry trailing axes)."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _evaluate(f, pts: np.ndarray) -> np.ndarray:
    if isinstance(f, QField4):
        return f.evaluate(pts)
    # a plain callable fn(a1, a2, b1, b2) -> (..., 4)
    return np.asarray(f(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]), float)


def _check_radius(f, r: float):
    if isinstance(f, QField4):
        lim = min(f.grid_a.l, f.grid_b.l) / 2
        if r >= lim:
            raise ValueError(f"radius {r} too large for the domain (needs r < l/2 = {lim})")


def tsm(f, p, q, r: float, quad: SphereQuad4 | None = None, counts=DEFAULT_NODES) -> np.ndarray:
    """Quaternion twisted spherical mean of f at (p, q), radius r; returns a quaternion array (4,).

    ``f`` is a QField4 over (p, q) (its closed form is used when present,
    otherwise trigonometric interpolation) or a callable fn(p1, p2, q1, q2).
    """
    _check_radius(f, r)
    quad = quad if quad is not None and quad.r == r else SphereQuad4.build(r, counts)
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    u1, u2, v1, v2 = quad.nodes.T
    pts = np.stack([p[0] - u1, p[1] - u2, q[0] - v1, q[1] - v2], -1)
    vals = _evaluate(f, pts)
    left = iexp(np.pi * (u1 * q[0] - p[0] * v1))
    right = jexp(np.pi * (u2 * q[1] - p[1] * v2))
    return quad.integrate(qmul(qmul(left, vals), right))


def classical_tsm(F, p, q, r: float, quad: SphereQuad4 | None = None, counts=DEFAULT_NODES) -> complex:
    """Complex twisted spherical mean int e^{pi i (u.q - p.v)} F(p - u, q - v) dmu_r.

    ``F`` is a callable returning complex values.
    """
    quad = quad if quad is not None and quad.r == r else SphereQuad4.build(r, counts)
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    u1, u2, v1, v2 = quad.nodes.T
    vals = np.asarray(F(p[0] - u1, p[1] - u2, q[0] - v1, q[1] - v2), complex)
    ph = np.exp(1j * np.pi * (u1 * q[0] + u2 * q[1] - p[0] * v1 - p[1] * v2))
    return complex(np.sum(quad.weights * ph * vals))


def lambda_tilde(points) -> np.ndarray:
    """(p1, p2, q1, q2) -> (p1, -p2, q1, -q2) applied to each point."""
    pts = np.array(points, dtype=float, copy=True).reshape(-1, 4)
    pts[:, 1] *= -1
    pts[:, 3] *= -1
    return pts


def split_callables(fn):
    """Complex split coefficients (c+, c-) of a quaternion-valued callable."""

    def cp(*a):
        return split_coeffs(np.asarray(fn(*a), float))[0]

    def cm(*a):
        return split_coeffs(np.asarray(fn(*a), float))[1]

    return cp, cm


def _swap(a1, a2, b1, b2):
    return a1, b2, b1, a2


def split_reduction_sides(fn, p, q, r: float, counts=DEFAULT_NODES):
    """Both sides of the reduction of the quaternion mean to two complex means.

    Writing f = c+ (1+k)/2 + c- (1-k)/2 and S(a1, a2, b1, b2) = (a1, b2, b1, a2):

        tsm(f)(p, q) = T(c+ o S)(S(p, q)) (1+k)/2 + T(c-)(p, q) (1-k)/2

    where T is the complex twisted spherical mean.  The j-phase passes through
    (1+k) as a conjugated i-phase, which flips the sign of the second
    symplectic pair; S turns that form back into the standard one.
    """
    quad = SphereQuad4.build(r, counts)
    lhs = tsm(fn, p, q, r, quad)
    cp, cm = split_callables(fn)
    cps = lambda a1, a2, b1, b2: cp(*_swap(a1, a2, b1, b2))
    sp = np.array(_swap(*np.concatenate([np.asarray(p, float), np.asarray(q, float)])))
    tp = classical_tsm(cps, sp[:2], sp[2:], r, quad)
    tm = classical_tsm(cm, p, q, r, quad)
    return lhs, from_split_coeffs(tp, tm)


def reflect_args(fn):
    """(R f)(a1, a2, b1, b2) = f(a1, -a2, b1, -b2), the argument reflection matching lambda_tilde."""

    def out(a1, a2, b1, b2):
        return fn(a1, -np.asarray(a2), b1, -np.asarray(b2))

    return out


def reflection_sides(fn, p, q, r: float, counts=DEFAULT_NODES):
    """tsm(f) at the reflected centre against tsm(R f) at the original centre.

    Both phases are invariant under reflecting (u2, v2) together with
    (p2, q2), so tsm(f)(lambda_tilde(p, q)) = tsm(R f)(p, q) for every r.  Hence the
    means of f vanish on lambda_tilde(L) exactly when those of R f vanish on L.
    """
    quad = SphereQuad4.build(r, counts)
    pt = lambda_tilde(np.concatenate([np.asarray(p, float), np.asarray(q, float)]))[0]
    lhs = tsm(fn, pt[:2], pt[2:], r, quad)
    rhs = tsm(reflect_args(fn), p, q, r, quad)
    return lhs, rhs


# -- test fields ------------------------------------------------------------------


def bump_fn(radius: float, center=(0.0, 0.0, 0.0, 0.0), coeff=(1.0, 0.0, 0.0, 0.0)):
    """exp(-1/(1 - |z - c|^2 / radius^2)) inside the ball, 0 outside, times a quaternion coefficient."""
    c = np.asarray(center, float)
    coeff = np.asarray(coeff, float)

    def fn(a1, a2, b1, b2):
        a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (a1, a2, b1, b2)))
        d2 = ((a1 - c[0]) ** 2 + (a2 - c[1]) ** 2 + (b1 - c[2]) ** 2 + (b2 - c[3]) ** 2) / radius**2
        inside = d2 < 1
        val = np.zeros(a1.shape)
        val[inside] = np.exp(-1.0 / (1.0 - d2[inside]))
        return val[..., None] * coeff

    return fn


def gaussian4_fn(a1, a2, b1, b2):
    a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (a1, a2, b1, b2)))
    out = np.zeros(a1.shape + (4,))
    out[..., 0] = np.exp(-np.pi * (a1**2 + a2**2 + b1**2 + b2**2))
    return out


def bump_field(grid: Grid2, radius: float, center=(0.0, 0.0, 0.0, 0.0), coeff=(1.0, 0.0, 0.0, 0.0)) -> QField4:
    return QField4.from_function(grid, grid, bump_fn(radius, center, coeff))


def support_radius(f: QField4, threshold: float = 1e-14) -> float:
    """Smallest radius containing every lattice sample with modulus above ``threshold``."""
    a1, a2, b1, b2 = np.meshgrid(f.grid_a.points, f.grid_a.points, f.grid_b.points, f.grid_b.points, indexing="ij")
    big = qabs(f.values) > threshold
    if not big.any():
        return 0.0
    return float(np.sqrt(a1**2 + a2**2 + b1**2 + b2**2)[big].max())


@dataclass(frozen=True)
class SupportReport:
    forward_max: float  # max |tsm| over admissible (centre, s) for f
    samples: int
    converse_max: float | None  # max |tsm| of the witness over admissible points
    converse_point: tuple | None


def _admissible(rng, r: float, margin: float, s_max: float, centers: int, radii: int, center_scale: float):
    out = []
    for _ in range(centers):
        c = rng.normal(size=4)
        c *= rng.uniform(0, center_scale) / np.linalg.norm(c)
        lo = float(np.linalg.norm(c)) + r + margin
        if lo >= s_max:
            continue
        for s in np.linspace(lo, s_max, radii, endpoint=False):
            out.append((c, float(s)))
    return out


def support_theorem_check(
    f: QField4,
    r: float,
    margin: float,
    witness: QField4 | None = None,
    rng: np.random.Generator | None = None,
    centers: int = 6,
    radii: int = 4,
    threshold: float = 1e-14,
    counts=DEFAULT_NODES,
) -> SupportReport:
    """Forward direction of the support theorem and, optionally, the converse on a witness.

    f must be supported in B_r(0) (checked on the lattice against
    ``threshold``).  Centres (p, q) and radii s with |(p,q)| + r + margin < s < l/2
    are sampled; the forward value is the largest |tsm| seen.  The witness,
    not supported in B_r(0), should give a clearly nonzero mean at some
    admissible point; the search includes the centre (0, 0).
    """
    if support_radius(f, threshold) > r:
        raise ValueError(f"f is not supported in B_{r}(0) at threshold {threshold}")
    rng = rng if rng is not None else np.random.default_rng(0)
    s_max = min(f.grid_a.l, f.grid_b.l) / 2
    pts = _admissible(rng, r, margin, s_max, centers, radii, max(0.0, s_max - r - margin))
    pts.insert(0, (np.zeros(4), r + margin + 0.5 * max(0.0, s_max - r - margin)))
    fwd = 0.0
    for c, s in pts:
        fwd = max(fwd, float(qabs(tsm(f, c[:2], c[2:], s, counts=counts))))
    conv = None
    conv_pt = None
    if witness is not None:
        if support_radius(witness, threshold) <= r:
            raise ValueError("the witness must not be supported in B_r(0)")
        conv = 0.0
        s_lo = r + 1e-9
        for s in np.linspace(s_lo, s_max, 2 * radii, endpoint=False):
            val = float(qabs(tsm(witness, (0.0, 0.0), (0.0, 0.0), s, counts=counts)))
            if val > conv:
                conv, conv_pt = val, (0.0, 0.0, 0.0, 0.0, float(s))
    return SupportReport(fwd, len(pts), conv, conv_pt)


__all__ = [
    "SphereQuad4",
    "tsm",
    "classical_tsm",
    "lambda_tilde",
    "split_callables",
    "split_reduction_sides",
    "reflect_args",
    "reflection_sides",
    "bump_fn",
    "bump_field",
    "gaussian4_fn",
    "support_radius",
    "SupportReport",
    "support_theorem_check",
]
