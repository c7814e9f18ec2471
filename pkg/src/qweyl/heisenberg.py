"""Quaternion Heisenberg-Weyl calculus: rho(x, y), W(g), P+-, inversion and the BAB engine.

    (rho(x,y) phi)(xi) = e^{2 pi i (x1 xi1 + x1 y1/2)} phi(xi + y) e^{2 pi j (x2 xi2 + x2 y2/2)}

The right j-phase makes rho(x, y) only real-linear, so operators here are
real matrices of size 4N x 4N (N = n^2 lattice points) acting on the
flattened field values, index (m1 n + m2) 4 + component.  Shifts are
periodic.  On self-dual grids (n = 4 l^2) the position lattice coincides
with its reciprocal, every phase is periodic over the box, and the
composition law, the inversion formula and the Plancherel identity hold to
rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import random_field
from .grid import Grid2, QField2, QField4, check_grid, inner, lp_norm
from .qft import centered_dft, split_transform
from .quaternion import (
    J,
    QMatrix,
    Quaternion,
    from_split_coeffs,
    iexp,
    jexp,
    left_matrix,
    qconj,
    qmul,
    right_matrix,
)

ONE_MINUS_K = np.array([1.0, 0.0, 0.0, -1.0])
ONE_PLUS_K = np.array([1.0, 0.0, 0.0, 1.0])
_RJ = right_matrix(J)


def _flat(f: QField2) -> np.ndarray:
    return f.values.reshape(-1)


def _field(grid: Grid2, v: np.ndarray) -> QField2:
    return QField2(grid, np.asarray(v).reshape(grid.n, grid.n, 4))


def _shift_index(grid: Grid2, y) -> tuple:
    return tuple(grid.lattice_index(float(t)) for t in y)


def _require_self_dual(grid: Grid2, what: str):
    if not grid.is_self_dual:
        raise ValueError(f"{what} needs a self-dual grid (n = 4 l^2), got {grid}")


# -- rho(x, y) -----------------------------------------------------------------


def rho_apply(x, y, f: QField2) -> QField2:
    """rho(x, y) f for any grid size (y must be a lattice vector)."""
    grid = f.grid
    k1, k2 = _shift_index(grid, y)
    x1, x2 = float(x[0]), float(x[1])
    y1, y2 = k1 * grid.h, k2 * grid.h
    xi = grid.points
    shifted = np.roll(f.values, (-k1, -k2), axis=(0, 1))
    left = iexp(2 * np.pi * (x1 * xi + x1 * y1 / 2))[:, None, :]
    right = jexp(2 * np.pi * (x2 * xi + x2 * y2 / 2))[None, :, :]
    return QField2(grid, qmul(qmul(left, shifted), right))


@dataclass(frozen=True)
class RhoOp:
    x: tuple
    y: tuple
    grid: Grid2
    matrix: np.ndarray

    def apply(self, f: QField2) -> QField2:
        check_grid(self.grid, f.grid)
        return _field(self.grid, self.matrix @ _flat(f))

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.abs(m.T @ m - np.eye(m.shape[0])).max())


def _block_matrix(grid: Grid2, blocks: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Real matrix with block (xi, xi + shift) = blocks[xi]; blocks (n, n, 4, 4), shift (2,) ints."""
    n = grid.n
    out = np.zeros((n, n, 4, n, n, 4))
    a = np.arange(n)
    r1 = a[:, None]
    r2 = a[None, :]
    c1 = (r1 + shift[0]) % n
    c2 = (r2 + shift[1]) % n
    out[r1, r2, :, c1, c2, :] = blocks
    return out.reshape(4 * n * n, 4 * n * n)


def rho(x, y, grid: Grid2) -> RhoOp:
    k = np.array(_shift_index(grid, y))
    x1, x2 = float(x[0]), float(x[1])
    y1, y2 = k * grid.h
    xi = grid.points
    li = left_matrix(iexp(2 * np.pi * (x1 * xi + x1 * y1 / 2)))  # (n, 4, 4)
    rj = right_matrix(jexp(2 * np.pi * (x2 * xi + x2 * y2 / 2)))
    blocks = np.einsum("apq,bqr->abpr", li, rj)
    return RhoOp((x1, x2), (float(y1), float(y2)), grid, _block_matrix(grid, blocks, k))


def _sandwich(m: np.ndarray, left_q, right_q) -> np.ndarray:
    """Blockwise q_left (.) q_right applied to the output of m."""
    b = left_matrix(left_q) @ right_matrix(right_q)
    n4 = m.shape[0]
    return np.einsum("pq,aqc->apc", b, m.reshape(n4 // 4, 4, n4)).reshape(n4, n4)


def composition_defect(u, v, x, y, grid: Grid2) -> float:
    """max over unit basis fields of ||rho(u,v) rho(x,y) phi - e^{pi i(x1v1-u1y1)} rho(u+x, v+y) phi e^{pi j(x2v2-u2y2)}||."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    lhs = rho(u, v, grid).matrix @ rho(x, y, grid).matrix
    rhs = rho(u + x, v + y, grid).matrix
    rhs = _sandwich(rhs, iexp(np.pi * (x[0] * v[0] - u[0] * y[0])), jexp(np.pi * (x[1] * v[1] - u[1] * y[1])))
    # basis fields delta_m e_c / h have unit norm; their images have norm ||column||
    return float(np.sqrt(((lhs - rhs) ** 2).sum(axis=0)).max())


# -- classical complex calculus on L^2_- ----------------------------------------


def classical_pi(x, y, grid: Grid2) -> np.ndarray:
    """Complex N x N matrix of (pi(x,y) c)(xi) = e^{2 pi i (x.xi + x.y/2)} c(xi + y)."""
    n = grid.n
    k = np.array(_shift_index(grid, y))
    y = k * grid.h
    x1, x2 = np.meshgrid(grid.points, grid.points, indexing="ij")
    ph = np.exp(2j * np.pi * (x[0] * x1 + x[1] * x2 + (x[0] * y[0] + x[1] * y[1]) / 2))
    out = np.zeros((n, n, n, n), complex)
    a = np.arange(n)
    r1, r2 = a[:, None], a[None, :]
    out[r1, r2, (r1 + k[0]) % n, (r2 + k[1]) % n] = ph
    return out.reshape(n * n, n * n)


def embed_minus(c: np.ndarray) -> np.ndarray:
    """Complex values c -> quaternion values c (1-k)/2 (the L^2_- copy of c)."""
    return from_split_coeffs(np.zeros_like(c), c)


def classical_agreement(x, y, grid: Grid2) -> float:
    """max entry defect between rho(x,y) on L^2_- and the complex pi(x,y)."""
    r = rho(x, y, grid).matrix
    p = classical_pi(np.asarray(x, float), y, grid)
    big = 0.0
    nn = grid.n * grid.n
    for unit in (1.0, 1j):
        c = np.eye(nn) * unit  # columns are basis vectors
        q = embed_minus(c.T)  # (basis, N, 4)
        lhs = np.einsum("rc,bc->br", r, q.reshape(nn, -1))
        rhs = embed_minus((p @ c).T).reshape(nn, -1)
        big = max(big, float(np.abs(lhs - rhs).max()))
    return big


def classical_composition_defect(u, v, x, y, grid: Grid2) -> float:
    """Complex composition law pi(u,v) pi(x,y) = e^{pi i (x.v - u.y)} pi(u+x, v+y)."""
    u, v, x, y = (np.asarray(t, float) for t in (u, v, x, y))
    lhs = classical_pi(u, v, grid) @ classical_pi(x, y, grid)
    rhs = np.exp(1j * np.pi * (x @ v - u @ y)) * classical_pi(u + x, v + y, grid)
    return float(np.abs(lhs - rhs).max())


# -- projections P+- ---------------------------------------------------------------


def _blockdiag(grid: Grid2, b: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(grid.n * grid.n), b)


def projection_minus(grid: Grid2) -> np.ndarray:
    """P_- phi = (phi - i phi j)/2 pointwise."""
    return _blockdiag(grid, (np.eye(4) - left_matrix(np.array([0, 1.0, 0, 0])) @ _RJ) / 2)


def projection_plus(grid: Grid2) -> np.ndarray:
    return _blockdiag(grid, (np.eye(4) + left_matrix(np.array([0, 1.0, 0, 0])) @ _RJ) / 2)


# -- W(g) ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupWeylOp:
    matrix: np.ndarray
    source: QField4
    grid: Grid2

    def apply(self, f: QField2) -> QField2:
        check_grid(self.grid, f.grid)
        return _field(self.grid, self.matrix @ _flat(f))


def _check_g(g: QField4) -> Grid2:
    check_grid(g.grid_a, g.grid_b, "x and y grids")
    return g.grid_a


def _assemble(gvals: np.ndarray, grid: Grid2, delta=None, gamma=None) -> np.ndarray:
    """sum_{x,y} h^4 e^{i delta(x1,y1)} g(x,y) rho(x,y) (.) e^{j gamma(x2,y2)} as a real matrix.

    For fixed y, the xi-row of the y-shift block is L(C) + R(j) L(S) with
    C = sum_x e^{i delta} g e^{i alpha} cos(beta + gamma), S likewise with sin.
    """
    n = grid.n
    h = grid.h
    pts = grid.points
    if delta is not None:
        gvals = qmul(iexp(delta)[:, None, :, None, :], gvals)
    alpha = 2 * np.pi * pts[:, None, None] * (pts[None, :, None] + pts[None, None, :] / 2)  # (x1, xi1, y1)
    beta = 2 * np.pi * pts[:, None, None] * (pts[None, :, None] + pts[None, None, :] / 2)  # (x2, xi2, y2)
    if gamma is not None:
        beta = beta + gamma[:, None, :]
    r1 = right_matrix(iexp(alpha))  # (x1, xi1, y1, 4, 4)
    g1 = np.einsum("akypq,abyzq->bkyzp", r1, gvals)  # (x2, xi1, y1, y2, 4)
    w = h**4
    c = w * np.einsum("bkyzp,bmz->kmyzp", g1, np.cos(beta))
    s = w * np.einsum("bkyzp,bmz->kmyzp", g1, np.sin(beta))
    blocks = left_matrix(c) + np.einsum("pq,kmyzqr->kmyzpr", _RJ, left_matrix(s))  # (xi1, xi2, y1, y2, 4, 4)
    out = np.zeros((n, n, 4, n, n, 4))
    a = np.arange(n)
    k = a - n // 2  # lattice index of y = -l + a h
    r1i = a[:, None, None, None]
    r2i = a[None, :, None, None]
    c1 = (r1i + k[None, None, :, None]) % n
    c2 = (r2i + k[None, None, None, :]) % n
    out[r1i, r2i, :, c1, c2, :] = blocks
    return out.reshape(4 * n * n, 4 * n * n)


def group_weyl(g: QField4) -> GroupWeylOp:
    """W(g) = sum_{x,y} h^4 g(x,y) rho(x,y), g on the left, x and y on the field lattice."""
    grid = _check_g(g)
    return GroupWeylOp(_assemble(g.values, grid), g, grid)


def group_weyl_direct(g: QField4) -> np.ndarray:
    """W(g) by summing the rho matrices one lattice point at a time (slow reference path)."""
    grid = _check_g(g)
    n = grid.n
    pts = grid.points
    out = np.zeros((4 * n * n, 4 * n * n))
    w = grid.h**4
    blk = left_matrix(g.values)
    for a1 in range(n):
        for a2 in range(n):
            for b1 in range(n):
                for b2 in range(n):
                    r = rho((pts[a1], pts[a2]), (pts[b1], pts[b2]), grid).matrix
                    out += w * np.kron(np.eye(n * n), blk[a1, a2, b1, b2]) @ r
    return out


def fourier_weyl(f: QField4, xi_p, xi_pp) -> np.ndarray:
    """sum h^4 e^{2 pi i (x1 xi1'' - y1 xi1')} f(x,y) rho(x,y) (.) e^{2 pi j (x2 xi2'' - y2 xi2')}."""
    grid = _check_g(f)
    pts = grid.points
    delta = 2 * np.pi * (pts[:, None] * float(xi_pp[0]) - pts[None, :] * float(xi_p[0]))
    gamma = 2 * np.pi * (pts[:, None] * float(xi_pp[1]) - pts[None, :] * float(xi_p[1]))
    return _assemble(f.values, grid, delta, gamma)


# -- traces -------------------------------------------------------------------------


def trace_minus(t: np.ndarray, grid: Grid2, basis: str = "delta") -> Quaternion:
    """tr(T P_-) over an orthonormal basis e (1-k)/sqrt(2) of L^2_-.

    ``basis`` is "delta" (normalised lattice deltas) or "fourier" (plane
    waves on the reciprocal lattice); the two should agree.
    """
    nn = grid.n * grid.n
    if basis == "delta":
        blocks = t.reshape(nn, 4, nn, 4)[np.arange(nn), :, np.arange(nn), :]  # (N, 4, 4)
        vals = blocks @ ONE_MINUS_K
        return Quaternion.from_array(0.5 * qmul(vals, ONE_PLUS_K).sum(axis=0))
    if basis == "fourier":
        _require_self_dual(grid, "the plane-wave basis")
        x1, x2 = grid.mesh()
        k1, k2 = grid.reciprocal().mesh()
        ph = np.exp(2j * np.pi * (np.outer(k1.ravel(), x1.ravel()) + np.outer(k2.ravel(), x2.ravel())))
        e = embed_minus(ph) * np.sqrt(2) / (2 * grid.l)  # (basis, N, 4)
        te = (t @ e.reshape(nn, 4 * nn).T).T.reshape(nn, nn, 4)
        return Quaternion.from_array(grid.h**2 * qmul(te, qconj(e)).sum(axis=(0, 1)))
    raise ValueError("basis must be 'delta' or 'fourier'")


def hs_minus_sq(t: np.ndarray, grid: Grid2) -> float:
    """||T P_-||_HS^2 over the basis delta_m (1-k)/(sqrt(2) h)."""
    nn = grid.n * grid.n
    cols = t.reshape(4 * nn, nn, 4) @ ONE_MINUS_K  # T applied to delta_m (1-k)
    return float(0.5 * np.sum(cols**2))


def plancherel_defect(g: QField4) -> float:
    """| ||W(g) P_-||_HS^2 - ||g||_2^2 | / ||g||_2^2."""
    ref = lp_norm(g) ** 2
    if ref == 0.0:
        return 0.0
    op = group_weyl(g)
    return abs(hs_minus_sq(op.matrix, op.grid) - ref) / ref


def weyl_inverse(t: np.ndarray, grid: Grid2) -> QField4:
    """(x, y) -> tr(T rho(-x,-y) P_-) on the whole lattice.

    rho(-x,-y) maps delta_m (1-k) to a single nonzero value q at xi = m + y,
    so each trace is (1/2) sum_m (T[m, m+y] q)(1+k).
    """
    n = grid.n
    pts = grid.points
    a = np.arange(n)
    k = a - n // 2  # y index -> lattice shift
    tb = t.reshape(n, n, 4, n, n, 4)
    # blocks B[y1, y2, m1, m2] = T[m, m + y]
    m1 = a[None, None, :, None]
    m2 = a[None, None, None, :]
    c1 = (m1 + k[:, None, None, None]) % n
    c2 = (m2 + k[None, :, None, None]) % n
    blocks = tb[m1, m2, :, c1, c2, :]  # (y1, y2, m1, m2, 4, 4)
    xi1 = pts[c1[:, 0, :, 0]]  # (y1, m1) coordinate of m + y
    xi2 = pts[c2[0, :, 0, :]]  # (y2, m2)
    # q = e^{i(-2 pi x1 xi1 + pi x1 y1)} (1-k) e^{j(-2 pi x2 xi2 + pi x2 y2)}
    th1 = 2 * np.pi * pts[:, None, None] * (-xi1[None] + pts[None, :, None] / 2)  # (x1, y1, m1)
    th2 = 2 * np.pi * pts[:, None, None] * (-xi2[None] + pts[None, :, None] / 2)  # (x2, y2, m2)
    # (1-k) e^{j th} = e^{i th} (1-k), so q = e^{i(th1 + th2)} (1-k)
    ph = th1[:, None, :, None, :, None] + th2[None, :, None, :, None, :]  # (x1, x2, y1, y2, m1, m2)
    q = qmul(iexp(ph), ONE_MINUS_K)
    vals = np.einsum("yzabpq,xwyzabq->xwyzp", blocks, q)
    del q
    return QField4(grid, grid, 0.5 * qmul(vals, ONE_PLUS_K))


def inversion_defect(g: QField4) -> float:
    """||g - tr(W(g) rho(-.,-.) P_-)||_2 / ||g||_2."""
    grid = _check_g(g)
    _require_self_dual(grid, "the inversion formula")
    ref = lp_norm(g)
    if ref == 0.0:
        return 0.0
    rec = weyl_inverse(group_weyl(g).matrix, grid)
    return lp_norm(QField4(grid, grid, rec.values - g.values)) / ref


def inversion_at(t: np.ndarray, grid: Grid2, x, y, basis: str = "delta") -> Quaternion:
    """tr(T rho(-x,-y) P_-) at one point by an explicit matrix product (reference path)."""
    r = rho(-np.asarray(x, float), -np.asarray(y, float), grid).matrix
    return trace_minus(t @ r, grid, basis)


# -- matrix coefficients ---------------------------------------------------------------


def rho_coefficient(x, y, f: QField2, g: QField2) -> Quaternion:
    """<rho(x,y) f, g>."""
    return inner(rho_apply(x, y, f), g)


def coefficient_slice(f: QField2, g: QField2, y) -> np.ndarray:
    """x -> <rho(x,y) f, g> on the reciprocal lattice, for one lattice y.

    conj(g) sits to the right of the j-phase.  Splitting conj(g) into real
    components times units u, e^{j t} u = u e^{+-j t} (minus for u = i, k), so
    each component is an ordinary transform with its own j-sign.
    """
    grid = f.grid
    k1, k2 = _shift_index(grid, y)
    y1, y2 = k1 * grid.h, k2 * grid.h
    shifted = np.roll(f.values, (-k1, -k2), axis=(0, 1))
    gc = qconj(g.values)
    x = grid.reciprocal().points
    r = grid.reflect_index()
    out = np.zeros((grid.n, grid.n, 4))
    for c, unit in enumerate(np.eye(4)):
        if not gc[..., c].any():
            continue
        term = qmul(shifted * gc[..., c : c + 1], unit)
        s = 1.0 if c in (0, 2) else -1.0
        if s < 0:
            # sum_xi e^{-2 pi j x2 xi2} h(xi2) = sum_xi e^{2 pi j x2 xi2} h(-xi2) (periodic lattice)
            term = term[:, r]
        vals = split_transform(term, (0,), (1,), +1, grid.h**2)
        out += qmul(vals, jexp(s * np.pi * x * y2)[None, :, :])
    return qmul(iexp(np.pi * x * y1)[:, None, :], out)


def matrix_coefficients(f: QField2, g: QField2) -> QField4:
    """(x, y) -> <rho(x,y) f, g> over the whole (self-dual) lattice."""
    grid = f.grid
    _require_self_dual(grid, "matrix_coefficients")
    n = grid.n
    out = np.zeros((n, n, n, n, 4))
    for b1, y1 in enumerate(grid.points):
        for b2, y2 in enumerate(grid.points):
            out[:, :, b1, b2] = coefficient_slice(f, g, (y1, y2))
    return QField4(grid, grid, out)


def gaussian_coefficient_expected(x1, x2, y1, y2) -> np.ndarray:
    """(1/2) e^{-(pi/2)(|x|^2 + |y|^2)} as a real quaternion array."""
    x1, x2, y1, y2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, y1, y2)))
    out = np.zeros(x1.shape + (4,))
    out[..., 0] = 0.5 * np.exp(-np.pi / 2 * (x1**2 + x2**2 + y1**2 + y2**2))
    return out


def gaussian_coefficient_defect(grid: Grid2) -> float:
    """max over the lattice of |<rho(x,y) phi, phi> - (1/2) e^{-(pi/2)(|x|^2+|y|^2)}|."""
    from .fields import gaussian

    _require_self_dual(grid, "the Gaussian coefficient check")
    phi = gaussian(grid)
    x = grid.points
    worst = 0.0
    for y1 in x:
        for y2 in x:
            got = coefficient_slice(phi, phi, (y1, y2))
            exp = gaussian_coefficient_expected(x[:, None], x[None, :], y1, y2)
            worst = max(worst, float(np.abs(got - exp).max()))
    return worst


# -- Benedicks-Amrein-Berthier engine ----------------------------------------------------


def gram_schmidt(fields) -> list:
    """Orthonormalise fields for the pairing <f, g> = int f conj(g), coefficients on the left."""
    out = []
    for f in fields:
        v = f.values.copy()
        for e in out:
            c = inner(QField2(f.grid, v), e).array
            v = v - qmul(c, e.values)
        nv = lp_norm(QField2(f.grid, v))
        if nv < 1e-12:
            raise ValueError("fields are linearly dependent")
        out.append(QField2(f.grid, v / nv))
    return out


def gram_defect(fields) -> float:
    big = 0.0
    for a, f in enumerate(fields):
        for b, g in enumerate(fields):
            want = np.array([1.0 if a == b else 0.0, 0, 0, 0])
            big = max(big, float(np.abs(inner(f, g).array - want).max()))
    return big


@dataclass(frozen=True)
class ProjectionPair:
    """E_A (multiplication by the indicator of A = A13 x A24) and F_S (W(F_S g) = P_S W(g))."""

    grid: Grid2
    mask13: np.ndarray  # (x1, y1)
    mask24: np.ndarray  # (x2, y2)
    S: tuple

    def __post_init__(self):
        n = self.grid.n
        for m in (self.mask13, self.mask24):
            if np.asarray(m).shape != (n, n):
                raise ValueError(f"masks must have shape {(n, n)}")
        object.__setattr__(self, "mask13", np.asarray(self.mask13, bool))
        object.__setattr__(self, "mask24", np.asarray(self.mask24, bool))
        if self.S and gram_defect(self.S) > 1e-10:
            raise ValueError("S is not orthonormal")
        for f in self.S:
            check_grid(self.grid, f.grid)

    @classmethod
    def from_mask(cls, grid: Grid2, mask: np.ndarray, S) -> "ProjectionPair":
        """Split a 4D mask over (x1, x2, y1, y2) into its two factors; rejects non-product sets."""
        mask = np.asarray(mask, bool)
        m13 = mask.any(axis=(1, 3))
        m24 = mask.any(axis=(0, 2))
        prod = m13[:, None, :, None] & m24[None, :, None, :]
        if not np.array_equal(prod, mask):
            raise ValueError("A is not a product set A13 x A24")
        return cls(grid, m13, m24, tuple(S))

    @property
    def mask(self) -> np.ndarray:
        """Indicator of A over (x1, x2, y1, y2)."""
        return self.mask13[:, None, :, None] & self.mask24[None, :, None, :]

    @property
    def rank(self) -> int:
        return len(self.S)

    def measure(self) -> float:
        return float(self.mask.sum()) * self.grid.h**4

    def apply_ea(self, g: QField4) -> QField4:
        return QField4(g.grid_a, g.grid_b, g.values * self.mask[..., None])

    def ps_matrix(self) -> np.ndarray:
        """P_S psi = sum_j <psi, phi_j> phi_j as a real matrix."""
        grid = self.grid
        n = grid.n
        nn = n * n
        out = np.zeros((nn, 4, nn, 4))
        for f in self.S:
            v = f.values.reshape(nn, 4)
            # block[xi, xi'] = h^2 R(phi(xi)) R(conj phi(xi'))
            out += grid.h**2 * np.einsum("apq,bqr->apbr", right_matrix(v), right_matrix(qconj(v)))
        return out.reshape(4 * nn, 4 * nn)


def _q_diag(pair: ProjectionPair) -> np.ndarray:
    """Q_b(xi) = sum_j (1-k) conj(phi_j(xi)) phi_j(xi + b) (1+k), indexed [b1, b2, xi1, xi2]."""
    n = pair.grid.n
    out = np.zeros((n, n, n, n, 4))
    for f in pair.S:
        v = f.values
        cv = qconj(v)
        for b1 in range(n):
            for b2 in range(n):
                prod = qmul(cv, np.roll(v, (-b1, -b2), axis=(0, 1)))
                out[b1, b2] += prod
    return qmul(qmul(ONE_MINUS_K, out), ONE_PLUS_K)


def _z_pair(q: np.ndarray):
    """q = z1 + z2 j with z1 = w + x i, z2 = y + z i."""
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def _from_z_pair(z1, z2) -> np.ndarray:
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def trace_kernel(pair: ProjectionPair) -> np.ndarray:
    """tr(P_S rho(u,v) rho(-x,-y) P_-) for (x,y) in A and all (u,v); shape (|A|, N^2, 4).

    With a = u - x and b = v - y the trace is
    (h^2/2) e^{pi i (u.y - x.v)} e^{pi i a.b} sum_xi e^{2 pi i a.xi} Q(xi, xi + b),
    and the xi-sum is one FFT per b.
    """
    grid = pair.grid
    _require_self_dual(grid, "the BAB kernel")
    n = grid.n
    h = grid.h
    q = _q_diag(pair)  # [b1, b2, xi1, xi2] with b a shift index 0..n-1
    z1, z2 = _z_pair(q)
    # D[b1, b2, a1, a2] = sum_xi e^{2 pi i a.xi} Q_b(xi), a on the lattice -l + k h
    for ax in (2, 3):
        z1 = centered_dft(z1, ax, +1)
        z2 = centered_dft(z2, ax, +1)
    pts = grid.points
    idx = np.argwhere(pair.mask)  # (|A|, 4) indices of (x1, x2, y1, y2)
    a = np.arange(n)
    u1 = a[:, None, None, None]
    u2 = a[None, :, None, None]
    v1 = a[None, None, :, None]
    v2 = a[None, None, None, :]
    out = np.zeros((len(idx), n, n, n, n, 4))
    for r, (i1, i2, j1, j2) in enumerate(idx):
        # lattice differences; a is taken mod n (the plane waves are n-periodic in a)
        da1 = u1 - i1
        da2 = u2 - i2
        db1 = v1 - j1
        db2 = v2 - j2
        aa1 = (da1 + n // 2) % n
        aa2 = (da2 + n // 2) % n
        d1 = z1[db1 % n, db2 % n, aa1, aa2]
        d2 = z2[db1 % n, db2 % n, aa1, aa2]
        x1, x2, y1, y2 = pts[i1], pts[i2], pts[j1], pts[j2]
        pu1, pu2, pv1, pv2 = pts[u1], pts[u2], pts[v1], pts[v2]
        phase = np.pi * (pu1 * y1 + pu2 * y2 - x1 * pv1 - x2 * pv2)
        phase = phase + np.pi * h * h * (da1 * db1 + da2 * db2)
        e = np.exp(1j * phase) * (h * h / 2)
        out[r] = _from_z_pair(e * d1, e * d2)
    return out.reshape(len(idx), n**4, 4)


def ea_fs(pair: ProjectionPair) -> QMatrix:
    """E_A F_S as a quaternion matrix acting on conj(g): rows (x,y) in A, columns (u,v).

    (F_S g)(x,y) = sum_{u,v} h^4 g(u,v) tr(P_S rho(u,v) rho(-x,-y) P_-) has the
    scalar on the right, so conjugation turns it into a left action with the
    same singular values.
    """
    w = pair.grid.h**4
    return QMatrix(w * qconj(trace_kernel(pair)))


def ea_fs_apply(pair: ProjectionPair, g: QField4) -> np.ndarray:
    """Kernel path: values of E_A F_S g on A, shape (|A|, 4)."""
    m = ea_fs(pair)
    return qconj(m.apply(qconj(g.values.reshape(-1, 4))))


def fs_apply_direct(pair: ProjectionPair, g: QField4) -> QField4:
    """Direct path: F_S g = tr(P_S W(g) rho(-.,-.) P_-) by explicit operator composition."""
    t = pair.ps_matrix() @ group_weyl(g).matrix
    return weyl_inverse(t, pair.grid)


def ea_fs_hs_bound(pair: ProjectionPair):
    """(||E_A F_S||_HS^2, m(A) N^2)."""
    if not pair.mask.any():
        return 0.0, 0.0
    hs = ea_fs(pair).hs_norm() ** 2
    return hs, pair.measure() * pair.rank**2


def near_one_count(pair: ProjectionPair, tol: float = 1e-6) -> int:
    """Number of singular values of E_A F_S above 1 - tol (proxy for dim R(E_A) cap R(F_S))."""
    if not pair.mask.any():
        return 0
    s = ea_fs(pair).singular_values()
    return int(np.sum(s > 1.0 - tol))


def fs_idempotency_defect(pair: ProjectionPair, g: QField4) -> float:
    """||F_S F_S g - F_S g|| / ||F_S g|| (informational)."""
    once = fs_apply_direct(pair, g)
    twice = fs_apply_direct(pair, once)
    den = lp_norm(once)
    if den == 0.0:
        return 0.0
    return lp_norm(QField4(once.grid_a, once.grid_b, twice.values - once.values)) / den


def random_pair(grid: Grid2, rng: np.random.Generator, rank: int, density=(0.05, 0.2)) -> ProjectionPair:
    """Random product set A and a random orthonormal family S of the given size."""
    n = grid.n
    masks = []
    for _ in range(2):
        p = rng.uniform(*density)
        m = rng.random((n, n)) < p
        if not m.any():
            m[rng.integers(n), rng.integers(n)] = True
        masks.append(m)
    S = gram_schmidt([random_field(grid, rng, spread=0.6) for _ in range(rank)])
    return ProjectionPair(grid, masks[0], masks[1], tuple(S))


def random_g(grid: Grid2, rng: np.random.Generator, kind: str = "quaternion", terms: int = 3) -> QField4:
    """Smooth random g(x, y): Gaussian mixture with quaternion (or pure-j) coefficients."""
    c = rng.standard_normal((terms, 4))
    if kind == "j":
        c[:, [0, 1, 3]] = 0.0
    elif kind != "quaternion":
        raise ValueError("kind must be 'quaternion' or 'j'")
    centers = rng.uniform(-0.3, 0.3, (terms, 4))
    widths = rng.uniform(0.8, 1.2, terms)

    def fn(x1, x2, y1, y2):
        x1, x2, y1, y2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, y1, y2)))
        out = np.zeros(x1.shape + (4,))
        for ck, mu, a in zip(c, centers, widths):
            d = (x1 - mu[0]) ** 2 + (x2 - mu[1]) ** 2 + (y1 - mu[2]) ** 2 + (y2 - mu[3]) ** 2
            out += np.exp(-np.pi * a * d)[..., None] * ck
        return out

    return QField4.from_function(grid, grid, fn)


__all__ = [
    "RhoOp",
    "rho",
    "rho_apply",
    "composition_defect",
    "classical_pi",
    "classical_agreement",
    "classical_composition_defect",
    "embed_minus",
    "projection_minus",
    "projection_plus",
    "GroupWeylOp",
    "group_weyl",
    "group_weyl_direct",
    "fourier_weyl",
    "trace_minus",
    "hs_minus_sq",
    "plancherel_defect",
    "weyl_inverse",
    "inversion_defect",
    "inversion_at",
    "rho_coefficient",
    "coefficient_slice",
    "matrix_coefficients",
    "gaussian_coefficient_expected",
    "gaussian_coefficient_defect",
    "gram_schmidt",
    "gram_defect",
    "ProjectionPair",
    "trace_kernel",
    "ea_fs",
    "ea_fs_apply",
    "fs_apply_direct",
    "ea_fs_hs_bound",
    "near_one_count",
    "fs_idempotency_defect",
    "random_pair",
    "random_g",
]
