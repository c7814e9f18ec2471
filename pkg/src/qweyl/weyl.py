"""The symbol Weyl transform W_sigma and the unboundedness witness f_alpha.

For a symbol even in the frequency variable, W_sigma is an integral operator
with kernel

    K(u, v) = int e^{-2 pi i xi1 (v1 - u1)} sigma((u+v)/2, xi) e^{-2 pi j xi2 (v2 - u2)} dxi,

acting as (W_sigma phi)(v) = int K(u, v) phi(u) du with K on the left.  The
symbol lives on the refined phase-space lattice of the field grid, so the
midpoints (u+v)/2 are lattice points and the xi-integral is one quaternion
FFT per midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid2, QField2, QField4, check_grid, inner, integrate, lp_norm, phase_space_grids, trig_matrix
from .qft import split_transform
from .quaternion import E_MINUS, QMatrix, iexp, jexp, qmul
from .wigner import wigner

EVEN_TOL = 1e-12


def _reflect_freq(v: np.ndarray, axes) -> np.ndarray:
    """v at -xi along ``axes`` (periodic index map m -> -m mod N)."""
    out = v
    for ax in axes:
        n = v.shape[ax]
        out = np.take(out, (-np.arange(n)) % n, axis=ax)
    return out


def _even_defect(v: np.ndarray, axes) -> float:
    """max |sigma(x, xi) - sigma(x, -xi)| over the paired frequency indices (index 0 has no partner)."""
    r = _reflect_freq(v, axes)
    sl = [slice(None)] * v.ndim
    for ax in axes:
        sl[ax] = slice(1, None)
    d = np.abs(v - r)[tuple(sl)]
    return float(d.max(initial=0.0))


def _resample4(sigma: QField4, ga: Grid2, gb: Grid2) -> np.ndarray:
    if sigma.func is not None:
        return QField4.from_function(ga, gb, sigma.func).values
    v = sigma.values
    for ax, (src, dst) in enumerate(((sigma.grid_a, ga), (sigma.grid_a, ga), (sigma.grid_b, gb), (sigma.grid_b, gb))):
        m = trig_matrix(src, dst.points)
        v = np.moveaxis(np.tensordot(m, v, axes=([1], [ax])), 0, ax)
    return v


def symbol_grids(field_grid: Grid2, xi_factor: int = 1):
    """Position grid Grid2(2n, l) and a frequency grid with spacing 1/(4l) over xi_factor times the base window."""
    xg, sg = phase_space_grids(field_grid)
    return xg, Grid2(sg.n * xi_factor, sg.l * xi_factor)


@dataclass(frozen=True)
class WeylSymbol:
    """A symbol sigma(x, xi) on the refined phase-space lattice of ``field_grid``.

    The frequency window may be widened by ``xi_factor`` at the same
    spacing.  With the base window (factor 1) the discrete HS identity
    inherits exact Parseval in xi; wider windows trade that for a smaller
    truncation of the xi-integral.
    """

    sigma: QField4
    field_grid: Grid2
    even_in_xi: bool

    @property
    def xi_factor(self) -> int:
        return self.sigma.grid_b.n // (2 * self.field_grid.n)

    @classmethod
    def from_field(
        cls, sigma: QField4, field_grid: Grid2 | None = None, xi_factor: int = 1, tol: float = EVEN_TOL
    ) -> "WeylSymbol":
        """Wrap sigma, resampling it onto the symbol lattice of ``field_grid`` if needed.

        Without ``field_grid`` sigma must already sit on a symbol lattice
        (positions Grid2(2n, l)); its frequency window is then kept as is.
        """
        if field_grid is None:
            field_grid = Grid2(sigma.grid_a.n // 2, sigma.grid_a.l)
            xi_factor = max(1, sigma.grid_b.n // sigma.grid_a.n)
        xg, sg = symbol_grids(field_grid, xi_factor)
        if not (sigma.grid_a.same_as(xg) and sigma.grid_b.same_as(sg)):
            sigma = QField4(xg, sg, _resample4(sigma, xg, sg), sigma.func)
        scale = max(1.0, float(np.abs(sigma.values).max(initial=0.0)))
        even = _even_defect(sigma.values, (2, 3)) <= tol * scale
        return cls(sigma, field_grid, even)

    @classmethod
    def from_function(cls, field_grid: Grid2, fn, xi_factor: int = 1, tol: float = EVEN_TOL) -> "WeylSymbol":
        xg, sg = symbol_grids(field_grid, xi_factor)
        return cls.from_field(QField4.from_function(xg, sg, fn), field_grid, xi_factor, tol)

    def separately_even(self, tol: float = EVEN_TOL) -> bool:
        """Even in xi1 and in xi2 individually."""
        v = self.sigma.values
        scale = max(1.0, float(np.abs(v).max(initial=0.0)))
        return max(_even_defect(v, (2,)), _even_defect(v, (3,))) <= tol * scale

    def on_wigner_lattice(self) -> QField4:
        """sigma restricted to the lattice of W(f, g) (the central frequency window)."""
        xg, sg = phase_space_grids(self.field_grid)
        off = (self.xi_factor - 1) * self.field_grid.n
        sl = slice(off, off + sg.n)
        return QField4(xg, sg, self.sigma.values[:, :, sl, sl])

    def scale(self, s: float) -> "WeylSymbol":
        return WeylSymbol(self.sigma.scale(s), self.field_grid, self.even_in_xi)


@dataclass(frozen=True)
class SymbolWeylOp:
    """Quadrature-weighted kernel: matrix[v, u] = h^2 K(u, v), indices (m1 n + m2)."""

    matrix: QMatrix
    source: WeylSymbol

    @property
    def grid(self) -> Grid2:
        return self.source.field_grid

    def kernel(self) -> np.ndarray:
        """K[u1, u2, v1, v2] on the field lattice."""
        n = self.grid.n
        k = self.matrix.entries.reshape(n, n, n, n, 4) / self.grid.h**2
        return np.transpose(k, (2, 3, 0, 1, 4))


def kernel_from_symbol(s: WeylSymbol) -> SymbolWeylOp:
    if not s.even_in_xi:
        raise ValueError("the kernel form of W_sigma needs a symbol even in xi")
    grid = s.field_grid
    n = grid.n
    sg = s.sigma.grid_b
    m = s.xi_factor
    # T(mid, t): xi-transform of sigma, mid on Grid2(2n, l), t on spacing h/m over [-2l, 2l)
    t = split_transform(s.sigma.values, (2,), (3,), -1, sg.h**2)
    a = np.arange(n)
    mid = a[:, None] + a[None, :]  # [u, v] -> index of (u+v)/2
    diff = m * (a[None, :] - a[:, None] + n)  # [u, v] -> index of v - u
    k = t[mid[:, None, :, None], mid[None, :, None, :], diff[:, None, :, None], diff[None, :, None, :]]
    # k[u1, u2, v1, v2] -> matrix[v, u]
    mat = np.transpose(k, (2, 3, 0, 1, 4)).reshape(n * n, n * n, 4) * grid.h**2
    return SymbolWeylOp(QMatrix(mat), s)


def apply_weyl(op: SymbolWeylOp, f: QField2) -> QField2:
    check_grid(op.grid, f.grid)
    n = f.grid.n
    out = op.matrix.apply(f.values.reshape(-1, 4)).reshape(n, n, 4)
    return QField2(f.grid, out)


def direct_weyl_apply(s: WeylSymbol, f: QField2) -> QField2:
    """Independent path: the double sum over (u, xi) with explicit quaternion products, no FFT."""
    check_grid(s.field_grid, f.grid)
    grid = f.grid
    n = grid.n
    sg = s.sigma.grid_b
    x = grid.points
    xi = sg.points
    sig = s.sigma.values
    fv = f.values
    w = grid.h**2 * sg.h**2
    out = np.zeros((n, n, 4))
    a = np.arange(n)
    for b1 in range(n):
        for b2 in range(n):
            # sigma((u+v)/2, xi) for all u: indices (a + b) on the refined position axes
            s_mid = sig[(a + b1)[:, None], (a + b2)[None, :]]  # (u1, u2, xi1, xi2, 4)
            p1 = iexp(-2 * np.pi * xi[None, :] * (x[b1] - x[:, None]))  # (u1, xi1, 4)
            p2 = jexp(-2 * np.pi * xi[None, :] * (x[b2] - x[:, None]))  # (u2, xi2, 4)
            term = qmul(p1[:, None, :, None, :], s_mid)
            term = qmul(term, p2[None, :, None, :, :])
            term = qmul(term, fv[:, :, None, None, :])
            out[b1, b2] = w * term.sum(axis=(0, 1, 2, 3))
    return QField2(grid, out)


def weak_form_sides(s: WeylSymbol, f: QField2, g: QField2):
    """(<W_sigma f, g>, int sigma W(f, g)) with sigma on the left of W(f, g)."""
    op = kernel_from_symbol(s)
    lhs = inner(apply_weyl(op, f), g)
    w = wigner(f, g).data
    prod = QField4(w.grid_a, w.grid_b, qmul(s.on_wigner_lattice().values, w.values))
    return lhs, integrate(prod)


def weak_form_defect(s: WeylSymbol, f: QField2, g: QField2) -> float:
    lhs, rhs = weak_form_sides(s, f, g)
    return (lhs - rhs).norm()


def hs_identity_defect(s: WeylSymbol) -> float:
    """| ||W_sigma||_HS^2 - ||sigma||_2^2 | / ||sigma||_2^2."""
    ref = lp_norm(s.sigma) ** 2
    if ref == 0.0:
        raise ValueError("relative HS defect is undefined for the zero symbol")
    hs = kernel_from_symbol(s).matrix.hs_norm() ** 2
    return abs(hs - ref) / ref


def trace_bound_check(s: WeylSymbol):
    """(||W_sigma||_S1, ||sigma||_1); the first should not exceed the second."""
    op = kernel_from_symbol(s)
    return op.matrix.nuclear_norm(), lp_norm(s.sigma, 1)


def operator_norm(op: SymbolWeylOp) -> float:
    """Largest singular value of W_sigma as an operator on the sampled L^2."""
    return float(op.matrix.singular_values()[0])


def compactness_tail(op: SymbolWeylOp) -> float:
    """Share of the HS mass carried by singular values beyond index n^2/2."""
    s = op.matrix.singular_values()
    total = float(np.sum(s**2))
    if total == 0.0:
        return 0.0
    return float(np.sum(s[len(s) // 2 :] ** 2)) / total


# -- unboundedness witness ---------------------------------------------------


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")


def galpha_fn(alpha: float, a: float):
    """prod_j |x_j|^{-alpha} on the cube [-a, a]^2 (zero outside), as a complex field."""
    _check_alpha(alpha)

    def fn(x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        inside = (np.abs(x1) <= a) & (np.abs(x2) <= a) & (x1 != 0) & (x2 != 0)
        out = np.zeros(x1.shape + (4,))
        with np.errstate(divide="ignore"):
            val = np.abs(x1) ** -alpha * np.abs(x2) ** -alpha
        out[..., 0] = np.where(inside, val, 0.0)
        return out

    return fn


def galpha_field(alpha: float, a: float, grid: Grid2) -> QField2:
    """f_alpha = g_alpha (1-k)/2 sampled at cell centres.

    Sample m sits at -l + (m + 1/2) h, so no sample lands on a coordinate
    axis where |x_j|^{-alpha} is singular.  Use ``galpha_qft`` for its
    transform, which accounts for the half-cell offset.
    """
    _check_alpha(alpha)
    if not 0 < a < grid.l:
        raise ValueError("cube half-width a must satisfy 0 < a < l")
    c = grid.points + grid.h / 2
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    g = galpha_fn(alpha, a)(x1, x2)
    return QField2(grid, qmul(g, E_MINUS))


def galpha_qft(f: QField2) -> QField2:
    """QFT of cell-centred samples: the lattice transform with the half-cell phase restored."""
    grid = f.grid
    dst = grid.reciprocal()
    vals = split_transform(f.values, (0,), (1,), -1, grid.h**2)
    y = dst.points
    left = iexp(-np.pi * grid.h * y)[:, None, :]
    right = jexp(-np.pi * grid.h * y)[None, :, :]
    return QField2(dst, qmul(qmul(left, vals), right))


def galpha_euclidean_ft(alpha: float, a: float, grid: Grid2) -> np.ndarray:
    """Complex 2D Fourier transform of g_alpha on the same cell-centred samples (numpy FFT)."""
    c = grid.points + grid.h / 2
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    g = galpha_fn(alpha, a)(x1, x2)[..., 0]
    ghat = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(g))) * grid.h**2
    y = grid.reciprocal().points
    return ghat * np.exp(-1j * np.pi * grid.h * (y[:, None] + y[None, :]))


def probe_grid(l: float) -> Grid2:
    """Self-dual grid on [-l, l): n = 4 l^2 rounded up to an even integer."""
    n = 2 * math.ceil(2 * l * l - 1e-9)
    return Grid2(n, l)


def unboundedness_probe(alpha: float, rprime: float, domains, a: float = 0.5) -> list:
    """Truncated integrals of |F(f_alpha)|^{r'} over the frequency box [-l, l)^2 for each l.

    Each l uses its self-dual grid, so the spatial resolution and the
    frequency reach grow together.
    """
    _check_alpha(alpha)
    if not 1.0 < rprime < 2.0:
        raise ValueError("r' must lie in (1, 2)")
    out = []
    for l in domains:
        grid = probe_grid(float(l))
        F = galpha_qft(galpha_field(alpha, a, grid))
        out.append(float(lp_norm(F, rprime) ** rprime))
    return out


def divergence_threshold(rprime: float) -> float:
    """alpha at which the r'-th power of |g_alpha^| stops being integrable: 1 - 1/r'."""
    return 1.0 - 1.0 / rprime


def increments(values) -> list:
    """Relative increments v[k+1]/v[k] - 1."""
    v = list(values)
    return [v[k + 1] / v[k] - 1.0 for k in range(len(v) - 1)]


__all__ = [
    "symbol_grids",
    "WeylSymbol",
    "SymbolWeylOp",
    "kernel_from_symbol",
    "apply_weyl",
    "direct_weyl_apply",
    "weak_form_sides",
    "weak_form_defect",
    "hs_identity_defect",
    "trace_bound_check",
    "operator_norm",
    "compactness_tail",
    "galpha_fn",
    "galpha_field",
    "galpha_qft",
    "galpha_euclidean_ft",
    "probe_grid",
    "unboundedness_probe",
    "divergence_threshold",
    "increments",
]
