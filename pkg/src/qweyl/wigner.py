"""Fourier-Wigner and Wigner transforms of quaternion fields.

For fields on Grid2(n, l) both transforms are computed on a phase-space
lattice refined by two (see ``phase_space_grids``): W(f, g) lives on
positions Grid2(2n, l) x frequencies Grid2(2n, n/(4l)), and V(f, g) on
Grid2(2n, n/(2l)) x Grid2(2n, 2l).  With this choice every half shift
x +- p/2 is a lattice move, the four-dimensional QFT of V lands exactly on
the lattice of W, and the Riemann sums resolve the fields' Gaussian tails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid2, QField2, QField4, check_grid, inner, lp_norm, phase_space_grids
from .qft import split_transform
from .quaternion import iexp, jexp, qconj, qmul

MAX_4D_N = 16


def _guard(grid: Grid2):
    if grid.n > MAX_4D_N:
        raise ValueError(f"4D objects are limited to n <= {MAX_4D_N} per axis (got n={grid.n})")


def _half_lattice(grid: Grid2) -> Grid2:
    """Spacing h/2 over [-2l, 2l): holds every x +- p/2 that the transforms need."""
    return Grid2(4 * grid.n, 2 * grid.l)


def _pair_products(f: QField2, g: QField2) -> np.ndarray:
    """F[y1, y2, p1, p2] = f(y + p/2) conj(g(y - p/2)), y on Grid2(2n, l), p on Grid2(2n, 2l)."""
    check_grid(f.grid, g.grid)
    _guard(f.grid)
    n2 = 2 * f.grid.n
    ext = _half_lattice(f.grid).points
    fv = f.sample(ext, ext)
    gv = qconj(g.sample(ext, ext))
    i = np.arange(n2)
    # y = -l + i h/2 and p/2 = -l + j h/2 on the (4n)-point half lattice
    plus = i[:, None] + i[None, :]
    minus = i[:, None] - i[None, :] + n2
    a = fv[plus[:, None, :, None], plus[None, :, None, :]]
    b = gv[minus[:, None, :, None], minus[None, :, None, :]]
    return qmul(a, b)


@dataclass(frozen=True)
class WignerField:
    data: QField4
    source_norms: tuple

    @property
    def values(self) -> np.ndarray:
        return self.data.values

    def on_base_lattice(self) -> QField4:
        """Every other point: positions Grid2(n, l), frequencies the reciprocal grid."""
        ga, gb = self.data.grid_a, self.data.grid_b
        v = self.data.values[::2, ::2, ::2, ::2]
        return QField4(Grid2(ga.n // 2, ga.l), Grid2(gb.n // 2, gb.l), v)

    def bound(self) -> float:
        return float(self.source_norms[0] * self.source_norms[1])


def fourier_wigner(f: QField2, g: QField2) -> QField4:
    """V(f,g)(q,p) = sum_y e^{2 pi i q1 y1} f(y + p/2) conj(g(y - p/2)) e^{2 pi j q2 y2} (h/2)^2.

    Axes of the result are (q1, q2, p1, p2).
    """
    prods = _pair_products(f, g)
    yg, _ = phase_space_grids(f.grid)
    vals = split_transform(prods, (0,), (1,), +1, yg.h**2)
    return QField4(Grid2(2 * f.grid.n, f.grid.n / (2 * f.grid.l)), Grid2(2 * f.grid.n, 2 * f.grid.l), vals)


def wigner(f: QField2, g: QField2, xi_shift=(0.0, 0.0)) -> WignerField:
    """W(f,g)(x,xi) = sum_p e^{-2 pi i xi1 p1} f(x + p/2) conj(g(x - p/2)) e^{-2 pi j xi2 p2} h^2.

    ``xi_shift`` evaluates at xi + shift instead (used for covariance checks
    with off-lattice frequency offsets).
    """
    prods = _pair_products(f, g)
    xg, sg = phase_space_grids(f.grid)
    s1, s2 = float(xi_shift[0]), float(xi_shift[1])
    if s1 or s2:
        p = Grid2(2 * f.grid.n, 2 * f.grid.l).points
        prods = qmul(iexp(-2 * np.pi * s1 * p)[None, None, :, None, :], prods)
        prods = qmul(prods, jexp(-2 * np.pi * s2 * p)[None, None, None, :, :])
    vals = split_transform(prods, (2,), (3,), -1, f.grid.h**2)
    return WignerField(QField4(xg, sg, vals), (lp_norm(f), lp_norm(g)))


def qft4(V: QField4) -> QField4:
    """4D QFT: e^{-2 pi i (x1 q1 + xi1 p1)} V(q,p) e^{-2 pi j (x2 q2 + xi2 p2)}."""
    vals = split_transform(V.values, (0, 2), (1, 3), -1, V.weight)
    return QField4(V.grid_a.reciprocal(), V.grid_b.reciprocal(), vals)


def qft_of_fw_equals_wigner(f: QField2, g: QField2) -> float:
    """||QFT(V(f,g)) - W(f,g)||_2 / (||f|| ||g||)."""
    scale = lp_norm(f) * lp_norm(g)
    if scale == 0.0:
        return 0.0
    lhs = qft4(fourier_wigner(f, g))
    rhs = wigner(f, g).data
    diff = QField4(rhs.grid_a, rhs.grid_b, lhs.values - rhs.values)
    return lp_norm(diff) / scale


def _is_even_x1(f: QField2, tol: float) -> bool:
    scale = max(1.0, float(np.abs(f.values).max(initial=0.0)))
    return f.is_even_x1(tol * scale)


def moyal_sides(f1, g1, f2, g2, check: bool = True, tol: float = 1e-10):
    """(<W(f1,g1), W(f2,g2)>, <f1, f2 <conj g2, conj g1>>), the latter bracketed innermost first."""
    if check:
        for name, h in (("f1", f1), ("g1", g1), ("f2", f2), ("g2", g2)):
            if not _is_even_x1(h, tol):
                raise ValueError(f"{name} is not even in the first variable")
    lhs = inner(wigner(f1, g1).data, wigner(f2, g2).data)
    c = inner(g2.conj(), g1.conj())
    rhs = inner(f1, f2.right_mul(c.array))
    return lhs, rhs


def moyal_defect(f1, g1, f2, g2, check: bool = True) -> float:
    lhs, rhs = moyal_sides(f1, g1, f2, g2, check)
    return (lhs - rhs).norm()


def modulate_translate_i(f: QField2, beta1: float, a) -> QField2:
    """e^{2 pi i beta1 x1} f(x - a), phase on the left."""
    from .grid import translate

    t = translate(f, a)
    fn = lambda x1, x2: qmul(iexp(2 * np.pi * beta1 * np.asarray(x1, float)), t.evaluate(x1, x2))
    return QField2.from_function(f.grid, fn)


def modulate_translate_j(g: QField2, beta2: float, c) -> QField2:
    """e^{-2 pi j beta2 x2} g(x - c), phase on the left."""
    from .grid import translate

    t = translate(g, c)
    fn = lambda x1, x2: qmul(jexp(-2 * np.pi * beta2 * np.asarray(x2, float)), t.evaluate(x1, x2))
    return QField2.from_function(g.grid, fn)


def wigner_covariance_defect(f: QField2, g: QField2, a, b, c, d) -> float:
    """Max pointwise defect of the covariance of W under modulation and translation.

    With beta = b - d, F = e^{2 pi i beta1 x1} f(x - a) and G = e^{-2 pi j beta2 x2} g(x - c):

        W(F, G)(x, xi) = e^{2 pi i (beta1 x1 + beta1 (a1-c1)/2 - xi1 (a1-c1))}
                         W(f, g)(x - (a+c)/2, (xi1 - beta1/2, xi2 + beta2/2))
                         e^{2 pi j (beta2 x2 - beta2 (a2-c2)/2 - xi2 (a2-c2))}

    The right side is evaluated with the same discretization, shifting the
    position lattice by (a+c)/2 (a lattice move) and the frequency argument
    by an exact offset.
    """
    a = np.asarray(a, float)
    c = np.asarray(c, float)
    beta = np.asarray(b, float) - np.asarray(d, float)
    grid = f.grid
    ma = [grid.lattice_index(t) for t in a]
    mc = [grid.lattice_index(t) for t in c]
    lhs = wigner(modulate_translate_i(f, beta[0], a), modulate_translate_j(g, beta[1], c))
    w0 = wigner(f, g, xi_shift=(-beta[0] / 2, beta[1] / 2))
    # shift the position lattice (spacing h/2) by (a+c)/2 = (ma+mc) h/2
    s1, s2 = ma[0] + mc[0], ma[1] + mc[1]
    shifted = np.zeros_like(w0.values)
    n2 = shifted.shape[0]
    src1 = np.arange(n2) - s1
    src2 = np.arange(n2) - s2
    ok1 = (src1 >= 0) & (src1 < n2)
    ok2 = (src2 >= 0) & (src2 < n2)
    shifted[np.ix_(ok1, ok2)] = w0.values[np.ix_(src1[ok1], src2[ok2])]
    xg, sg = lhs.data.grid_a, lhs.data.grid_b
    x = xg.points
    xi = sg.points
    ph1 = 2 * np.pi * (beta[0] * x[:, None] + beta[0] * (a[0] - c[0]) / 2 - xi[None, :] * (a[0] - c[0]))
    ph2 = 2 * np.pi * (beta[1] * x[:, None] - beta[1] * (a[1] - c[1]) / 2 - xi[None, :] * (a[1] - c[1]))
    left = iexp(ph1)[:, None, :, None, :]
    right = jexp(ph2)[None, :, None, :, :]
    rhs = qmul(qmul(left, shifted), right)
    # compare where the shifted source was available
    mask = np.zeros(shifted.shape[:4], bool)
    mask[np.ix_(ok1, ok2)] = True
    diff = np.abs(lhs.values - rhs)[mask]
    return float(diff.max(initial=0.0))


def zero_free_pair(f: QField2, g: QField2, a: float, b: float) -> WignerField:
    """W(f, (a + b k) g) for complex-valued f, g.

    Writing Wc for the complex Wigner field of (f, g), the result is
    [(a-b) Wc(x, xi1, -xi2) (1+k) + (a+b) Wc(x, xi) (1-k)] / 2, so it has no
    zeros wherever Wc has none; for Wc even in xi2 it is Wc (a - b k).
    """
    if a == 0 and b == 0:
        raise ValueError("a and b must not both vanish")
    if np.abs(g.values[..., 2:]).max(initial=0.0) > 0:
        raise ValueError("g must have zero j and k components")
    q = np.array([a, 0.0, 0.0, b])
    return wigner(f, g.left_mul(q))


__all__ = [
    "WignerField",
    "fourier_wigner",
    "wigner",
    "qft4",
    "qft_of_fw_equals_wigner",
    "moyal_sides",
    "moyal_defect",
    "wigner_covariance_defect",
    "zero_free_pair",
]
