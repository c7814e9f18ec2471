"""Reference fields: the Gaussian and seeded smooth random fields.

Random fields are small Gaussian mixtures with quaternion coefficients.
They are built from closed-form generators, so every consumer can evaluate
them off the lattice exactly.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid2, QField2, QField4
from .quaternion import E_MINUS


def gaussian_fn(x1, x2):
    """phi(x) = exp(-pi |x|^2) as a real quaternion field."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
    out = np.zeros(x1.shape + (4,))
    out[..., 0] = np.exp(-np.pi * (x1**2 + x2**2))
    return out


def gaussian(grid: Grid2) -> QField2:
    return QField2.from_function(grid, gaussian_fn)


def gaussian4(grid_a: Grid2, grid_b: Grid2 | None = None) -> QField4:
    """exp(-pi (|a|^2 + |b|^2)) on R^4."""

    def fn(a1, a2, b1, b2):
        a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (a1, a2, b1, b2)))
        out = np.zeros(a1.shape + (4,))
        out[..., 0] = np.exp(-np.pi * (a1**2 + a2**2 + b1**2 + b2**2))
        return out

    return QField4.from_function(grid_a, grid_b or grid_a, fn)


_KINDS = ("quaternion", "complex", "minus", "plus", "j")


def _coefficients(rng: np.random.Generator, m: int, kind: str) -> np.ndarray:
    c = rng.standard_normal((m, 4))
    if kind == "complex":
        c[:, 2:] = 0.0
    elif kind == "j":
        c[:, [0, 1, 3]] = 0.0
    elif kind in ("minus", "plus"):
        z = c[:, 0] + 1j * c[:, 1]
        zero = np.zeros_like(z)
        from .quaternion import from_split_coeffs

        c = from_split_coeffs(z, zero) if kind == "plus" else from_split_coeffs(zero, z)
    elif kind != "quaternion":
        raise ValueError(f"unknown field kind {kind!r}; choose from {_KINDS}")
    return c


def mixture_fn(coeffs, widths, centers):
    """Generator x -> sum_k c_k exp(-pi a_k |x - mu_k|^2)."""
    coeffs = np.asarray(coeffs, float)
    widths = np.asarray(widths, float)
    centers = np.asarray(centers, float)

    def fn(x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        out = np.zeros(x1.shape + (4,))
        for c, a, mu in zip(coeffs, widths, centers):
            g = np.exp(-np.pi * a * ((x1 - mu[0]) ** 2 + (x2 - mu[1]) ** 2))
            out += g[..., None] * c
        return out

    return fn


def random_field(
    grid: Grid2,
    rng: np.random.Generator,
    terms: int = 3,
    kind: str = "quaternion",
    even_x1: bool = False,
    width=(0.85, 1.15),
    spread: float = 0.2,
) -> QField2:
    """Seeded smooth random field (Gaussian mixture).

    ``kind`` restricts the values: any quaternion, complex (span{1, i}),
    pure j, or one of the split ideals.  ``even_x1`` centres every bump on
    the x2 axis so the field is even in the first variable.
    """
    coeffs = _coefficients(rng, terms, kind)
    widths = rng.uniform(width[0], width[1], terms)
    centers = rng.uniform(-spread, spread, (terms, 2))
    if even_x1:
        centers[:, 0] = 0.0
    return QField2.from_function(grid, mixture_fn(coeffs, widths, centers))


def random_symbol(
    grid_x: Grid2,
    grid_xi: Grid2,
    rng: np.random.Generator,
    terms: int = 3,
    parity: str = "joint",
    kind: str = "quaternion",
) -> QField4:
    """Random smooth symbol sigma(x, xi), even in xi.

    parity="joint" gives sigma(x, xi) = sigma(x, -xi); parity="separate"
    gives evenness in xi1 and xi2 individually.
    """
    coeffs = _coefficients(rng, terms, kind)
    widths = rng.uniform(0.85, 1.15, (terms, 2))
    cx = rng.uniform(-0.2, 0.2, (terms, 2))
    cxi = rng.uniform(-0.2, 0.2, (terms, 2))
    if parity == "separate":
        cxi[:] = 0.0
    elif parity != "joint":
        raise ValueError("parity must be 'joint' or 'separate'")

    def fn(x1, x2, s1, s2):
        x1, x2, s1, s2 = np.broadcast_arrays(*(np.asarray(t, float) for t in (x1, x2, s1, s2)))
        out = np.zeros(x1.shape + (4,))
        for c, (a, b), mx, ms in zip(coeffs, widths, cx, cxi):
            gx = np.exp(-np.pi * a * ((x1 - mx[0]) ** 2 + (x2 - mx[1]) ** 2))
            # even combination of two bumps centred at +ms and -ms
            gp = np.exp(-np.pi * b * ((s1 - ms[0]) ** 2 + (s2 - ms[1]) ** 2))
            gm = np.exp(-np.pi * b * ((s1 + ms[0]) ** 2 + (s2 + ms[1]) ** 2))
            out += (gx * 0.5 * (gp + gm))[..., None] * c
        return out

    return QField4.from_function(grid_x, grid_xi, fn)


def minus_ideal(f: QField2) -> QField2:
    """f (1-k)/2."""
    return f.right_mul(E_MINUS)
