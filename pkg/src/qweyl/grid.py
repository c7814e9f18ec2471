"""Uniform grids and sampled quaternion fields on R^2 and R^4.

A ``Grid2(n, l)`` covers [-l, l) on each axis with points -l + m h,
h = 2l/n.  Fields store samples with shape (n, n, 4) (2D) or
(na, na, nb, nb, 4) (4D, two possibly different grids for the two
coordinate pairs, e.g. position and frequency).

A field may carry the analytic function it was sampled from; it is then
used for off-lattice evaluation.  Otherwise off-lattice values come from
trigonometric interpolation in the periodic model, extended by zero
outside [-l, l).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quaternion import Quaternion, as_quat_array, iexp, jexp, qabs, qconj, qmul, split_coeffs

LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class Grid2:
    n: int
    l: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n}")
        if not self.l > 0:
            raise ValueError(f"l must be positive, got {self.l}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "l", float(self.l))

    @property
    def h(self) -> float:
        return 2.0 * self.l / self.n

    @property
    def points(self) -> np.ndarray:
        return -self.l + self.h * np.arange(self.n)

    def mesh(self):
        return np.meshgrid(self.points, self.points, indexing="ij")

    def reciprocal(self) -> "Grid2":
        """Frequency grid: spacing 1/(2l), n points covering [-n/(4l), n/(4l))."""
        return Grid2(self.n, self.n / (4.0 * self.l))

    def refined(self, factor: int = 2) -> "Grid2":
        return Grid2(self.n * factor, self.l)

    @property
    def is_self_dual(self) -> bool:
        return math.isclose(self.n, 4.0 * self.l**2, rel_tol=1e-12)

    @classmethod
    def self_dual(cls, n: int) -> "Grid2":
        return cls(n, math.sqrt(n) / 2.0)

    def lattice_index(self, a: float) -> int:
        """Integer m with a = m h (raises if a is not a lattice multiple)."""
        m = a / self.h
        r = round(m)
        if abs(m - r) > LATTICE_TOL * max(1.0, abs(m)):
            raise ValueError(f"{a!r} is not a multiple of the grid spacing {self.h!r}")
        return int(r)

    def is_lattice(self, a: float) -> bool:
        try:
            self.lattice_index(a)
        except ValueError:
            return False
        return True

    def reflect_index(self) -> np.ndarray:
        """Index map m -> m' with x_{m'} = -x_m modulo the period 2l."""
        return (-np.arange(self.n)) % self.n

    def same_as(self, other: "Grid2") -> bool:
        return self.n == other.n and math.isclose(self.l, other.l, rel_tol=1e-12)


def phase_space_grids(grid: Grid2):
    """Position and frequency grids for phase-space objects built from fields on ``grid``.

    Both are refined by two relative to the field lattice: positions on
    Grid2(2n, l) (spacing h/2), frequencies on Grid2(2n, n/(4l)) (spacing 1/(4l)).
    """
    return Grid2(2 * grid.n, grid.l), Grid2(2 * grid.n, grid.n / (4.0 * grid.l))


def check_grid(a: Grid2, b: Grid2, what: str = "grid"):
    if not a.same_as(b):
        raise ValueError(f"{what} mismatch: {a} vs {b}")


# -- trigonometric interpolation -------------------------------------------


def trig_matrix(grid: Grid2, pts, zero_outside: bool = True) -> np.ndarray:
    """Matrix M with (M @ samples) = periodic trigonometric interpolant at ``pts``.

    The Nyquist mode is split symmetrically, so real samples give a real
    interpolant.  Points outside [-l, l) get zero rows when ``zero_outside``.
    """
    pts = np.asarray(pts, dtype=float).ravel()
    n = grid.n
    t = (pts[:, None] + grid.l) / (2 * grid.l) - np.arange(n)[None, :] / n
    t = t - np.round(t)
    s = np.sin(np.pi * t)
    small = np.abs(s) < 1e-14
    safe = np.where(small, 1.0, s)
    d = np.where(small, float(n), np.sin(n * np.pi * t) * np.cos(np.pi * t) / safe)
    m = d / n
    if zero_outside:
        inside = (pts >= -grid.l - 1e-12) & (pts < grid.l - 1e-12)
        m[~inside] = 0.0
    return m


# -- fields -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QField2:
    grid: Grid2
    values: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = self.grid.n
        if v.shape != (n, n, 4):
            raise ValueError(f"values must have shape {(n, n, 4)}, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid2, fn: Callable) -> "QField2":
        """Sample fn(x1, x2) -> (..., 4) on the grid and keep fn for off-lattice use."""
        x1, x2 = grid.mesh()
        return cls(grid, np.asarray(fn(x1, x2), dtype=float), fn)

    @classmethod
    def zeros(cls, grid: Grid2) -> "QField2":
        return cls(grid, np.zeros((grid.n, grid.n, 4)), lambda a, b: np.zeros(np.broadcast(a, b).shape + (4,)))

    def sample(self, xs1, xs2) -> np.ndarray:
        """Values on the tensor product xs1 x xs2, shape (len1, len2, 4)."""
        xs1 = np.asarray(xs1, dtype=float)
        xs2 = np.asarray(xs2, dtype=float)
        if self.func is not None:
            a, b = np.meshgrid(xs1, xs2, indexing="ij")
            return np.asarray(self.func(a, b), dtype=float)
        m1 = trig_matrix(self.grid, xs1)
        m2 = trig_matrix(self.grid, xs2)
        return np.einsum("pa,abc,qb->pqc", m1, self.values, m2)

    def evaluate(self, x1, x2) -> np.ndarray:
        """Pointwise values at broadcast coordinate arrays, shape (..., 4)."""
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        if self.func is not None:
            return np.asarray(self.func(x1, x2), dtype=float)
        m1 = trig_matrix(self.grid, x1)
        m2 = trig_matrix(self.grid, x2)
        out = np.einsum("pa,abc,pb->pc", m1, self.values, m2)
        return out.reshape(x1.shape + (4,))

    def resample(self, grid: Grid2) -> "QField2":
        return QField2(grid, self.sample(grid.points, grid.points), self.func)

    def split(self):
        """Complex coefficient arrays (c+, c-) of the pointwise split."""
        return split_coeffs(self.values)

    def plus(self) -> "QField2":
        return self._map(lambda v: _split_part(v, "plus"))

    def minus(self) -> "QField2":
        return self._map(lambda v: _split_part(v, "minus"))

    def _map(self, op: Callable) -> "QField2":
        fn = None
        if self.func is not None:
            f0 = self.func
            fn = lambda a, b: op(np.asarray(f0(a, b), dtype=float))
        return QField2(self.grid, op(self.values), fn)

    def left_mul(self, q) -> "QField2":
        q = as_quat_array(q)
        return self._map(lambda v: qmul(q, v))

    def right_mul(self, q) -> "QField2":
        q = as_quat_array(q)
        return self._map(lambda v: qmul(v, q))

    def scale(self, s: float) -> "QField2":
        return self._map(lambda v: v * float(s))

    def conj(self) -> "QField2":
        return self._map(qconj)

    def __add__(self, other: "QField2") -> "QField2":
        return _combine(self, other, np.add)

    def __sub__(self, other: "QField2") -> "QField2":
        return _combine(self, other, np.subtract)

    def is_even_x1(self, tol: float = 1e-12) -> bool:
        r = self.grid.reflect_index()
        return bool(np.max(np.abs(self.values - self.values[r, :, :]), initial=0.0) <= tol)


def _split_part(v, part):
    from .quaternion import split_pm

    p, m = split_pm(v)
    return p if part == "plus" else m


def _combine(f: QField2, g: QField2, op) -> QField2:
    check_grid(f.grid, g.grid)
    fn = None
    if f.func is not None and g.func is not None:
        a_, b_ = f.func, g.func
        fn = lambda x1, x2: op(np.asarray(a_(x1, x2), float), np.asarray(b_(x1, x2), float))
    return QField2(f.grid, op(f.values, g.values), fn)


@dataclass(frozen=True, eq=False)
class QField4:
    """Field over (a1, a2, b1, b2); ``grid_a`` for the first pair, ``grid_b`` for the second."""

    grid_a: Grid2
    grid_b: Grid2
    values: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        na, nb = self.grid_a.n, self.grid_b.n
        if v.shape != (na, na, nb, nb, 4):
            raise ValueError(f"values must have shape {(na, na, nb, nb, 4)}, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid_a: Grid2, grid_b: Grid2, fn: Callable) -> "QField4":
        a1, a2, b1, b2 = np.meshgrid(grid_a.points, grid_a.points, grid_b.points, grid_b.points, indexing="ij")
        return cls(grid_a, grid_b, np.asarray(fn(a1, a2, b1, b2), dtype=float), fn)

    @property
    def weight(self) -> float:
        return self.grid_a.h**2 * self.grid_b.h**2

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        """Values at scattered points ``pts`` of shape (P, 4) (coordinates a1, a2, b1, b2)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 4)
        if self.func is not None:
            return np.asarray(self.func(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]), dtype=float)
        m1 = trig_matrix(self.grid_a, pts[:, 0])
        m2 = trig_matrix(self.grid_a, pts[:, 1])
        m3 = trig_matrix(self.grid_b, pts[:, 2])
        m4 = trig_matrix(self.grid_b, pts[:, 3])
        t = np.einsum("pd,abcdq->pabcq", m4, self.values)
        t = np.einsum("pc,pabcq->pabq", m3, t)
        t = np.einsum("pb,pabq->paq", m2, t)
        return np.einsum("pa,paq->pq", m1, t)

    def scale(self, s: float) -> "QField4":
        fn = None
        if self.func is not None:
            f0 = self.func
            fn = lambda *a: np.asarray(f0(*a), float) * float(s)
        return QField4(self.grid_a, self.grid_b, self.values * float(s), fn)

    def left_mul(self, q) -> "QField4":
        q = as_quat_array(q)
        fn = None
        if self.func is not None:
            f0 = self.func
            fn = lambda *a: qmul(q, np.asarray(f0(*a), float))
        return QField4(self.grid_a, self.grid_b, qmul(q, self.values), fn)


# -- quadrature, norms, pairings ----------------------------------------------


def _weight(f) -> float:
    if isinstance(f, QField2):
        return f.grid.h**2
    return f.weight


def integrate(f) -> Quaternion:
    """Riemann sum h^d * sum(values)."""
    return Quaternion.from_array(_weight(f) * f.values.reshape(-1, 4).sum(axis=0))


def lp_norm(f, r=2) -> float:
    mod = qabs(f.values)
    if r == np.inf or r == "inf":
        return float(mod.max(initial=0.0))
    r = float(r)
    if r < 1:
        raise ValueError("lp_norm needs r >= 1")
    return float((_weight(f) * np.sum(mod**r)) ** (1.0 / r))


def inner(f, g) -> Quaternion:
    """Quaternion pairing: integral of f * conj(g)."""
    _check_same(f, g)
    return Quaternion.from_array(_weight(f) * qmul(f.values, qconj(g.values)).reshape(-1, 4).sum(axis=0))


def _check_same(f, g):
    if type(f) is not type(g):
        raise TypeError("fields of different dimension")
    if isinstance(f, QField2):
        check_grid(f.grid, g.grid)
    else:
        check_grid(f.grid_a, g.grid_a)
        check_grid(f.grid_b, g.grid_b)


def reflect_i(f: QField2) -> QField2:
    """Flip the first argument of the j and k components."""
    r = f.grid.reflect_index()
    v = f.values.copy()
    v[..., 2:] = f.values[r, :, 2:]
    fn = None
    if f.func is not None:
        f0 = f.func

        def fn(a, b):
            out = np.array(f0(a, b), dtype=float)
            out[..., 2:] = np.asarray(f0(-a, b), dtype=float)[..., 2:]
            return out

    return QField2(f.grid, v, fn)


def reflect_j(f: QField2) -> QField2:
    """Flip the second argument of the i and k components."""
    r = f.grid.reflect_index()
    v = f.values.copy()
    v[..., 1] = f.values[:, r, 1]
    v[..., 3] = f.values[:, r, 3]
    fn = None
    if f.func is not None:
        f0 = f.func

        def fn(a, b):
            out = np.array(f0(a, b), dtype=float)
            ref = np.asarray(f0(a, -b), dtype=float)
            out[..., 1] = ref[..., 1]
            out[..., 3] = ref[..., 3]
            return out

    return QField2(f.grid, v, fn)


def translate(f: QField2, a) -> QField2:
    """(T_a f)(x) = f(x - a); a must be a lattice vector.

    Lattice values are rolled periodically.  Closed-form fields translate on
    the plane, interpolated ones wrap around.
    """
    m1 = f.grid.lattice_index(float(a[0]))
    m2 = f.grid.lattice_index(float(a[1]))
    a1, a2 = m1 * f.grid.h, m2 * f.grid.h
    if f.func is not None:
        # closed-form fields live on the plane: translate without wrapping
        fn = lambda x1, x2: f.evaluate(np.asarray(x1) - a1, np.asarray(x2) - a2)
    else:
        fn = lambda x1, x2: f.evaluate(_wrap(f.grid, x1 - a1), _wrap(f.grid, x2 - a2))
    return QField2(f.grid, np.roll(f.values, (m1, m2), axis=(0, 1)), fn)


def _wrap(grid: Grid2, x):
    return (np.asarray(x) + grid.l) % (2 * grid.l) - grid.l


def modulate_i(f: QField2, b1: float) -> QField2:
    """e^{2 pi i b1 x1} f(x), phase on the left."""
    x1, _ = f.grid.mesh()
    fn = lambda a, b: qmul(iexp(2 * np.pi * b1 * np.asarray(a)), f.evaluate(a, b))
    return QField2(f.grid, qmul(iexp(2 * np.pi * b1 * x1), f.values), fn)


def modulate_j(f: QField2, b2: float) -> QField2:
    """f(x) e^{2 pi j b2 x2}, phase on the right."""
    _, x2 = f.grid.mesh()
    fn = lambda a, b: qmul(f.evaluate(a, b), jexp(2 * np.pi * b2 * np.asarray(b)))
    return QField2(f.grid, qmul(f.values, jexp(2 * np.pi * b2 * x2)), fn)


# -- file format "qf2/qf4 v1" -------------------------------------------------
#
# header: magic (4 bytes, b"QF2\0" or b"QF4\0"), version (uint32 = 1),
# d (uint32), n (uint32), l (float64); 4D files append n_b (uint32) and
# l_b (float64) for the second coordinate pair.  Then little-endian float64
# values, four per point (w, x, y, z), row-major.

_HEAD = struct.Struct("<4sIIId")
_HEAD_B = struct.Struct("<Id")
VERSION = 1


def write_field(path, f) -> None:
    if isinstance(f, QField2):
        head = _HEAD.pack(b"QF2\0", VERSION, 2, f.grid.n, f.grid.l)
    else:
        head = _HEAD.pack(b"QF4\0", VERSION, 4, f.grid_a.n, f.grid_a.l) + _HEAD_B.pack(f.grid_b.n, f.grid_b.l)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEAD.size:
        raise ValueError("truncated field file")
    magic, version, d, n, l = _HEAD.unpack_from(data, 0)
    if magic not in (b"QF2\0", b"QF4\0") or version != VERSION:
        raise ValueError(f"not a qf2/qf4 v1 file: magic={magic!r} version={version}")
    off = _HEAD.size
    ga = Grid2(n, l)
    if d == 2:
        vals = np.frombuffer(data, dtype="<f8", offset=off)
        return QField2(ga, vals.reshape(n, n, 4).astype(float))
    if d == 4:
        nb, lb = _HEAD_B.unpack_from(data, off)
        off += _HEAD_B.size
        vals = np.frombuffer(data, dtype="<f8", offset=off)
        return QField4(ga, Grid2(nb, lb), vals.reshape(n, n, nb, nb, 4).astype(float))
    raise ValueError(f"unsupported dimension {d}")


_MASK = struct.Struct("<4sIId")


def write_mask(path, grid: Grid2, mask13: np.ndarray, mask24: np.ndarray) -> None:
    """Two 2D bitmaps (planes (x1,y1) and (x2,y2)) with the grid header."""
    with open(path, "wb") as fh:
        fh.write(_MASK.pack(b"QMK\0", VERSION, grid.n, grid.l))
        fh.write(np.asarray(mask13, dtype=np.uint8).tobytes())
        fh.write(np.asarray(mask24, dtype=np.uint8).tobytes())


def read_mask(path):
    with open(path, "rb") as fh:
        data = fh.read()
    magic, version, n, l = _MASK.unpack_from(data, 0)
    if magic != b"QMK\0" or version != VERSION:
        raise ValueError("not a mask file")
    raw = np.frombuffer(data, dtype=np.uint8, offset=_MASK.size)
    if raw.size != 2 * n * n:
        raise ValueError("mask size does not match header")
    return Grid2(n, l), raw[: n * n].reshape(n, n).astype(bool), raw[n * n :].reshape(n, n).astype(bool)
