"""Quaternion arithmetic on numpy arrays and dense quaternion matrices.

Arrays of quaternions carry the four real components (w, x, y, z) on the
last axis, so ``q[..., 0]`` is the scalar part and ``q[..., 1:]`` the
coefficients of i, j, k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def as_quat_array(q) -> np.ndarray:
    """Coerce a Quaternion, a length-4 sequence or an (...,4) array."""
    if isinstance(q, Quaternion):
        return q.array
    a = np.asarray(q, dtype=float)
    if a.shape[-1:] != (4,):
        raise ValueError(f"expected trailing axis of length 4, got shape {a.shape}")
    return a


def qmul(p, q) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    p = as_quat_array(p)
    q = as_quat_array(q)
    a0, a1, a2, a3 = np.moveaxis(p, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(q) -> np.ndarray:
    return as_quat_array(q) * _CONJ


def qabs2(q) -> np.ndarray:
    q = as_quat_array(q)
    return np.sum(q * q, axis=-1)


def qabs(q) -> np.ndarray:
    return np.sqrt(qabs2(q))


def left_matrix(q) -> np.ndarray:
    """Real 4x4 matrices L with L @ p == q * p (componentwise)."""
    a, b, c, d = np.moveaxis(as_quat_array(q), -1, 0)
    return np.stack(
        [
            np.stack([a, -b, -c, -d], -1),
            np.stack([b, a, -d, c], -1),
            np.stack([c, d, a, -b], -1),
            np.stack([d, -c, b, a], -1),
        ],
        axis=-2,
    )


def right_matrix(q) -> np.ndarray:
    """Real 4x4 matrices R with R @ p == p * q."""
    a, b, c, d = np.moveaxis(as_quat_array(q), -1, 0)
    return np.stack(
        [
            np.stack([a, -b, -c, -d], -1),
            np.stack([b, a, d, -c], -1),
            np.stack([c, -d, a, b], -1),
            np.stack([d, c, -b, a], -1),
        ],
        axis=-2,
    )


def _unit_exp(theta, axis: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (4,))
    out[..., 0] = np.cos(theta)
    out[..., axis] = np.sin(theta)
    return out


def iexp(theta) -> np.ndarray:
    """exp(i*theta) as quaternion array."""
    return _unit_exp(theta, 1)


def jexp(theta) -> np.ndarray:
    """exp(j*theta) as quaternion array."""
    return _unit_exp(theta, 2)


def kexp(theta) -> np.ndarray:
    return _unit_exp(theta, 3)


ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
E_PLUS = np.array([0.5, 0.0, 0.0, 0.5])  # (1+k)/2
E_MINUS = np.array([0.5, 0.0, 0.0, -0.5])  # (1-k)/2


# -- split representation ----------------------------------------------------
#
# Every quaternion decomposes uniquely as q = c+ (1+k)/2 + c- (1-k)/2 with
# c+, c- complex numbers in the i-plane.  Then q+ = (q + iqj)/2 = c+ (1+k)/2
# and q- = (q - iqj)/2 = c- (1-k)/2.


def split_coeffs(q):
    """Complex coefficients (c+, c-) of the split q = c+(1+k)/2 + c-(1-k)/2."""
    q = as_quat_array(q)
    w, x, y, z = np.moveaxis(q, -1, 0)
    return (w + z) + 1j * (x - y), (w - z) + 1j * (x + y)


def from_split_coeffs(cp, cm) -> np.ndarray:
    """Inverse of split_coeffs."""
    cp = np.asarray(cp, dtype=complex)
    cm = np.asarray(cm, dtype=complex)
    a, b = cp.real, cp.imag
    c, d = cm.real, cm.imag
    return 0.5 * np.stack([a + c, b + d, d - b, a - c], axis=-1)


def split_pm(q):
    """The pair (q+, q-) with q± = (q ± i q j)/2, as quaternion arrays."""
    cp, cm = split_coeffs(q)
    zero = np.zeros_like(cp)
    return from_split_coeffs(cp, zero), from_split_coeffs(zero, cm)


def commutator_exp(side: str, a: float):
    """Both sides of (1±k) e^{aj} = e^{∓ai} (1±k)."""
    if side == "plus":
        e, s = np.array([1.0, 0, 0, 1.0]), -1.0
    elif side == "minus":
        e, s = np.array([1.0, 0, 0, -1.0]), 1.0
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    return qmul(e, jexp(a)), qmul(iexp(s * a), e)


# -- scalar type -------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    __abs__ = norm

    def split(self):
        plus, minus = split_pm(self.array)
        return SplitPair(Quaternion.from_array(plus), Quaternion.from_array(minus))

    def __add__(self, other):
        return Quaternion.from_array(self.array + as_quat_array(_lift(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.array - as_quat_array(_lift(other)))

    def __rsub__(self, other):
        return Quaternion.from_array(as_quat_array(_lift(other)) - self.array)

    def __neg__(self):
        return Quaternion.from_array(-self.array)

    def __mul__(self, other):
        return Quaternion.from_array(qmul(self.array, _lift(other)))

    def __rmul__(self, other):
        return Quaternion.from_array(qmul(_lift(other), self.array))

    def __truediv__(self, s: float):
        return Quaternion.from_array(self.array / float(s))

    def isclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.array, as_quat_array(_lift(other)), rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"Quaternion({self.w:.6g}, {self.x:.6g}, {self.y:.6g}, {self.z:.6g})"


def _lift(v):
    if isinstance(v, (int, float, np.floating, np.integer)):
        return np.array([float(v), 0.0, 0.0, 0.0])
    return as_quat_array(v)


@dataclass(frozen=True)
class SplitPair:
    plus: Quaternion
    minus: Quaternion


# -- dense quaternion matrices ------------------------------------------------


def complex_adjoint_array(entries: np.ndarray) -> np.ndarray:
    """Blockwise chi: q = a + j b  ->  [[a, -conj(b)], [b, conj(a)]].

    Here a = w + x i and b = y - z i, so that j b = y j + z k.
    """
    entries = np.asarray(entries, dtype=float)
    r, c = entries.shape[:2]
    a = entries[..., 0] + 1j * entries[..., 1]
    b = entries[..., 2] - 1j * entries[..., 3]
    out = np.empty((2 * r, 2 * c), dtype=complex)
    out[0::2, 0::2] = a
    out[0::2, 1::2] = -np.conj(b)
    out[1::2, 0::2] = b
    out[1::2, 1::2] = np.conj(a)
    return out


def from_complex_adjoint(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    a = m[0::2, 0::2]
    b = m[1::2, 0::2]
    return np.stack([a.real, a.imag, b.real, -b.imag], axis=-1)


class AmbiguousRankError(ValueError):
    pass


@dataclass(frozen=True)
class QMatrix:
    """Dense quaternion matrix; ``entries`` has shape (rows, cols, 4)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 3 or e.shape[2] != 4:
            raise ValueError(f"QMatrix entries must have shape (r, c, 4), got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        e = np.zeros((n, n, 4))
        e[np.arange(n), np.arange(n), 0] = 1.0
        return cls(e)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(np.zeros((rows, cols, 4)))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape[:2]

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        # chi is a homomorphism, so the product can go through complex matrices.
        return QMatrix(from_complex_adjoint(self.chi() @ other.chi()))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.entries + other.entries)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix(self.entries - other.entries)

    def scale(self, s: float) -> "QMatrix":
        return QMatrix(self.entries * float(s))

    def left_scalar(self, q) -> "QMatrix":
        return QMatrix(qmul(as_quat_array(q), self.entries))

    def right_scalar(self, q) -> "QMatrix":
        return QMatrix(qmul(self.entries, as_quat_array(q)))

    def conj_transpose(self) -> "QMatrix":
        return QMatrix(np.swapaxes(qconj(self.entries), 0, 1))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Left action on a quaternion vector of shape (cols, 4)."""
        v = as_quat_array(v)
        return np.einsum("rcab,cb->ra", left_matrix(self.entries), v)

    def chi(self) -> np.ndarray:
        return complex_adjoint_array(self.entries)

    def singular_values(self) -> np.ndarray:
        """Quaternionic singular values (each appears twice in chi; one copy kept)."""
        s = np.linalg.svd(self.chi(), compute_uv=False)
        return s[0::2]

    def trace(self) -> Quaternion:
        if self.rows != self.cols:
            raise ValueError("trace needs a square matrix")
        return Quaternion.from_array(np.einsum("iia->a", self.entries))

    def hs_norm(self) -> float:
        return float(np.sqrt(np.sum(self.entries**2)))

    def nuclear_norm(self) -> float:
        return float(np.sum(np.linalg.svd(self.chi(), compute_uv=False)) / 2.0)

    def rank(self, tau_rel: float = 1e-8) -> int:
        s = np.linalg.svd(self.chi(), compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        tau = tau_rel * s[0]
        if np.any((s > tau / 10) & (s < tau * 10)):
            raise AmbiguousRankError(
                f"singular values within a factor 10 of the rank threshold {tau:.3e}"
            )
        return int(np.sum(s > tau)) // 2


def complex_adjoint(a: QMatrix) -> np.ndarray:
    return a.chi()


def qrank(a: QMatrix, tau_rel: float = 1e-8) -> int:
    return a.rank(tau_rel)


def qtrace(a: QMatrix) -> Quaternion:
    return a.trace()


def hs_norm(a: QMatrix) -> float:
    return a.hs_norm()
