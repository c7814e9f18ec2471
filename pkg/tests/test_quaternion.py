import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qweyl.quaternion import (
    E_MINUS,
    E_PLUS,
    I,
    J,
    K,
    ONE,
    AmbiguousRankError,
    QMatrix,
    Quaternion,
    commutator_exp,
    from_complex_adjoint,
    from_split_coeffs,
    iexp,
    jexp,
    kexp,
    left_matrix,
    qabs,
    qconj,
    qmul,
    right_matrix,
    split_coeffs,
    split_pm,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = arrays(np.float64, (4,), elements=finite)


def table_mul(p, q):
    """Hamilton product from the multiplication table of the basis units."""
    units = [ONE, I, J, K]
    # products of basis units: row * column
    table = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    out = np.zeros(4)
    for a in range(4):
        for b in range(4):
            s, c = table[(a, b)]
            out += s * p[a] * q[b] * units[c]
    return out


@given(quats, quats)
def test_product_matches_unit_table(p, q):
    np.testing.assert_allclose(qmul(p, q), table_mul(p, q), atol=1e-9)


def test_hamilton_rules():
    for u in (I, J, K):
        np.testing.assert_array_equal(qmul(u, u), -ONE)
    np.testing.assert_array_equal(qmul(qmul(I, J), K), -ONE)
    np.testing.assert_array_equal(qmul(J, I), -K)


@given(quats, quats, quats)
def test_associative(p, q, r):
    np.testing.assert_allclose(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), atol=1e-8 * (1 + np.abs(p).sum() * np.abs(q).sum() * np.abs(r).sum()))


@given(quats, quats)
def test_norm_is_multiplicative_and_conj_reverses(p, q):
    assert np.isclose(qabs(qmul(p, q)), qabs(p) * qabs(q), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(qconj(qmul(p, q)), qmul(qconj(q), qconj(p)), atol=1e-9)


@given(quats, quats)
def test_left_and_right_matrices(p, q):
    np.testing.assert_allclose(left_matrix(p) @ q, qmul(p, q), atol=1e-9)
    np.testing.assert_allclose(right_matrix(q) @ p, qmul(p, q), atol=1e-9)


@given(finite)
def test_unit_exponentials(t):
    for ex, u in ((iexp, I), (jexp, J), (kexp, K)):
        np.testing.assert_allclose(ex(t), np.cos(t) * ONE + np.sin(t) * u, atol=1e-15)


@given(quats)
def test_split_parts_from_definition(q):
    plus, minus = split_pm(q)
    iqj = qmul(qmul(I, q), J)
    np.testing.assert_allclose(plus, (q + iqj) / 2, atol=1e-12)
    np.testing.assert_allclose(minus, (q - iqj) / 2, atol=1e-12)
    np.testing.assert_allclose(plus + minus, q, atol=1e-12)
    assert np.isclose(qabs(q) ** 2, qabs(plus) ** 2 + qabs(minus) ** 2, rtol=1e-12, atol=1e-12)


@given(quats)
def test_split_coefficients_roundtrip(q):
    cp, cm = split_coeffs(q)
    np.testing.assert_allclose(from_split_coeffs(cp, cm), q, atol=1e-12)
    # q = c+ e+ + c- e- with c± read as a + b i
    rebuilt = qmul([cp.real, cp.imag, 0, 0], E_PLUS) + qmul([cm.real, cm.imag, 0, 0], E_MINUS)
    np.testing.assert_allclose(rebuilt, q, atol=1e-12)


def test_split_units_are_eigenvectors_of_the_sandwich():
    # q -> i q j fixes (1+k)/2 and negates (1-k)/2
    np.testing.assert_allclose(qmul(qmul(I, E_PLUS), J), E_PLUS)
    np.testing.assert_allclose(qmul(qmul(I, E_MINUS), J), -E_MINUS)


@given(finite)
def test_exponential_passes_through_the_idempotents(a):
    for side in ("plus", "minus"):
        lhs, rhs = commutator_exp(side, a)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)
    with pytest.raises(ValueError):
        commutator_exp("sideways", a)


def test_quaternion_scalar_type():
    q = Quaternion(1, 2, 3, 4)
    assert (q * q.conj()).isclose(q.norm() ** 2)
    assert (2 * q - q).isclose(q)
    s = q.split()
    assert (s.plus + s.minus).isclose(q)
    assert abs(Quaternion(0, 3, 0, 4)) == 5.0


def random_qmatrix(rng, r, c):
    return QMatrix(rng.standard_normal((r, c, 4)))


def naive_matmul(a, b):
    out = np.zeros((a.rows, b.cols, 4))
    for i in range(a.rows):
        for j in range(b.cols):
            for k in range(a.cols):
                out[i, j] += qmul(a.entries[i, k], b.entries[k, j])
    return out


def test_adjoint_is_a_homomorphism(rng):
    a, b = random_qmatrix(rng, 3, 4), random_qmatrix(rng, 4, 2)
    np.testing.assert_allclose((a @ b).entries, naive_matmul(a, b), atol=1e-12)
    np.testing.assert_allclose(from_complex_adjoint(a.chi()), a.entries, atol=0)
    np.testing.assert_allclose(a.conj_transpose().chi(), a.chi().conj().T, atol=0)


def test_apply_matches_product(rng):
    a = random_qmatrix(rng, 3, 3)
    v = rng.standard_normal((3, 4))
    want = naive_matmul(a, QMatrix(v[:, None, :]))[:, 0]
    np.testing.assert_allclose(a.apply(v), want, atol=1e-12)


def test_singular_values_are_paired(rng):
    a = random_qmatrix(rng, 4, 4)
    s = np.linalg.svd(a.chi(), compute_uv=False)
    np.testing.assert_allclose(s[0::2], s[1::2], rtol=1e-10)
    assert np.isclose(a.hs_norm() ** 2, np.sum(a.singular_values() ** 2))
    assert np.isclose(a.nuclear_norm(), np.sum(a.singular_values()))


def test_norms_of_identity_and_unitary_scalar():
    e = QMatrix.identity(5)
    assert e.nuclear_norm() == pytest.approx(5.0)
    assert e.hs_norm() == pytest.approx(np.sqrt(5.0))
    u = e.left_scalar(iexp(0.3)).right_scalar(jexp(1.1))
    np.testing.assert_allclose(u.singular_values(), np.ones(5), atol=1e-12)
    assert e.trace().isclose(5.0)


def test_rank_of_outer_products(rng):
    u = random_qmatrix(rng, 6, 1)
    v = random_qmatrix(rng, 1, 6)
    w = random_qmatrix(rng, 6, 1)
    x = random_qmatrix(rng, 1, 6)
    assert (u @ v).rank() == 1
    assert ((u @ v) + (w @ x)).rank() == 2
    assert QMatrix.zeros(3, 3).rank() == 0


def test_rank_refuses_ambiguous_spectrum():
    e = np.zeros((2, 2, 4))
    e[0, 0, 0] = 1.0
    e[1, 1, 0] = 2e-8
    with pytest.raises(AmbiguousRankError):
        QMatrix(e).rank()


def test_bad_shapes_rejected():
    with pytest.raises(ValueError):
        QMatrix(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        qmul(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        QMatrix.identity(2) @ QMatrix.zeros(3, 3)
