import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qweyl.grid import Grid2, QField4
from qweyl.quaternion import iexp, jexp, qabs, qmul
from qweyl.tsm import (
    SphereQuad4,
    bump_field,
    bump_fn,
    gaussian4_fn,
    lambda_tilde,
    reflection_sides,
    split_reduction_sides,
    support_radius,
    support_theorem_check,
    tsm,
)

seeds = st.integers(0, 2**32 - 1)


def random_fn(rng):
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


@pytest.mark.parametrize("r", [0.4, 1.7])
def test_sphere_moments(r):
    # uniform measure on S^3: E x_a^2 = 1/4, E x_a^4 = 1/8, E x_a^2 x_b^2 = 1/24
    q = SphereQuad4.build(r)
    z = q.nodes / r
    np.testing.assert_allclose(np.linalg.norm(q.nodes, axis=1), r, rtol=1e-14)
    assert q.weights.sum() == pytest.approx(1.0, abs=1e-14)
    m2 = np.einsum("k,ka,kb->ab", q.weights, z, z)
    np.testing.assert_allclose(m2, np.eye(4) / 4, atol=1e-14)
    m4 = np.einsum("k,ka,kb->ab", q.weights, z**2, z**2)
    np.testing.assert_allclose(m4, np.where(np.eye(4) > 0, 1 / 8, 1 / 24), atol=1e-14)
    np.testing.assert_allclose(q.integrate(z**3), 0, atol=1e-14)


def test_gaussian_centre_value():
    for r in (0.3, 1.0, 2.0):
        v = tsm(gaussian4_fn, (0, 0), (0, 0), r)
        np.testing.assert_allclose(v, [np.exp(-np.pi * r * r), 0, 0, 0], atol=1e-14)


def test_against_monte_carlo_on_the_sphere(rng):
    fn = random_fn(rng)
    p, q, r = np.array([0.3, -0.2]), np.array([0.1, 0.5]), 0.8
    z = rng.standard_normal((400_000, 4))
    z = r * z / np.linalg.norm(z, axis=1, keepdims=True)
    u1, u2, v1, v2 = z.T
    vals = fn(p[0] - u1, p[1] - u2, q[0] - v1, q[1] - v2)
    mc = qmul(qmul(iexp(np.pi * (u1 * q[0] - p[0] * v1)), vals), jexp(np.pi * (u2 * q[1] - p[1] * v2))).mean(0)
    np.testing.assert_allclose(tsm(fn, p, q, r), mc, atol=1e-2)


def test_node_refinement_converges(rng):
    fn = random_fn(rng)
    a = tsm(fn, (0.2, 0.1), (-0.3, 0.4), 1.1)
    b = tsm(fn, (0.2, 0.1), (-0.3, 0.4), 1.1, counts=(24, 24, 24))
    c = tsm(fn, (0.2, 0.1), (-0.3, 0.4), 1.1, counts=(32, 32, 32))
    np.testing.assert_allclose(b, c, atol=1e-12)
    np.testing.assert_allclose(a, c, atol=1e-7)


@settings(max_examples=8)
@given(seeds)
def test_split_reduction(seed):
    rng = np.random.default_rng(seed)
    lhs, rhs = split_reduction_sides(random_fn(rng), rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), rng.uniform(0.2, 1.5))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=8)
@given(seeds)
def test_reflection_identity(seed):
    rng = np.random.default_rng(seed)
    lhs, rhs = reflection_sides(random_fn(rng), rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), rng.uniform(0.2, 1.5))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_lambda_tilde():
    np.testing.assert_array_equal(lambda_tilde([1, 2, 3, 4]), [[1, -2, 3, -4]])


def test_bump_support():
    grid = Grid2(16, 4)
    f = bump_field(grid, 0.5)
    assert support_radius(f) <= 0.5
    assert bump_fn(0.5)(0.6, 0, 0, 0)[0] == 0.0
    assert bump_fn(0.5)(0.0, 0, 0, 0)[0] == pytest.approx(np.exp(-1))


def test_support_theorem_forward_and_converse(rng):
    grid = Grid2(16, 4)
    rep = support_theorem_check(bump_field(grid, 0.5), 0.5, 0.2, witness=bump_field(grid, 1.0), rng=rng)
    assert rep.forward_max <= 1e-6
    assert rep.samples > 1
    assert rep.converse_max >= 1e-3


def test_support_theorem_input_checks(rng):
    grid = Grid2(16, 4)
    with pytest.raises(ValueError):
        support_theorem_check(bump_field(grid, 1.0), 0.5, 0.2)
    with pytest.raises(ValueError):
        support_theorem_check(bump_field(grid, 0.5), 0.5, 0.2, witness=bump_field(grid, 0.4))


def test_radius_limits(rng):
    f = QField4.from_function(Grid2(8, 2), Grid2(8, 2), gaussian4_fn)
    with pytest.raises(ValueError):
        tsm(f, (0, 0), (0, 0), 1.5)
    with pytest.raises(ValueError):
        SphereQuad4.build(-1.0)
    assert qabs(tsm(f, (0, 0), (0, 0), 0.5)) > 0
