import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qweyl.fields import gaussian, random_field
from qweyl.grid import Grid2, QField2, lp_norm
from qweyl.qft import parseval_defect, qft_forward, qft_inverse, qft_split
from qweyl.quaternion import iexp, jexp, qmul

seeds = st.integers(0, 2**32 - 1)
GRID = Grid2(64, 4)


def shifted_gaussian_pair(mu, c):
    """exp(-pi|x - mu|^2) c and its transform e^{-2pi i mu1 y1} e^{-pi|y|^2} c e^{-2pi j mu2 y2}."""

    def f(x1, x2):
        g = np.exp(-np.pi * ((x1 - mu[0]) ** 2 + (x2 - mu[1]) ** 2))
        return g[..., None] * c

    def F(y1, y2):
        g = np.exp(-np.pi * (y1**2 + y2**2))
        return qmul(qmul(iexp(-2 * np.pi * mu[0] * y1), g[..., None] * c), jexp(-2 * np.pi * mu[1] * y2))

    return f, F


@pytest.mark.parametrize("path", ["split", "direct"])
def test_shifted_gaussian_closed_form(path):
    c = np.array([0.3, -1.2, 0.7, 0.5])
    f, F = shifted_gaussian_pair((0.25, -0.5), c)
    out = qft_forward(QField2.from_function(GRID, f), path=path)
    y1, y2 = out.grid.mesh()
    np.testing.assert_allclose(out.values, F(y1, y2), atol=1e-12)


def test_gaussian_fixed_point_on_self_dual_grid():
    g = Grid2.self_dual(64)
    phi = gaussian(g)
    np.testing.assert_allclose(qft_forward(phi).values, phi.values, atol=1e-13)


@given(seeds)
def test_plancherel_and_roundtrip(seed):
    f = random_field(Grid2(32, 4), np.random.default_rng(seed))
    F = qft_forward(f)
    assert lp_norm(F) == pytest.approx(lp_norm(f), rel=1e-12)
    np.testing.assert_allclose(qft_inverse(F).values, f.values, atol=1e-12)
    assert qft_inverse(F).grid.same_as(f.grid)


@given(seeds)
def test_split_and_direct_paths_agree(seed):
    f = random_field(Grid2(16, 3), np.random.default_rng(seed))
    a, b = qft_forward(f, "split"), qft_forward(f, "direct")
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
    ai, bi = qft_inverse(a, "split"), qft_inverse(a, "direct")
    np.testing.assert_allclose(ai.values, bi.values, atol=1e-12)


@given(seeds)
def test_transform_is_additive_over_the_split(seed):
    f = random_field(Grid2(16, 3), np.random.default_rng(seed))
    fp, fm = qft_split(f)
    np.testing.assert_allclose((fp + fm).values, qft_forward(f).values, atol=1e-12)
    # each split ideal is preserved by the transform
    np.testing.assert_allclose(fp.minus().values, 0, atol=1e-12)
    np.testing.assert_allclose(fm.plus().values, 0, atol=1e-12)


@given(seeds)
def test_parseval_with_reflection(seed):
    rng = np.random.default_rng(seed)
    g = Grid2(16, 3)
    assert parseval_defect(random_field(g, rng), random_field(g, rng)) < 1e-12


def test_output_grid_is_reciprocal():
    g = Grid2(16, 2)
    assert qft_forward(gaussian(g)).grid.same_as(g.reciprocal())


def test_unknown_path():
    with pytest.raises(ValueError):
        qft_forward(gaussian(Grid2(8, 2)), path="fast")
