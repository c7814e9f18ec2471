import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qweyl.fields import gaussian, random_field, random_symbol
from qweyl.grid import (
    Grid2,
    QField2,
    QField4,
    inner,
    integrate,
    lp_norm,
    modulate_i,
    modulate_j,
    phase_space_grids,
    read_field,
    read_mask,
    reflect_i,
    reflect_j,
    translate,
    write_field,
    write_mask,
)
from qweyl.quaternion import I, J, qmul


@pytest.mark.parametrize("n,l", [(3, 1.0), (0, 1.0), (8, 0.0), (8, -1.0)])
def test_invalid_grids(n, l):
    with pytest.raises(ValueError):
        Grid2(n, l)


@given(st.integers(1, 40).map(lambda k: 2 * k), st.floats(0.25, 8))
def test_reciprocal_spacing(n, l):
    g = Grid2(n, l)
    r = g.reciprocal()
    assert r.n == n
    assert math.isclose(r.h, 1.0 / (2 * l))
    assert g.points[0] == -l and math.isclose(g.points[-1], l - g.h)
    assert r.reciprocal().same_as(g)


def test_self_dual():
    g = Grid2.self_dual(12)
    assert g.is_self_dual and g.reciprocal().same_as(g)
    assert Grid2(16, 2).is_self_dual and not Grid2(64, 6).is_self_dual


def test_phase_space_grids():
    xg, sg = phase_space_grids(Grid2(8, 2))
    assert xg.n == 16 and xg.h == 0.25
    assert sg.n == 16 and sg.h == 1 / 8


def test_lattice_index():
    g = Grid2(8, 2)
    assert g.lattice_index(1.5) == 3
    assert g.is_lattice(-2.0)
    assert not g.is_lattice(0.3)
    with pytest.raises(ValueError):
        g.lattice_index(0.3)


def test_gaussian_integrals():
    # int exp(-pi |x|^2) dx = 1 and ||phi||_2^2 = 1/2; the tails beyond l = 4 are negligible
    phi = gaussian(Grid2(64, 4))
    assert integrate(phi).isclose(1.0, atol=1e-14)
    assert lp_norm(phi) ** 2 == pytest.approx(0.5, abs=1e-14)
    assert lp_norm(phi, 1) == pytest.approx(1.0, abs=1e-14)


def test_inner_is_left_linear_and_hermitian(rng):
    g = Grid2(16, 3)
    f, h = random_field(g, rng), random_field(g, rng)
    q = rng.standard_normal(4)
    assert inner(f.left_mul(q), h).isclose(qmul(q, inner(f, h).array), atol=1e-12)
    assert inner(f, h).isclose(inner(h, f).conj(), atol=1e-12)
    assert inner(f, f).isclose(lp_norm(f) ** 2, atol=1e-12)


def test_interpolation_reproduces_lattice_values(rng):
    g = Grid2(16, 3)
    f = random_field(g, rng)
    sampled = QField2(g, f.values)
    x1, x2 = g.mesh()
    np.testing.assert_allclose(sampled.evaluate(x1, x2), f.values, atol=1e-12)
    # a band-limited field is reproduced between the nodes as well
    wave = QField2.from_function(g, lambda a, b: np.stack([np.cos(np.pi * a / 3), np.sin(np.pi * b / 3), 0 * a, 0 * a], -1))
    pts = np.array([0.123, -1.7, 2.2])
    np.testing.assert_allclose(QField2(g, wave.values).evaluate(pts, pts), wave.evaluate(pts, pts), atol=1e-12)


def test_split_parts_of_field(rng):
    f = random_field(Grid2(8, 2), rng)
    np.testing.assert_allclose((f.plus() + f.minus()).values, f.values, atol=1e-14)
    assert lp_norm(f) ** 2 == pytest.approx(lp_norm(f.plus()) ** 2 + lp_norm(f.minus()) ** 2)


def test_translation_is_a_lattice_roll(rng):
    g = Grid2(16, 3)
    f = random_field(g, rng)
    t = translate(f, (g.h * 2, -g.h))
    x1, x2 = g.mesh()
    np.testing.assert_allclose(t.values, np.roll(f.values, (2, -1), axis=(0, 1)))
    np.testing.assert_allclose(t.evaluate(0.4, 0.2), f.evaluate(0.4 - 2 * g.h, 0.2 + g.h))
    with pytest.raises(ValueError):
        translate(f, (0.1, 0.0))


def test_modulations(rng):
    g = Grid2(8, 2)
    f = random_field(g, rng)
    x1, x2 = g.mesh()
    mi = modulate_i(f, 0.5)
    np.testing.assert_allclose(mi.values[3, 5], qmul(np.cos(np.pi * x1[3, 5]) * np.array([1, 0, 0, 0]) + np.sin(np.pi * x1[3, 5]) * I, f.values[3, 5]))
    mj = modulate_j(f, 0.5)
    np.testing.assert_allclose(mj.values[3, 5], qmul(f.values[3, 5], np.cos(np.pi * x2[3, 5]) * np.array([1, 0, 0, 0]) + np.sin(np.pi * x2[3, 5]) * J))


def test_reflections(rng):
    g = Grid2(8, 2)
    f = random_field(g, rng)
    ri, rj = reflect_i(f), reflect_j(f)
    np.testing.assert_allclose(ri.values[..., :2], f.values[..., :2])
    np.testing.assert_allclose(ri.evaluate(0.3, 0.1)[2:], f.evaluate(-0.3, 0.1)[2:])
    np.testing.assert_allclose(rj.evaluate(0.3, 0.1)[[1, 3]], f.evaluate(0.3, -0.1)[[1, 3]])
    np.testing.assert_allclose(reflect_i(ri).values, f.values)


def test_even_in_first_variable(rng):
    g = Grid2(8, 2)
    assert random_field(g, rng, even_x1=True).is_even_x1()
    assert not random_field(g, rng, spread=0.5).is_even_x1()


def test_field_files_roundtrip(tmp_path, rng):
    g = Grid2(8, 2)
    f = random_field(g, rng)
    write_field(tmp_path / "f.qf2", f)
    back = read_field(tmp_path / "f.qf2")
    assert back.grid.same_as(g)
    np.testing.assert_array_equal(back.values, f.values)
    xg, sg = phase_space_grids(g)
    s = random_symbol(xg, sg, rng)
    write_field(tmp_path / "s.qf4", s)
    back4 = read_field(tmp_path / "s.qf4")
    assert isinstance(back4, QField4) and back4.grid_b.same_as(sg)
    np.testing.assert_array_equal(back4.values, s.values)


def test_corrupt_field_file(tmp_path):
    p = tmp_path / "bad.qf2"
    p.write_bytes(b"nope")
    with pytest.raises(ValueError):
        read_field(p)
    p.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        read_field(p)


def test_mask_roundtrip(tmp_path, rng):
    g = Grid2(8, 2)
    m13, m24 = rng.random((8, 8)) < 0.3, rng.random((8, 8)) < 0.3
    write_mask(tmp_path / "a.qmk", g, m13, m24)
    g2, a, b = read_mask(tmp_path / "a.qmk")
    assert g2.same_as(g)
    np.testing.assert_array_equal(a, m13)
    np.testing.assert_array_equal(b, m24)


def test_wrong_value_shape():
    with pytest.raises(ValueError):
        QField2(Grid2(8, 2), np.zeros((8, 8, 3)))
    with pytest.raises(ValueError):
        QField4(Grid2(4, 1), Grid2(4, 1), np.zeros((4, 4, 4, 4)))
