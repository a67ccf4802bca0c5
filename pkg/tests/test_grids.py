import numpy as np
import pytest

from phasetrace import GridSpec


def test_axes_exclude_right_edge():
    g = GridSpec(half_extent=4.0, n=8)
    x, xi = g.axes()
    assert len(x) == 8 and len(xi) == 8
    assert x[0] == -4.0
    assert x[-1] == 4.0 - g.h
    assert np.allclose(np.diff(x), g.h)


def test_spacing_and_cell_area():
    g = GridSpec(half_extent=5.0, n=16)
    assert g.h == 10.0 / 16.0
    assert g.cell_area() == g.h * g.h


def test_mesh_shapes_ij_indexing():
    g = GridSpec(half_extent=2.0, n=4)
    X, XI = g.mesh()
    assert X.shape == (4, 4) and XI.shape == (4, 4)
    x, xi = g.axes()
    assert np.all(X[:, 0] == x)      # rows index x
    assert np.all(XI[0, :] == xi)    # columns index xi


@pytest.mark.parametrize("n", [3, 6, 2, 0, -8])
def test_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        GridSpec(half_extent=1.0, n=n)


def test_rejects_nonpositive_extent():
    with pytest.raises(ValueError):
        GridSpec(half_extent=0.0, n=8)
