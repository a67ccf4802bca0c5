import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ncx2

from phasetrace import (
    GridMismatch, GridSpec, GridTooSmall, SymbolGrid, dilate, disc,
    gaussian_weight, moyal_term, sample_symbol, sharp_symbol, smoothed_symbol,
    symbol_norm_report,
)

GRID = GridSpec(half_extent=12.0, n=256)


def _gauss_pair():
    p = sample_symbol(lambda x, xi: x * np.exp(-(x ** 2 + xi ** 2) / 4), GRID)
    q = sample_symbol(lambda x, xi: xi * np.exp(-(x ** 2 + xi ** 2) / 4), GRID)
    return p, q


# ---------------------------------------------------------------- sampling

def test_sample_and_integral():
    g = GridSpec(half_extent=10.0, n=512)
    s = sample_symbol(lambda x, xi: np.exp(-(x ** 2 + xi ** 2)), g)
    assert s.is_real
    assert s.integral() == pytest.approx(np.pi, rel=1e-12)


def test_dilate_matches_direct_sampling():
    fn = lambda x, xi: np.exp(-((x - 0.3) ** 2 + xi ** 2) / 2)
    big = sample_symbol(dilate(fn, 3.0), GRID)
    direct = sample_symbol(lambda x, xi: fn(x / 3.0, xi / 3.0), GRID)
    assert np.max(np.abs(big.values - direct.values)) == 0.0


@given(st.floats(0.5, 4.0))
@settings(max_examples=20, deadline=None)
def test_dilate_scales_mass_quadratically(r):
    fn = lambda x, xi: np.exp(-2 * (x ** 2 + xi ** 2))
    base = sample_symbol(fn, GRID)
    scaled = sample_symbol(dilate(fn, r), GRID)
    assert scaled.integral() == pytest.approx(r * r * base.integral(), rel=1e-6)


def test_sharp_symbol_is_masked_amplitude():
    q = sample_symbol(sharp_symbol(lambda x, xi: 2.0 + x, disc(), 3.0),
                      GridSpec(half_extent=8.0, n=512))
    X, XI = q.grid.mesh()
    inside = np.hypot(X, XI) <= 3.0
    assert np.all(q.values[~inside] == 0.0)
    expect = (2.0 + X / 3.0)[inside]
    assert np.max(np.abs(q.values[inside] - expect)) < 1e-12


# --------------------------------------------------------------- smoothing

def test_smoothed_disc_matches_noncentral_chi2():
    # gaussian-smoothing the dilated disc indicator has the closed form
    # q(z) = ncx2.cdf(2 r^2, df=2, nc=2|z|^2); pointwise agreement is limited
    # by the indicator's pixelation, so interior points are tight and
    # boundary points are O(h^2)
    q = smoothed_symbol(gaussian_weight(), 1.0, disc(), 4.0)
    center = float(q.eval(np.array([0.0]), np.array([0.0]))[0])
    assert center == pytest.approx(ncx2.cdf(32.0, 2, 0.0), abs=1e-10)
    edge = float(q.eval(np.array([4.0]), np.array([0.0]))[0])
    assert edge == pytest.approx(ncx2.cdf(32.0, 2, 32.0), abs=2e-3)


def test_smoothed_symbol_error_shrinks_quadratically():
    pt = (np.array([4.0]), np.array([0.0]))
    exact = ncx2.cdf(32.0, 2, 32.0)
    errs = []
    for n in (1024, 2048):
        L = 4.0 + 10.0
        q = smoothed_symbol(gaussian_weight(), 1.0, disc(), 4.0,
                            grid=GridSpec(half_extent=L, n=n))
        errs.append(abs(float(q.eval(*pt)[0]) - exact))
    assert errs[1] < 0.5 * errs[0]


def test_smoothing_preserves_mass():
    q = smoothed_symbol(gaussian_weight(), 1.0, disc(), 4.0)
    assert q.integral() == pytest.approx(q.meta["pixel_mass"], rel=1e-9)


def test_smoothed_symbol_metadata():
    q = smoothed_symbol(gaussian_weight(), 1.0, disc(), 4.0)
    assert q.meta["r"] == 4.0
    assert q.meta["edge_mass"] < 1e-10
    assert q.meta["weight_integral"] == pytest.approx(1.0)


def test_grid_too_small_rejected():
    with pytest.raises(GridTooSmall):
        smoothed_symbol(gaussian_weight(), 1.0, disc(), 8.0,
                        grid=GridSpec(half_extent=9.0, n=512))


# ------------------------------------------------------- star product terms

def test_moyal_order_zero_is_pointwise_product():
    p, q = _gauss_pair()
    t0 = moyal_term(p, q, 0)
    assert np.max(np.abs(t0.values - p.values * q.values)) == 0.0


def test_moyal_first_order_gaussian_closed_form():
    # p = x g, q = xi g with g = exp(-(x^2+xi^2)/4):
    # (i/2)(dp/dx dq/dxi - dp/dxi dq/dx) = (i/2)(1 - rho^2/2) exp(-rho^2/2)
    p, q = _gauss_pair()
    t1 = moyal_term(p, q, 1)
    X, XI = GRID.mesh()
    rho2 = X ** 2 + XI ** 2
    closed = 0.5j * (1.0 - rho2 / 2.0) * np.exp(-rho2 / 2.0)
    assert np.max(np.abs(t1.values - closed)) < 1e-10


def test_moyal_first_order_sign_at_origin():
    # the bracket of (position-like, momentum-like) symbols is +i/2 at 0
    p, q = _gauss_pair()
    t1 = moyal_term(p, q, 1)
    i0 = GRID.n // 2    # axes()[i0] == 0.0
    assert t1.values[i0, i0] == pytest.approx(0.5j, abs=1e-10)


def test_moyal_self_term_vanishes():
    p, _ = _gauss_pair()
    assert np.max(np.abs(moyal_term(p, p, 1).values)) < 1e-14


@given(st.integers(1, 3), st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_moyal_swap_parity(j, seed):
    # term_j(q, p) = (-1)^j term_j(p, q): exact for band-limited fields,
    # where the spectral derivatives are exact
    rng = np.random.default_rng(seed)
    g = GridSpec(half_extent=np.pi, n=32)
    X, XI = g.mesh()
    scale = np.pi / g.half_extent

    def field():
        out = np.zeros_like(X)
        for _ in range(3):
            kx, kxi = rng.integers(-4, 5, size=2)
            ph = rng.uniform(0, 2 * np.pi)
            out += np.cos(scale * (kx * X + kxi * XI) + ph)
        return out

    p = SymbolGrid(g, field())
    q = SymbolGrid(g, field())
    t_pq = moyal_term(p, q, j).values
    t_qp = moyal_term(q, p, j).values
    ref = max(np.max(np.abs(t_pq)), 1e-30)
    assert np.max(np.abs(t_qp - (-1) ** j * t_pq)) < 1e-10 * ref


def test_moyal_grid_mismatch_rejected():
    p, _ = _gauss_pair()
    other = sample_symbol(lambda x, xi: x, GridSpec(half_extent=12.0, n=128))
    with pytest.raises(GridMismatch):
        moyal_term(p, other, 1)


# ------------------------------------------------------------------ norms

def test_norm_report_plane_wave():
    g = GridSpec(half_extent=np.pi, n=64)
    s = sample_symbol(lambda x, xi: np.sin(3 * x), g)
    rep = symbol_norm_report(s, max_order=2)
    assert rep[(0, 0)][0] == pytest.approx(1.0, abs=1e-9)
    assert rep[(1, 0)][0] == pytest.approx(3.0, abs=1e-9)   # d/dx
    assert rep[(2, 0)][0] == pytest.approx(9.0, abs=1e-8)
    assert rep[(0, 1)][0] == pytest.approx(0.0, abs=1e-10)  # no xi dep
