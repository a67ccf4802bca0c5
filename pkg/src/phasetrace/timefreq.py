"""Windows, phase-plane weights, half-plane profiles and their inverses.

The central object is the cross-transform of two windows,

    W(x, xi) = (2*pi)^{-1} Integral e^{-i t xi} phi2(x + t/2) conj(phi1(x - t/2)) dt,

normalized so that its total integral equals <phi2, phi1>.  For the standard
Gaussian window it is (1/pi) * exp(-x^2 - xi^2).  Everything downstream only
consumes the resulting PhaseWeight object (pointwise evaluator plus a few
certified scalars), so analytic weights and FFT-built weights are
interchangeable.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.optimize import brentq

from .grids import GridSpec

__all__ = [
    "TimeFreqError",
    "GridTooCoarse",
    "BasisTooSmall",
    "FlatCrossing",
    "Window",
    "gaussian_window",
    "hermite_window",
    "hermite_functions",
    "PhaseWeight",
    "gaussian_weight",
    "wigner",
    "ProfileQ",
    "profile_q_halfplane",
    "profile_q_frft",
    "frft",
    "counting_profile_g",
    "default_level_grid",
]


class TimeFreqError(ValueError):
    """Base class for window/weight/profile failures."""


class GridTooCoarse(TimeFreqError):
    """Sampling grid cannot hold the requested transform without aliasing."""


class BasisTooSmall(TimeFreqError):
    """Hermite expansion truncated before the coefficients decayed."""


class FlatCrossing(TimeFreqError):
    """Profile hugs the requested level over an interval; crossing ill-posed."""


def hermite_functions(x, K):
    """First K L^2-normalized Hermite functions on the array x.

    Returns an array of shape (K, len(x)); row k is h_k(x).  Uses the stable
    two-term recurrence h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((K, x.size), dtype=float)
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * x.ravel() ** 2)
    if K > 1:
        out[1] = np.sqrt(2.0) * x.ravel() * out[0]
    for k in range(1, K - 1):
        out[k + 1] = (np.sqrt(2.0 / (k + 1)) * x.ravel() * out[k]
                      - np.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


@dataclass(frozen=True)
class Window:
    """A single time-side window: evaluator plus certified scalars."""

    eval: callable
    l2_norm: float
    decay_hint: float
    label: str = ""


def gaussian_window():
    """Standard Gaussian window pi^{-1/4} exp(-x^2/2) (unit L^2 norm)."""

    def ev(x):
        x = np.asarray(x, dtype=float)
        return np.pi ** (-0.25) * np.exp(-0.5 * x * x)

    return Window(ev, 1.0, 8.0, label="gaussian")


def hermite_window(k):
    """k-th Hermite function as a window (unit L^2 norm)."""
    k = int(k)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return hermite_functions(x.ravel(), k + 1)[k].reshape(x.shape)

    return Window(ev, 1.0, np.sqrt(2.0 * k + 1.0) + 7.0, label=f"hermite({k})")


@dataclass(frozen=True)
class PhaseWeight:
    """Phase-plane weight: pointwise evaluator plus certified scalars.

    Attributes
    ----------
    eval : callable
        (x, xi) -> values, broadcasting over arrays; exactly zero outside the
        certified square when grid-built.
    integral : complex or float
        Total integral over the plane.
    moment_bounds : tuple
        (m0, m1, m2) with m_k = integral of |z|^k |W|.
    decay_radius : float
        Radius beyond which |W| is below 1e-15 of its peak.
    is_real : bool
    separable : tuple of callables or None
        (fx, fxi) with W(x, xi) = fx(x) * fxi(xi), when available (enables a
        fast smoothing path).
    grid : GridSpec or None
        Sampling grid when FFT-built.
    values : ndarray or None
        Samples on the grid when FFT-built.
    """

    eval: callable
    integral: complex
    moment_bounds: tuple
    decay_radius: float
    is_real: bool
    separable: tuple = None
    grid: GridSpec = None
    values: np.ndarray = None
    label: str = ""

    def normalized(self):
        """Rescale so the total integral is exactly 1."""
        c = self.integral
        if abs(c) < 1e-8:
            raise TimeFreqError("cannot normalize: total integral is near zero")
        base_eval = self.eval

        def ev(x, xi):
            return base_eval(x, xi) / c

        sep = None
        if self.separable is not None:
            fx, fxi = self.separable
            sep = ((lambda x: fx(x) / c), fxi)
        vals = None if self.values is None else self.values / c
        m0, m1, m2 = self.moment_bounds
        a = abs(c)
        return PhaseWeight(ev, 1.0, (m0 / a, m1 / a, m2 / a), self.decay_radius,
                           self.is_real and not np.iscomplexobj(np.asarray(c)),
                           sep, self.grid, vals, self.label + "/norm")


def gaussian_weight():
    """Analytic weight of the Gaussian window pair: (1/pi) exp(-x^2 - xi^2).

    Certified against the FFT-built transform in the test suite; moment
    bounds are the exact polar integrals.
    """

    def ev(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.exp(-(x * x + xi * xi)) / np.pi

    def f1(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-t * t) / np.sqrt(np.pi)

    m1 = np.sqrt(np.pi) / 2.0
    return PhaseWeight(ev, 1.0, (1.0, m1, 1.0), 6.5, True, separable=(f1, f1),
                       label="gaussian")


def wigner(phi2, phi1, grid=None, normalize=False):
    """Cross-transform of two windows on a square grid, via FFT in t.

    Parameters
    ----------
    phi2, phi1 : Window
    grid : GridSpec, optional
        Defaults to n=512, half_extent=12 (adequate for low Hermite windows).
    normalize : bool
        Divide by the total integral (raises if that is near zero).

    Returns
    -------
    PhaseWeight

    Raises
    ------
    GridTooCoarse
        If the windows are not contained in the grid or the transform has
        non-negligible mass on the outermost rows/columns.
    """
    if grid is None:
        grid = GridSpec(half_extent=12.0, n=512)
    L, n, h = grid.half_extent, grid.n, grid.h
    if max(phi2.decay_hint, phi1.decay_hint) > L:
        raise GridTooCoarse("window support exceeds the grid half-extent")
    x, xi = grid.axes()
    dt = np.pi / L                      # FFT frequencies then land on the xi axis
    t = -np.pi / h + dt * np.arange(n)
    X = x[:, None]
    T = t[None, :]
    psi = phi2.eval(X + T / 2.0) * np.conj(phi1.eval(X - T / 2.0))
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    Wv = (dt / (2.0 * np.pi)) * signs[None, :] * np.fft.fft(psi * signs[None, :], axis=1)

    peak = np.max(np.abs(Wv))
    edge = max(np.abs(Wv[:2, :]).max(), np.abs(Wv[-2:, :]).max(),
               np.abs(Wv[:, :2]).max(), np.abs(Wv[:, -2:]).max())
    if peak == 0 or edge > 1e-10 * peak:
        raise GridTooCoarse("transform has mass on the grid boundary; enlarge grid")

    is_real = np.max(np.abs(Wv.imag)) < 1e-12 * peak
    if is_real:
        Wv = np.ascontiguousarray(Wv.real)

    area = grid.cell_area()
    integral = Wv.sum() * area
    Xm, XIm = grid.mesh()
    rho = np.hypot(Xm, XIm)
    absW = np.abs(Wv)
    m0 = absW.sum() * area
    m1 = (rho * absW).sum() * area
    m2 = (rho * rho * absW).sum() * area
    sig = rho[absW > 1e-15 * peak]
    decay_radius = float(sig.max()) + 0.25 if sig.size else 0.5

    lo, hi = x[0] + 2 * h, x[-1] - 2 * h
    if is_real:
        sp = RectBivariateSpline(x, xi, Wv, kx=5, ky=5)

        def ev(xq, xiq):
            xq = np.asarray(xq, dtype=float)
            xiq = np.asarray(xiq, dtype=float)
            out = sp.ev(np.clip(xq, lo, hi), np.clip(xiq, lo, hi))
            ok = (xq >= lo) & (xq <= hi) & (xiq >= lo) & (xiq <= hi)
            return np.where(ok, out, 0.0)
    else:
        spr = RectBivariateSpline(x, xi, Wv.real, kx=5, ky=5)
        spi = RectBivariateSpline(x, xi, Wv.imag, kx=5, ky=5)

        def ev(xq, xiq):
            xq = np.asarray(xq, dtype=float)
            xiq = np.asarray(xiq, dtype=float)
            xc, xic = np.clip(xq, lo, hi), np.clip(xiq, lo, hi)
            out = spr.ev(xc, xic) + 1j * spi.ev(xc, xic)
            ok = (xq >= lo) & (xq <= hi) & (xiq >= lo) & (xiq <= hi)
            return np.where(ok, out, 0.0)

    integral = float(integral.real) if is_real else complex(integral)
    out = PhaseWeight(ev, integral, (float(m0), float(m1), float(m2)),
                      decay_radius, is_real, None, grid, Wv,
                      label=f"wigner[{phi2.label},{phi1.label}]")
    return out.normalized() if normalize else out


def default_level_grid():
    """Default lambda grid for profiles: [-8, 8] in steps of 1/256."""
    return np.arange(-2048, 2049, dtype=float) / 256.0


@dataclass(frozen=True)
class ProfileQ:
    """Cumulative half-plane mass of a weight along a direction.

    Q(lam) = integral of the weight over { z : z . omega <= lam }.  Values
    are exactly 0 at or below -(tail_clamp + 1) and exactly `total` at or
    above tail_clamp + 1 (the integration band of the constructor).
    """

    omega: tuple
    lambdas: np.ndarray
    values: np.ndarray
    total: complex
    tail_clamp: float
    is_real: bool
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def _splines(self):
        if "sp" not in self._cache:
            if self.is_real:
                self._cache["sp"] = (CubicSpline(self.lambdas, self.values.real),)
            else:
                self._cache["sp"] = (CubicSpline(self.lambdas, self.values.real),
                                     CubicSpline(self.lambdas, self.values.imag))
        return self._cache["sp"]

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        sp = self._splines()
        lc = np.clip(lam, self.lambdas[0], self.lambdas[-1])
        out = sp[0](lc)
        if len(sp) == 2:
            out = out + 1j * sp[1](lc)
        band = self.tail_clamp + 1.0
        lo = (lam < self.lambdas[0]) | (lam <= -band)
        hi = (lam > self.lambdas[-1]) | (lam >= band)
        if np.any(lo):
            out = np.where(lo, 0.0, out)
        if np.any(hi):
            out = np.where(hi, self.total, out)
        return out

    @property
    def is_monotone(self):
        if not self.is_real:
            return False
        return bool(np.all(np.diff(self.values.real) >= -1e-12))


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def _cumulative_on_grid(m_fn, lambdas, clamp, total_hint=None):
    """Cumulative integral of a line density m on the lambda grid.

    Composite 4-point Gauss-Legendre panels between consecutive grid nodes
    inside the active band |lam| <= clamp + 1; exactly 0 / exactly total
    outside.
    """
    lam = np.asarray(lambdas, dtype=float)
    lo, hi = -clamp - 1.0, clamp + 1.0
    i0 = int(np.searchsorted(lam, lo, side="left"))
    i1 = int(np.searchsorted(lam, hi, side="right")) - 1
    i0 = max(i0, 0)
    i1 = min(i1, len(lam) - 1)
    a = lam[i0:i1]
    b = lam[i0 + 1:i1 + 1]
    mid = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    nodes = mid[:, None] + hw[:, None] * _GL4_X[None, :]
    mv = np.asarray(m_fn(nodes.ravel())).reshape(nodes.shape)
    inc = (mv * _GL4_W[None, :]).sum(axis=1) * hw

    head = 0.0
    if lam[i0] > lo:
        hm = 0.5 * (lo + lam[i0])
        hh = 0.5 * (lam[i0] - lo)
        hv = np.asarray(m_fn(hm + hh * _GL4_X))
        head = (hv * _GL4_W).sum() * hh

    is_cplx = np.iscomplexobj(inc) or np.iscomplexobj(np.asarray(head))
    Q = np.zeros(len(lam), dtype=complex if is_cplx else float)
    Q[i0] = head
    Q[i0 + 1:i1 + 1] = head + np.cumsum(inc)
    total = Q[i1]
    Q[i1 + 1:] = total
    return Q, total


def profile_q_halfplane(weight, omega, lambdas=None):
    """Half-plane cumulative profile of a weight along direction omega.

    m(t) = line integral of W over the line z . omega = t is computed by a
    transverse trapezoid at step 0.125 (spectrally accurate for
    Gaussian-class weights), then accumulated by Gauss-Legendre panels.
    """
    w = np.asarray(omega, dtype=float)
    nw = np.hypot(w[0], w[1])
    if nw < 1e-14:
        raise ValueError("direction omega must be nonzero")
    e1 = w / nw
    e2 = np.array([-e1[1], e1[0]])
    if lambdas is None:
        lambdas = default_level_grid()
    clamp = weight.decay_radius
    hs = 0.125
    s = np.arange(-clamp - 0.5, clamp + 0.5 + hs / 2, hs)

    def m_fn(t):
        t = np.asarray(t, dtype=float)
        px = t[:, None] * e1[0] + s[None, :] * e2[0]
        pxi = t[:, None] * e1[1] + s[None, :] * e2[1]
        return weight.eval(px, pxi).sum(axis=1) * hs

    Q, total = _cumulative_on_grid(m_fn, lambdas, clamp)
    is_real = not np.iscomplexobj(Q)
    return ProfileQ((float(e1[0]), float(e1[1])), np.asarray(lambdas, float), Q,
                    total if not is_real else float(np.real(total)), clamp, is_real,
                    label=f"halfplane[{weight.label}]")


def frft(window, omega, K=256):
    """Rotate a window in phase space: Hermite coefficient k picks up e^{-ik theta}.

    theta = atan2(omega_2, omega_1); theta = pi/2 reproduces the unitary
    Fourier transform (h_k -> (-i)^k h_k).

    Raises
    ------
    BasisTooSmall
        If the trailing Hermite coefficients have not decayed below 1e-10,
        or the captured energy falls short of the window's norm (the window
        has components beyond the first K basis functions).
    """
    theta = float(np.arctan2(omega[1], omega[0]))
    A = window.decay_hint + 2.0
    nq = max(1024, 4 * K)
    xg, wg = np.polynomial.legendre.leggauss(nq)
    xg = A * xg
    wg = A * wg
    H = hermite_functions(xg, K)
    coeff = H @ (wg * np.asarray(window.eval(xg)))
    if np.max(np.abs(coeff[-8:])) > 1e-10:
        raise BasisTooSmall(f"Hermite tail not decayed at K={K}; increase K")
    captured = float(np.sum(np.abs(coeff) ** 2))
    if abs(captured - window.l2_norm ** 2) > 1e-10 * max(window.l2_norm ** 2, 1.0):
        raise BasisTooSmall(
            f"basis of size {K} captures energy {captured:.6g} of "
            f"{window.l2_norm ** 2:.6g}; increase K")
    rot = coeff * np.exp(-1j * theta * np.arange(K))
    nz = np.nonzero(np.abs(coeff) > 1e-12)[0]
    k_eff = int(nz[-1]) if nz.size else 0

    def ev(y):
        y = np.asarray(y, dtype=float)
        vals = hermite_functions(y.ravel(), K).T @ rot
        return vals.reshape(y.shape)

    return Window(ev, float(np.linalg.norm(coeff)),
                  np.sqrt(2.0 * k_eff + 1.0) + 7.0,
                  label=f"frft({theta:.4g})[{window.label}]")


def profile_q_frft(phi2, phi1, omega, lambdas=None, K=256):
    """Half-plane profile via rotated windows: same Q as profile_q_halfplane.

    Q(lam) = integral_{-inf}^{lam} (F phi2)(eta) conj((F phi1)(eta)) d eta,
    with F the phase-space rotation by the angle of omega.
    """
    psi2 = frft(phi2, omega, K=K)
    psi1 = frft(phi1, omega, K=K)
    if lambdas is None:
        lambdas = default_level_grid()
    clamp = max(psi2.decay_hint, psi1.decay_hint)

    def m_fn(t):
        return psi2.eval(t) * np.conj(psi1.eval(t))

    Q, total = _cumulative_on_grid(m_fn, lambdas, clamp)
    is_real = bool(np.max(np.abs(Q.imag)) < 1e-13) if np.iscomplexobj(Q) else True
    if np.iscomplexobj(Q) and is_real:
        Q = Q.real
        total = float(np.real(total))
    w = np.asarray(omega, dtype=float)
    e1 = w / np.hypot(w[0], w[1])
    return ProfileQ((float(e1[0]), float(e1[1])), np.asarray(lambdas, float), Q,
                    total, clamp, is_real, label="frft-route")


def counting_profile_g(profile, delta, method="auto"):
    """Counting correction of a profile at level delta.

    g(delta) = |{lam <= 0 : Q > delta}| - |{lam >= 0 : Q < delta}|.
    For a monotone profile this equals -Q^{-1}(delta); both routes are
    implemented ('measure' and 'inverse', 'auto' = 'measure').

    Raises
    ------
    TimeFreqError / ValueError
        Complex profile, or level outside (0, total).
    FlatCrossing
        Profile stays within 1e-9 of the level over an interval longer
        than 1e-6.
    """
    if not profile.is_real:
        raise TimeFreqError("counting correction requires a real profile")
    delta = float(delta)
    total = float(np.real(profile.total))
    if not 0.0 < delta < total:
        raise ValueError(f"level must lie strictly between 0 and {total:g}")
    lam = profile.lambdas
    v = profile.values.real - delta

    near = np.abs(v) < 1e-9
    if near.any():
        idx = np.nonzero(near)[0]
        run_start = idx[0]
        prev = idx[0]
        for i in np.append(idx[1:], -1):
            if i != prev + 1:
                if lam[prev] - lam[run_start] > 1e-6:
                    raise FlatCrossing("profile is flat at the requested level")
                run_start = i
            prev = i

    sp = CubicSpline(lam, v)
    roots = []
    for i in np.nonzero(v[:-1] * v[1:] < 0)[0]:
        roots.append(brentq(sp, lam[i], lam[i + 1], xtol=1e-14))
    roots.extend(lam[np.abs(v) == 0.0])
    roots = sorted(roots)

    if method == "inverse":
        if not profile.is_monotone:
            raise ValueError("inverse route requires a monotone profile")
        if len(roots) != 1:
            raise FlatCrossing("monotone profile should cross the level exactly once")
        return -roots[0]
    if method not in ("measure", "auto"):
        raise ValueError(f"unknown method {method!r}")

    T = profile.tail_clamp + 1.0

    def measure(a, b, sign):
        # length of {lam in [a,b] : sign * (Q - delta) > 0}
        cuts = [a] + [r for r in roots if a < r < b] + [b]
        acc = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if sign * sp(0.5 * (lo + hi)) > 0:
                acc += hi - lo
        return acc

    above_left = measure(-T, 0.0, +1)
    below_right = measure(0.0, T, -1)
    return above_left - below_right
