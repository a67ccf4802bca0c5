"""Smooth planar domains: boundary parametrizations, curvature, normal tubes.

Conventions (everything downstream relies on these):

- boundary curves are 2*pi-periodic, counterclockwise, with the domain on
  the left of the tangent;
- the unit normal points INWARD: n = (-y', x') / |gamma'|;
- curvature kappa = (x'y'' - y'x'') / |gamma'|^3 is positive for convex
  domains;
- a tube point is u + lambda*n(u); lambda > 0 lies inside the domain and the
  area element there is (1 - lambda*kappa(u)) dlambda dmu, with dmu the
  arclength measure.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "Domain",
    "GeometryError",
    "NotInTube",
    "DegenerateBoundary",
    "TubeTooWide",
    "disc",
    "ellipse",
    "star_domain",
    "scale_domain",
    "boundary_points",
    "inward_normal",
    "curvature_at",
    "signed_distance",
    "nearest_boundary_point",
    "tubular_radius",
    "boundary_integral",
    "tube_integral",
    "boundary_polyline",
]

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Base class for domain/boundary failures."""


class NotInTube(GeometryError):
    """Point lies outside the normal tube where the projection is reliable."""


class DegenerateBoundary(GeometryError):
    """Boundary parametrization has a (numerically) vanishing tangent."""


class TubeTooWide(GeometryError):
    """Requested tube half-width exceeds the reach of the boundary."""


@dataclass(frozen=True)
class Domain:
    """Closed C^2 planar domain given by a parametrized boundary.

    Parameters
    ----------
    boundary : callable
        s -> points, vectorized: input shape (m,), output (m, 2).
        Must be 2*pi-periodic and counterclockwise.
    inside : callable
        (x, y) -> boolean array of the same shape; True on the closed domain.
    bounding_radius : float
        Radius of a centered disc containing the domain (used for grid sizing).
    d_boundary, dd_boundary : callable, optional
        Analytic first/second derivative of the parametrization. When omitted
        they are reconstructed spectrally from 4096 boundary samples.
    name : str
        Label used in reports.
    """

    boundary: callable
    inside: callable
    bounding_radius: float
    d_boundary: callable = None
    dd_boundary: callable = None
    name: str = "domain"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)


def _fourier_derivative_closures(dom, n=4096):
    """Build (gamma', gamma'') closures from boundary samples via FFT."""
    s = TWO_PI * np.arange(n) / n
    pts = np.asarray(dom.boundary(s), dtype=float)
    coef = np.fft.rfft(pts, axis=0) / n  # (n//2+1, 2)
    k = np.arange(coef.shape[0])
    keep = np.max(np.abs(coef), axis=1) > 1e-14 * np.max(np.abs(coef))
    keep[0] = True
    kk = k[keep]
    ck = coef[keep]

    def make(order):
        fac = (1j * kk) ** order

        def deriv(sv):
            sv = np.atleast_1d(np.asarray(sv, dtype=float))
            # real series: c0 + 2*Re sum_{k>=1} c_k e^{iks} (rfft half-spectrum)
            phase = np.exp(1j * np.outer(sv, kk))  # (m, nk)
            w = np.where(kk == 0, 1.0, 2.0)
            vals = (phase * (w * fac)) @ ck
            return vals.real

        return deriv

    return make(1), make(2)


def _derivs(dom):
    if "derivs" not in dom._cache:
        if dom.d_boundary is not None and dom.dd_boundary is not None:
            dom._cache["derivs"] = (dom.d_boundary, dom.dd_boundary)
        else:
            dom._cache["derivs"] = _fourier_derivative_closures(dom)
    return dom._cache["derivs"]


def disc(radius=1.0, center=(0.0, 0.0)):
    """Closed disc of given radius and center."""
    cx, cy = float(center[0]), float(center[1])
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")

    def gamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([cx + r * np.cos(s), cy + r * np.sin(s)], axis=-1)

    def dgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([-r * np.sin(s), r * np.cos(s)], axis=-1)

    def ddgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([-r * np.cos(s), -r * np.sin(s)], axis=-1)

    def inside(x, y):
        return (x - cx) ** 2 + (y - cy) ** 2 <= r * r

    return Domain(gamma, inside, np.hypot(cx, cy) + r, dgamma, ddgamma,
                  name=f"disc(r={r:g})")


def ellipse(a, b):
    """Axis-aligned centered ellipse with semi-axes a (x) and b (y)."""
    a, b = float(a), float(b)
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")

    def gamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([a * np.cos(s), b * np.sin(s)], axis=-1)

    def dgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([-a * np.sin(s), b * np.cos(s)], axis=-1)

    def ddgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([-a * np.cos(s), -b * np.sin(s)], axis=-1)

    def inside(x, y):
        return (x / a) ** 2 + (y / b) ** 2 <= 1.0

    return Domain(gamma, inside, max(a, b), dgamma, ddgamma,
                  name=f"ellipse({a:g},{b:g})")


def star_domain(eps, k, base_radius=1.0):
    """Star-shaped perturbed disc r(theta) = R*(1 + eps*cos(k*theta))."""
    eps, R = float(eps), float(base_radius)
    k = int(k)
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1) to keep the boundary smooth")

    def rad(s):
        return R * (1.0 + eps * np.cos(k * s))

    def gamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        rho = rad(s)
        return np.stack([rho * np.cos(s), rho * np.sin(s)], axis=-1)

    def dgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        rho = rad(s)
        dr = -R * eps * k * np.sin(k * s)
        return np.stack([dr * np.cos(s) - rho * np.sin(s),
                         dr * np.sin(s) + rho * np.cos(s)], axis=-1)

    def ddgamma(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        rho = rad(s)
        dr = -R * eps * k * np.sin(k * s)
        ddr = -R * eps * k * k * np.cos(k * s)
        return np.stack([(ddr - rho) * np.cos(s) - 2 * dr * np.sin(s),
                         (ddr - rho) * np.sin(s) + 2 * dr * np.cos(s)], axis=-1)

    def inside(x, y):
        theta = np.arctan2(y, x)
        return np.hypot(x, y) <= rad(theta)

    return Domain(gamma, inside, R * (1.0 + eps), dgamma, ddgamma,
                  name=f"star(eps={eps:g},k={k})")


def scale_domain(dom, c):
    """Dilate a domain by c > 0 about the origin."""
    c = float(c)
    if c <= 0:
        raise ValueError("scale factor must be positive")
    d1, d2 = _derivs(dom)

    def gamma(s):
        return c * dom.boundary(s)

    def inside(x, y):
        return dom.inside(x / c, y / c)

    return Domain(gamma, inside, c * dom.bounding_radius,
                  lambda s: c * d1(s), lambda s: c * d2(s),
                  name=f"{dom.name}*{c:g}")


def boundary_points(dom, s):
    """gamma(s), shape (m, 2)."""
    return np.asarray(dom.boundary(np.atleast_1d(s)), dtype=float)


def inward_normal(dom, s):
    """Unit inward normal at parameter s, shape (m, 2)."""
    d1, _ = _derivs(dom)
    g1 = d1(np.atleast_1d(s))
    speed = np.hypot(g1[:, 0], g1[:, 1])
    if np.any(speed < 1e-12):
        raise DegenerateBoundary("boundary tangent vanishes")
    return np.stack([-g1[:, 1], g1[:, 0]], axis=-1) / speed[:, None]


def curvature_at(dom, s):
    """Signed curvature at parameter s (positive for convex domains)."""
    d1, d2 = _derivs(dom)
    s = np.atleast_1d(s)
    g1, g2 = d1(s), d2(s)
    speed = np.hypot(g1[:, 0], g1[:, 1])
    if np.any(speed < 1e-12):
        raise DegenerateBoundary("boundary tangent vanishes")
    return (g1[:, 0] * g2[:, 1] - g1[:, 1] * g2[:, 0]) / speed**3


def _coarse_table(dom, n=512):
    key = ("table", n)
    if key not in dom._cache:
        s = TWO_PI * np.arange(n) / n
        dom._cache[key] = (s, boundary_points(dom, s))
    return dom._cache[key]


def _coarse_argmin(z, p_tab, block=16384):
    """Index of the nearest coarse-table node per point, in memory blocks."""
    idx = np.empty(len(z), dtype=np.intp)
    for lo in range(0, len(z), block):
        hi = min(lo + block, len(z))
        d2 = ((z[lo:hi, None, :] - p_tab[None, :, :]) ** 2).sum(axis=2)
        idx[lo:hi] = np.argmin(d2, axis=1)
    return idx


def _project(dom, z, max_iter=50, tol=1e-13):
    """Foot point parameters for points z (m, 2); Newton + bracketed fallback."""
    d1, d2 = _derivs(dom)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    s_tab, p_tab = _coarse_table(dom)
    idx = _coarse_argmin(z, p_tab)
    s = s_tab[idx].copy()
    s0 = s.copy()
    bracket = 2.0 * TWO_PI / len(s_tab)
    scale = max(dom.bounding_radius, 1.0)

    active = np.ones(len(s), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        g = boundary_points(dom, s[active])
        g1 = d1(s[active])
        g2 = d2(s[active])
        diff = z[active] - g
        f = (diff * g1).sum(axis=1)
        fp = (diff * g2).sum(axis=1) - (g1 * g1).sum(axis=1)
        safe = np.abs(fp) > 1e-12 * scale * scale
        step = np.zeros_like(f)
        step[safe] = f[safe] / fp[safe]
        step = np.clip(step, -bracket, bracket)
        s_new = s[active] - step
        sub = np.abs(step) > tol
        s[active] = s_new
        live = active.copy()
        live[active] = sub
        active = live

    # points that wandered out of the coarse bracket: bounded 1-D minimization
    drift = np.abs(np.mod(s - s0 + np.pi, TWO_PI) - np.pi)
    bad = active | (drift > bracket)
    for i in np.nonzero(bad)[0]:
        zi = z[i]

        def dist2(t):
            p = boundary_points(dom, t)[0]
            return (p[0] - zi[0]) ** 2 + (p[1] - zi[1]) ** 2

        res = minimize_scalar(dist2, bounds=(s0[i] - bracket, s0[i] + bracket),
                              method="bounded",
                              options={"xatol": 1e-14})
        s[i] = res.x
    return np.mod(s, TWO_PI)


def signed_distance(dom, z):
    """Signed distance to the boundary, positive inside the domain.

    Parameters
    ----------
    dom : Domain
    z : array_like, shape (m, 2) or (2,)

    Returns
    -------
    ndarray of shape (m,) (scalar input returns shape (1,))
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    s = _project(dom, z)
    p = boundary_points(dom, s)
    d = np.hypot(z[:, 0] - p[:, 0], z[:, 1] - p[:, 1])
    sign = np.where(dom.inside(z[:, 0], z[:, 1]), 1.0, -1.0)
    return sign * d


def nearest_boundary_point(dom, z):
    """Tube coordinates of a single point z.

    Returns
    -------
    (u, s, lam) : foot point (2,), its parameter, and the signed offset
        z = u + lam * n(u), lam positive inside.

    Raises
    ------
    NotInTube
        If |lam| exceeds the tubular radius, where the foot point may not be
        unique.
    """
    z = np.asarray(z, dtype=float).reshape(1, 2)
    tau = tubular_radius(dom)
    s = _project(dom, z)
    u = boundary_points(dom, s)[0]
    lam = float(signed_distance(dom, z)[0])
    if abs(lam) > tau * (1 + 1e-12):
        raise NotInTube(f"|offset| = {abs(lam):.6g} exceeds tubular radius {tau:.6g}")
    return u, float(s[0]), lam


def tubular_radius(dom, n_samples=4096):
    """Largest half-width of a non-self-intersecting normal tube.

    min of (1 / max curvature) and half the minimum chord between boundary
    samples that are at least pi/max|kappa| apart in arclength (pairs closer
    than that along the curve cannot produce a genuine bottleneck).
    """
    key = ("tau", n_samples)
    if key in dom._cache:
        return dom._cache[key]
    s = TWO_PI * np.arange(n_samples) / n_samples
    d1, _ = _derivs(dom)
    g1 = d1(s)
    speed = np.hypot(g1[:, 0], g1[:, 1])
    if np.min(speed) < 1e-12:
        raise DegenerateBoundary("boundary tangent vanishes")
    kap = curvature_at(dom, s)
    kmax = np.max(np.abs(kap))
    if not np.isfinite(kmax):
        raise DegenerateBoundary("curvature not finite")
    t1 = np.inf if kmax < 1e-15 else 1.0 / kmax

    pts = boundary_points(dom, s)
    ds = TWO_PI / n_samples
    arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * ds)])
    perim = arc[-1] + 0.5 * (speed[0] + speed[-1]) * ds
    window = min(np.pi * t1, 0.5 * perim)

    t2 = np.inf
    block = 256
    for i0 in range(0, n_samples, block):
        i1 = min(i0 + block, n_samples)
        darc = np.abs(arc[i0:i1, None] - arc[None, :])
        darc = np.minimum(darc, perim - darc)
        chord2 = ((pts[i0:i1, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        mask = darc >= window
        if mask.any():
            t2 = min(t2, 0.5 * np.sqrt(np.min(chord2[mask])))
    tau = min(t1, t2)
    dom._cache[key] = tau
    return tau


def boundary_integral(dom, fn, n=1024):
    """Integral of fn over the boundary against arclength measure.

    fn maps points (m, 2) to values (m,) or (m, k); the trapezoid rule on the
    periodic parametrization is spectrally accurate for smooth integrands.
    """
    s = TWO_PI * np.arange(n) / n
    pts = boundary_points(dom, s)
    d1, _ = _derivs(dom)
    g1 = d1(s)
    speed = np.hypot(g1[:, 0], g1[:, 1])
    vals = np.asarray(fn(pts))
    w = speed * (TWO_PI / n)
    if vals.ndim == 1:
        return float(np.dot(w, vals)) if not np.iscomplexobj(vals) else np.dot(w, vals)
    return (w[:, None] * vals).sum(axis=0)


def tube_integral(dom, fn, half_width, n_boundary=1024, n_normal=64):
    """Integral of fn over the normal tube of given half-width.

    Uses the change of variables z = u + lambda*n(u) with area element
    (1 - lambda*kappa(u)) dlambda dmu; Gauss-Legendre in lambda, periodic
    trapezoid along the boundary.

    Raises
    ------
    TubeTooWide
        If half_width exceeds the tubular radius.
    """
    t = float(half_width)
    tau = tubular_radius(dom)
    if t > tau * (1 + 1e-12):
        raise TubeTooWide(f"half-width {t:.6g} exceeds tubular radius {tau:.6g}")
    s = TWO_PI * np.arange(n_boundary) / n_boundary
    pts = boundary_points(dom, s)
    d1, _ = _derivs(dom)
    g1 = d1(s)
    speed = np.hypot(g1[:, 0], g1[:, 1])
    nrm = np.stack([-g1[:, 1], g1[:, 0]], axis=-1) / speed[:, None]
    kap = curvature_at(dom, s)

    x_gl, w_gl = np.polynomial.legendre.leggauss(n_normal)
    lam = t * x_gl
    w_lam = t * w_gl

    # (n_normal, n_boundary, 2) evaluation points
    P = pts[None, :, :] + lam[:, None, None] * nrm[None, :, :]
    vals = np.asarray(fn(P.reshape(-1, 2))).reshape(n_normal, n_boundary)
    jac = 1.0 - lam[:, None] * kap[None, :]
    w_u = speed * (TWO_PI / n_boundary)
    return float(np.einsum("i,ij,j->", w_lam, vals * jac, w_u)) \
        if not np.iscomplexobj(vals) else np.einsum("i,ij,j->", w_lam, vals * jac, w_u)


def boundary_polyline(dom, n=4096):
    """Dense boundary sample (n, 2) for nearest-neighbour style oracles."""
    s = TWO_PI * np.arange(n) / n
    return boundary_points(dom, s)
