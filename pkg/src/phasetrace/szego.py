"""Two-term spectral asymptotics: bulk and boundary coefficients, fits.

For the dilated cut-off symbol the trace of f(operator) expands as
A0 * r^2 + A1 * r + O(1), with

    A0 = (2*pi)^{-1} * integral over the domain of f(a(z)),
    A1 = (2*pi)^{-1} * boundary integral of
         integral over lambda of  f(a(u) Q_n(u)(lambda)) - Q_n(u)(lambda) f(a(u)),

where Q_n is the half-plane profile of the weight along the inward normal.
The counting analogue replaces the inner integral by the counting correction
g(delta) of timefreq.counting_profile_g.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy.integrate import simpson

from . import geometry
from .quantize import SpectralFunction
from .timefreq import counting_profile_g, profile_q_halfplane

__all__ = [
    "SzegoError",
    "IllConditionedFit",
    "AsymptoticsReport",
    "coeff_A0",
    "coeff_A1",
    "coeff_A1_counting",
    "predict",
    "fit_and_compare",
    "is_radial_weight",
]

TWO_PI = 2.0 * np.pi


class SzegoError(ValueError):
    """Base class for asymptotics failures."""


class IllConditionedFit(SzegoError):
    """The r-sweep does not determine the fit coefficients."""


def _amplitude(a):
    if callable(a):
        return a
    val = float(a)

    def const(x, xi):
        return np.full(np.broadcast(np.asarray(x), np.asarray(xi)).shape, val)

    return const


def _as_spectral(f):
    if isinstance(f, SpectralFunction):
        return f
    if callable(f):
        return SpectralFunction.from_callable(f)
    raise TypeError("f must be a SpectralFunction or a callable with f(0)=0")


def coeff_A0(a, dom, f, n_grid=2048):
    """Bulk coefficient: (2*pi)^{-1} integral of f(a(z)) over the domain.

    Midpoint quadrature on a bounding square with pointwise membership.
    """
    f = _as_spectral(f)
    af = _amplitude(a)
    R = dom.bounding_radius * 1.02 + 1e-6
    h = 2.0 * R / n_grid
    c = -R + h * (np.arange(n_grid) + 0.5)
    X, XI = np.meshgrid(c, c, indexing="ij")
    mask = dom.inside(X, XI)
    vals = np.asarray(f(np.asarray(af(X, XI), dtype=float)))
    return float(np.sum(vals * mask) * h * h / TWO_PI)


def is_radial_weight(weight, lambdas=None, tol=1e-9):
    """True when 4 sampled directions give the same half-plane profile."""
    dirs = [(1.0, 0.0), (np.sqrt(0.5), np.sqrt(0.5)), (0.0, 1.0),
            (-np.sqrt(0.5), np.sqrt(0.5))]
    profiles = [profile_q_halfplane(weight, d, lambdas=lambdas) for d in dirs]
    base = profiles[0].values
    worst = max(float(np.max(np.abs(p.values - base))) for p in profiles[1:])
    return worst < tol, profiles[0]


def _boundary_data(dom, n_boundary):
    s = TWO_PI * np.arange(n_boundary) / n_boundary
    pts = geometry.boundary_points(dom, s)
    normals = geometry.inward_normal(dom, s)
    d1, _ = geometry._derivs(dom)
    g1 = d1(s)
    w = np.hypot(g1[:, 0], g1[:, 1]) * (TWO_PI / n_boundary)
    return pts, normals, w


def _shift_per_node(origin_shift, normals):
    shift = np.asarray(origin_shift, dtype=float)
    if shift.ndim == 0:
        return np.full(len(normals), float(shift))
    if shift.shape == (2,):
        return normals @ shift
    raise ValueError("origin_shift must be a scalar or a 2-vector")


def coeff_A1(a, dom, f, weight, origin_shift=0.0, n_boundary=1024,
             lambdas=None):
    """Boundary coefficient of the trace expansion.

    origin_shift recentres the lambda axis: a scalar shifts every normal
    profile equally, a 2-vector v shifts by v . n(u) per boundary point (the
    two conventions agree for closed curves; this is tested, not assumed).
    """
    f = _as_spectral(f)
    af = _amplitude(a)
    pts, normals, w = _boundary_data(dom, n_boundary)
    a_vals = np.asarray(af(pts[:, 0], pts[:, 1]), dtype=float)
    sigma = _shift_per_node(origin_shift, normals)

    radial, profile0 = is_radial_weight(weight, lambdas=lambdas)
    lam = profile0.lambdas

    def node_integrals(profile, idx):
        # rows: boundary nodes idx; columns: lambda grid
        Q = np.asarray(profile(lam[None, :] - sigma[idx, None]), dtype=float)
        av = a_vals[idx, None]
        integ = f(av * Q) - Q * f(av)
        return simpson(integ, x=lam, axis=1)

    if radial:
        I = node_integrals(profile0, np.arange(n_boundary))
    else:
        I = np.empty(n_boundary)
        for j in range(n_boundary):
            pj = profile_q_halfplane(weight, normals[j], lambdas=lambdas)
            I[j] = node_integrals(pj, np.array([j]))[0]
    return float(np.dot(w, I) / TWO_PI)


def coeff_A1_counting(dom, weight, delta, n_boundary=1024, lambdas=None):
    """Boundary coefficient of the counting expansion at level delta."""
    radial, profile0 = is_radial_weight(weight, lambdas=lambdas)
    if radial:
        g = counting_profile_g(profile0, delta)
        perimeter = geometry.boundary_integral(
            dom, lambda p: np.ones(len(p)), n=n_boundary)
        return float(g * perimeter / TWO_PI)
    pts, normals, w = _boundary_data(dom, n_boundary)
    g = np.array([counting_profile_g(
        profile_q_halfplane(weight, nrm, lambdas=lambdas), delta)
        for nrm in normals])
    return float(np.dot(w, g) / TWO_PI)


def predict(dom, weight, a, f_or_delta, r):
    """Two-term prediction A0 r^2 + A1 r.

    f_or_delta: a SpectralFunction/callable selects the trace form; a real
    number selects the counting form at that level.
    """
    if isinstance(f_or_delta, (int, float)) and not isinstance(f_or_delta, bool):
        delta = float(f_or_delta)
        A0 = coeff_A0(1.0, dom, SpectralFunction.poly((0.0, 1.0)))
        A1 = coeff_A1_counting(dom, weight, delta)
    else:
        f = _as_spectral(f_or_delta)
        A0 = coeff_A0(a, dom, f)
        A1 = coeff_A1(a, dom, f, weight)
    r = np.asarray(r, dtype=float)
    out = A0 * r * r + A1 * r
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AsymptoticsReport:
    """Result of fitting an r-sweep against the two-term prediction."""

    r_values: tuple
    measured: tuple
    predicted_A0: float
    predicted_A1: float
    fitted_c2: float
    fitted_c1: float
    fitted_c0: float
    residuals: tuple          # measured - (A0 r^2 + A1 r)

    @property
    def scaled_residuals(self):
        return tuple(res / r for res, r in zip(self.residuals, self.r_values))

    def rel_error_c2(self):
        return abs(self.fitted_c2 - self.predicted_A0) / max(abs(self.predicted_A0), 1e-300)

    def rel_error_c1(self):
        return abs(self.fitted_c1 - self.predicted_A1) / max(abs(self.predicted_A1), 1e-300)

    def to_dict(self):
        d = asdict(self)
        d["scaled_residuals"] = self.scaled_residuals
        return d

    def to_rows(self):
        """Rows (r, measured, predicted, residual) for CSV export."""
        pred = [self.predicted_A0 * r * r + self.predicted_A1 * r
                for r in self.r_values]
        return list(zip(self.r_values, self.measured, pred, self.residuals))


def fit_and_compare(r_values, measured, predicted_A0, predicted_A1):
    """Least-squares fit in the basis {r^2, r, 1} against the prediction.

    Raises
    ------
    IllConditionedFit
        Fewer than 4 distinct r values, or a sweep spanning less than a
        factor of 2.
    """
    r = np.asarray(r_values, dtype=float)
    y = np.asarray(measured, dtype=float)
    if len(np.unique(r)) < 4:
        raise IllConditionedFit("need at least 4 distinct r values")
    if np.max(r) < 2.0 * np.min(r):
        raise IllConditionedFit("r values must span at least a factor of 2")
    A = np.stack([r * r, r, np.ones_like(r)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (predicted_A0 * r * r + predicted_A1 * r)
    return AsymptoticsReport(tuple(r), tuple(y), float(predicted_A0),
                             float(predicted_A1), float(coef[0]),
                             float(coef[1]), float(coef[2]),
                             tuple(resid))
