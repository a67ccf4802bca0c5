"""Operators from phase-plane symbols: Hermite-basis and grid-kernel routes.

The quantization convention is pinned by two anchors enforced in tests:
q = 1 maps to the identity, and trace(op[q]) = (2*pi)^{-1} integral of q.
Matrix elements in the Hermite basis are

    M[k, j] = integral of q * X_{j,k} over the plane,

where X_{j,k} is the cross-transform of the Hermite pair (h_j, h_k) (see
timefreq.wigner).  X_{j,k} has the closed polar form

    X_{j,k}(rho e^{i theta}) = (1/pi) * phi_{k,nu}(2 rho^2) * e^{-i nu theta},
    nu = j - k >= 0,
    phi_{k,nu}(u) = (-1)^k sqrt(k!/(k+nu)!) u^{nu/2} e^{-u/2} L_k^nu(u),

(conjugate for j < k), so one FFT of the symbol over the polar angle reduces
the whole matrix to radial Gauss-Legendre sums at O(K^2 n_rho) cost.  The
closed form is cross-checked against the FFT-built transform in the tests.
"""

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .symbolics import SymbolGrid

__all__ = [
    "QuantizeError",
    "BasisOverflow",
    "AliasedKernel",
    "NonHermitianOperator",
    "EigenvalueNearThreshold",
    "OperatorMatrix",
    "cross_wigner_hermite",
    "op_hermite",
    "op_hermite_reference",
    "op_kernel",
    "eigenvalues",
    "trace",
    "trace_norm",
    "operator_norm",
    "counting",
    "SpectralFunction",
    "spectral_apply",
    "trace_spectral",
    "composition_remainder",
    "default_basis_size",
    "save_operator",
    "load_operator",
]


class QuantizeError(ValueError):
    """Base class for quantization failures."""


class BasisOverflow(QuantizeError):
    """Hermite states extend past the region where the symbol is resolved."""


class AliasedKernel(QuantizeError):
    """Grid-route kernel has non-negligible mass at the wrap-around edge."""


class NonHermitianOperator(QuantizeError):
    """Operation requires a Hermitian matrix."""


class EigenvalueNearThreshold(UserWarning):
    """An eigenvalue sits within 1e-9 of the requested counting level."""


@dataclass
class OperatorMatrix:
    """A finite-rank operator in an explicit basis.

    Attributes
    ----------
    matrix : ndarray (K, K) complex
    basis : str
        'hermite' (global Hermite functions) or 'grid' (normalized indicator
        cells of a 1-D x-grid; matrix = h * kernel(x_i, x_j)).
    meta : dict
        Construction provenance; always includes the identity defect of the
        route that built the operator.
    axis : ndarray or None
        The x-grid for basis='grid'.
    """

    matrix: np.ndarray
    basis: str
    meta: dict = field(default_factory=dict)
    axis: np.ndarray = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        return self.matrix.shape[0]

    def hermiticity_defect(self):
        m = self.matrix
        scale = max(np.max(np.abs(m)), 1e-300)
        return float(np.max(np.abs(m - m.conj().T)) / scale)

    def is_hermitian(self, tol=1e-8):
        return self.hermiticity_defect() <= tol


def _phi_log_row0(nu, u):
    """log |phi_{0,nu}(u)| = (nu*log u - u - log nu!)/2; u > 0 arrays."""
    if nu == 0:
        return -0.5 * u
    return 0.5 * (nu * np.log(u) - u - gammaln(nu + 1.0))


def _phi_next(k, nu, u, cur, prev):
    """phi_{k+1,nu} from phi_k, phi_{k-1} (three-term recurrence)."""
    a = np.sqrt((k + 1.0) * (k + 1.0 + nu))
    b = 0.0 if k == 0 else np.sqrt(k * (k + nu))
    return (-(2.0 * k + nu + 1.0 - u) * cur - b * prev) / a


def _phi_rows(nu, u, k_max):
    """Yield phi_{k,nu}(u) for k = 0..k_max as true (unscaled) values.

    The seed e^{-u/2} underflows for u beyond ~1400 while phi_k(u) itself is
    O(1) once u enters the classically allowed region, so the recurrence runs
    on rescaled values with a per-point log offset that is folded back in at
    emission (benign underflow to 0 where the true value is below range).
    """
    log0 = _phi_log_row0(nu, u)
    cur = np.ones_like(u)
    prev = np.zeros_like(u)
    offset = log0.copy()
    scale = np.exp(offset)
    yield cur * scale
    for k in range(k_max):
        cur, prev = _phi_next(k, nu, u, cur, prev), cur
        big = np.abs(cur) > 1e100
        if big.any():
            f = np.abs(cur[big])
            cur[big] /= f
            prev[big] /= f
            offset[big] += np.log(f)
            scale[big] = np.exp(offset[big])
        yield cur * scale


def cross_wigner_hermite(j, k, x, xi):
    """Closed form of the Hermite-pair cross-transform at points (x, xi)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    u = 2.0 * (x * x + xi * xi)
    nu = abs(j - k)
    kk = min(j, k)
    if nu == 0:
        for row in _phi_rows(0, u, kk):
            pass
        return row / np.pi
    uu = np.where(u > 0, u, 1.0)
    for row in _phi_rows(nu, uu, kk):
        pass
    row = np.where(u > 0, row, 0.0)
    theta = np.arctan2(xi, x)
    sign = -1.0 if j >= k else 1.0
    return (row / np.pi) * np.exp(sign * 1j * nu * theta)


def default_basis_size(r, bounding_radius=1.0, safety=1.2):
    """Hermite truncation for a symbol supported near |z| <= r*bounding_radius.

    States up to K concentrate near |z| = sqrt(2K); the rule keeps everything
    the smoothed symbol can touch plus a safety margin.
    """
    base = np.ceil((r * bounding_radius + 6.0) ** 2 / 2.0)
    return int(np.ceil(base * safety))


def _identity_defect(K, rho_cap):
    """max_k |2 * sum w rho phi_{k,0}(2 rho^2) - 1| on an oversized radial grid.

    Needs ~3 Gauss-Legendre nodes per oscillation of the top state across the
    whole classically allowed region, hence the 4K scaling.
    """
    n = 4 * K + 256
    xg, wg = np.polynomial.legendre.leggauss(n)
    rho = 0.5 * rho_cap * (xg + 1.0)
    w = 0.5 * rho_cap * wg * rho
    u = 2.0 * rho * rho
    worst = 0.0
    for row in _phi_rows(0, u, K - 1):
        worst = max(worst, abs(2.0 * (w @ row) - 1.0))
    return float(worst)


def op_hermite(q, K, rho_max=None, n_rho=None, n_theta=None, compute_defect=True):
    """Hermite-basis matrix of the operator with symbol q.

    Parameters
    ----------
    q : SymbolGrid or callable (x, xi) -> values
    K : int
        Basis truncation; matrix is K x K.
    rho_max : float, optional
        Radial quadrature cutoff.  Defaults to the grid square's inscribed
        radius (SymbolGrid) or sqrt(2K)+8 (callable).
    n_rho, n_theta : int, optional
        Radial Gauss-Legendre / angular FFT resolution.  Defaults scale with
        K and rho_max.

    Raises
    ------
    BasisOverflow
        If the radial cutoff truncates the top basis states AND the symbol
        still has mass near the cutoff (i.e. the quadrature would silently
        drop symbol-weighted basis mass).
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if isinstance(q, SymbolGrid):
        if rho_max is None:
            rho_max = q.grid.half_extent - 2.0 * q.grid.h
        q_eval = q.eval
        base_meta = dict(q.meta)
    elif callable(q):
        if rho_max is None:
            rho_max = np.sqrt(2.0 * K) + 8.0
        q_eval = q
        base_meta = {}
    else:
        raise TypeError("q must be a SymbolGrid or a callable")
    rho_max = float(rho_max)
    if n_rho is None:
        n_rho = max(int(2 * K + 8 * rho_max + 96), 3 * K + 128)
    if n_theta is None:
        want = max(512, int(2 * K + 14 * rho_max + 64))
        n_theta = 1 << int(np.ceil(np.log2(want)))

    xg, wg = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * rho_max * (xg + 1.0)
    w_rho = 0.5 * rho_max * wg * rho          # includes the polar Jacobian
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    qs = np.asarray(q_eval(rho[:, None] * np.cos(theta)[None, :],
                           rho[:, None] * np.sin(theta)[None, :]))

    peak = np.max(np.abs(qs))
    if peak > 0 and rho_max < np.sqrt(2.0 * K) + 4.0:
        edge = np.max(np.abs(qs[-2:, :])) / peak
        if edge > 1e-10:
            raise BasisOverflow(
                f"radial cutoff {rho_max:g} < sqrt(2K)+4 = "
                f"{np.sqrt(2.0 * K) + 4.0:g} while the symbol has relative "
                f"mass {edge:.2e} at the cutoff; enlarge the grid or lower K")

    qt = np.fft.fft(qs, axis=1) * (2.0 * np.pi / n_theta)   # q~_nu(rho)
    u = 2.0 * rho * rho
    M = np.zeros((K, K), dtype=complex)
    for nu in range(K):
        rows = K - nu
        vec_p = w_rho * qt[:, nu]
        vec_m = vec_p if nu == 0 else w_rho * qt[:, n_theta - nu]
        ks = np.arange(rows)
        diag_p = np.empty(rows, dtype=complex)
        diag_m = np.empty(rows, dtype=complex)
        for k, row in enumerate(_phi_rows(nu, u, rows - 1)):
            diag_p[k] = row @ vec_p
            if nu > 0:
                diag_m[k] = row @ vec_m
        M[ks, ks + nu] = diag_p / np.pi
        if nu > 0:
            M[ks + nu, ks] = diag_m / np.pi

    meta = dict(base_meta)
    meta.update(kind="hermite", K=K, rho_max=rho_max, n_rho=n_rho,
                n_theta=n_theta)
    row_mass = np.abs(M).sum(axis=1)
    meta["basis_tail_bound"] = float(row_mass[-3:].max()) if K >= 3 else float(row_mass.max())
    if compute_defect:
        meta["identity_defect"] = _identity_defect(
            K, max(rho_max, np.sqrt(2.0 * K) + 8.0))
    return OperatorMatrix(M, "hermite", meta)


def op_hermite_reference(q, K):
    """Direct Cartesian-quadrature route (small K; mutual oracle for op_hermite)."""
    if not isinstance(q, SymbolGrid):
        raise TypeError("reference route needs a SymbolGrid")
    if K > 16 or q.grid.n > 512:
        raise ValueError("reference route is O(K^2 n^2); keep K <= 16, n <= 512")
    X, XI = q.grid.mesh()
    area = q.grid.cell_area()
    M = np.zeros((K, K), dtype=complex)
    for k in range(K):
        for j in range(K):
            M[k, j] = np.sum(q.values * cross_wigner_hermite(j, k, X, XI)) * area
    return OperatorMatrix(M, "hermite", {"kind": "hermite-reference", "K": K})


def op_kernel(q):
    """Grid-route operator: sampled integral kernel on the symbol's x-axis.

    K(x, y) = (2*pi)^{-1} integral e^{i(x-y)xi} q((x+y)/2, xi) dxi, evaluated
    by the xi-grid Riemann sum; the matrix is h * K(x_i, x_j) so that
    eigenvalues, trace, and norms approximate the operator's.

    Raises
    ------
    AliasedKernel
        If the kernel carries relative mass > 1e-8 at maximal |x - y|, i.e.
        the xi-sampling was too coarse for the symbol's smoothness.
    """
    if not isinstance(q, SymbolGrid):
        raise TypeError("grid route needs a SymbolGrid")
    x, xi = q.grid.axes()
    n, h = q.grid.n, q.grid.h
    mids = x[0] + 0.5 * h * np.arange(2 * n - 1)
    Qm = q.eval(mids[:, None], xi[None, :])            # (2n-1, n)
    d = np.arange(2 * n - 1) - (n - 1)
    E = np.exp(1j * h * np.outer(xi, d))               # (n, 2n-1)
    G = (Qm.astype(complex) @ E) * (h / (2.0 * np.pi))
    ii = np.arange(n)
    A = h * G[ii[:, None] + ii[None, :], ii[:, None] - ii[None, :] + (n - 1)]

    scale = max(np.max(np.abs(A)), 1e-300)
    far = max(np.abs(np.diagonal(A, offset=n - 1)).max(),
              np.abs(np.diagonal(A, offset=-(n - 1))).max())
    for off in (n - 2, -(n - 2)):
        far = max(far, np.abs(np.diagonal(A, offset=off)).max())
    if far / scale > 1e-8:
        raise AliasedKernel(
            f"kernel mass {far / scale:.2e} at maximal separation; "
            "refine the xi-grid or enlarge the symbol's decay region")

    # identity-route defect: the q = 1 kernel is Toeplitz in (i - j)
    dirich = (h / (2.0 * np.pi)) * E.sum(axis=0)       # (2n-1,) over d
    A_id = h * dirich[(ii[:, None] - ii[None, :]) + (n - 1)]
    defect = 0.0
    for c in (0.0, -0.5 * q.grid.half_extent, 0.5 * q.grid.half_extent):
        v = np.pi ** (-0.25) * np.exp(-0.5 * (x - c) ** 2)
        nv = np.linalg.norm(v)
        defect = max(defect, np.linalg.norm(A_id @ v - v) / nv)

    meta = dict(q.meta)
    meta.update(kind="grid", n=n, h=h, identity_action_defect=float(defect))
    return OperatorMatrix(A, "grid", meta, axis=x)


def _require_hermitian(op, tol=1e-8):
    if not op.is_hermitian(tol):
        raise NonHermitianOperator(
            f"matrix asymmetry {op.hermiticity_defect():.2e} exceeds {tol:g}")


def eigenvalues(op):
    """Sorted (ascending) eigenvalues; Hermitian matrices only."""
    if "eigs" not in op._cache:
        _require_hermitian(op)
        op._cache["eigs"] = np.linalg.eigvalsh(op.matrix)
    return op._cache["eigs"]


def trace(op):
    """Matrix trace (float for Hermitian input, complex otherwise)."""
    t = complex(np.trace(op.matrix))
    return t.real if op.is_hermitian() else t


def trace_norm(op):
    """Nuclear norm: sum of singular values (sum |eig| when Hermitian)."""
    if op.is_hermitian(1e-10):
        return float(np.sum(np.abs(eigenvalues(op))))
    return float(np.sum(np.linalg.svd(op.matrix, compute_uv=False)))


def operator_norm(op):
    """Spectral norm."""
    if op.is_hermitian(1e-10):
        return float(np.max(np.abs(eigenvalues(op))))
    return float(np.linalg.svd(op.matrix, compute_uv=False)[0])


def counting(op, delta):
    """Number of eigenvalues >= delta (warns when the level nearly touches one)."""
    eigs = op if isinstance(op, np.ndarray) else eigenvalues(op)
    delta = float(delta)
    margin = float(np.min(np.abs(eigs - delta)))
    if margin < 1e-9:
        warnings.warn(EigenvalueNearThreshold(
            f"eigenvalue within {margin:.2e} of level {delta:g}"))
    return int(np.sum(eigs >= delta))


@dataclass(frozen=True)
class SpectralFunction:
    """A scalar function applied to spectra; must vanish at 0.

    Either a polynomial (ascending coefficients, zero constant term) or a
    callable with f(0) = 0.
    """

    coeffs: tuple = None
    fn: callable = None
    label: str = ""

    @classmethod
    def poly(cls, coeffs, label=None):
        coeffs = tuple(float(c) for c in coeffs)
        if coeffs and coeffs[0] != 0.0:
            raise ValueError(
                "spectral function must vanish at 0 (constant term must be zero)")
        return cls(coeffs=coeffs, label=label or f"poly{list(coeffs)}")

    @classmethod
    def from_callable(cls, fn, label="callable"):
        if abs(fn(0.0)) > 1e-14:
            raise ValueError(
                "spectral function must vanish at 0 (constant term must be zero)")
        return cls(fn=fn, label=label)

    @property
    def is_poly(self):
        return self.coeffs is not None

    def __call__(self, t):
        if self.is_poly:
            return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float),
                                                    self.coeffs)
        return self.fn(t)


def spectral_apply(op, f, method="auto"):
    """f(M) as an OperatorMatrix; 'eig' and 'horner' routes cross-check."""
    if method == "auto":
        method = "eig" if op.is_hermitian() else "horner"
    if method == "eig":
        _require_hermitian(op)
        w, V = np.linalg.eigh(op.matrix)
        B = (V * f(w)[None, :]) @ V.conj().T
    elif method == "horner":
        if not f.is_poly:
            raise NonHermitianOperator(
                "callable spectral functions need a Hermitian matrix (eig route)")
        B = np.zeros_like(op.matrix, dtype=complex)
        eye = np.eye(op.size, dtype=complex)
        for c in reversed(f.coeffs):
            B = op.matrix @ B + c * eye
    else:
        raise ValueError(f"unknown method {method!r}")
    return OperatorMatrix(B, op.basis, {**op.meta, "applied": f.label}, op.axis)


def trace_spectral(op, f):
    """trace f(M) via the eigenvalues (Hermitian only)."""
    return float(np.sum(f(eigenvalues(op))))


def composition_remainder(q, n, K, **op_kwargs):
    """Trace norm of op[q]^2 - op[series_n(q, q)] in the Hermite basis.

    series_0 = q^2; series_1 adds the first star-product correction, which
    vanishes identically for equal symbols, so both orders measure the same
    genuinely-quadratic remainder.
    """
    from .symbolics import moyal_term

    if not isinstance(q, SymbolGrid):
        raise TypeError("composition remainder needs a SymbolGrid")
    if not q.is_real:
        raise ValueError("composition remainder is defined for real symbols")
    if n not in (0, 1):
        raise ValueError("series order must be 0 or 1")
    M = op_hermite(q, K, **op_kwargs)
    series = moyal_term(q, q, 0)
    if n == 1:
        t1 = moyal_term(q, q, 1)
        series = SymbolGrid(series.grid, series.values + t1.values, series.meta)
    vals = series.values
    if np.iscomplexobj(vals) and np.max(np.abs(vals.imag)) < 1e-12 * max(np.max(np.abs(vals.real)), 1e-300):
        series = SymbolGrid(series.grid, vals.real, series.meta)
    Mc = op_hermite(series, K, compute_defect=False, **op_kwargs)
    R = OperatorMatrix(M.matrix @ M.matrix - Mc.matrix, "hermite",
                       {"kind": "composition-remainder", "K": K})
    return trace_norm(R)


_MAGIC = b"PHTROP01"
_BASIS_CODE = {"hermite": 1, "grid": 2}
_BASIS_NAME = {v: k for k, v in _BASIS_CODE.items()}


def save_operator(op, path):
    """Flat binary dump: 8-byte magic, basis code, K, then complex128 entries."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BI", _BASIS_CODE[op.basis], op.size))
        fh.write(np.ascontiguousarray(op.matrix, dtype=np.complex128).tobytes())


def load_operator(path):
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError("not an operator dump")
        code, K = struct.unpack("<BI", fh.read(5))
        m = np.frombuffer(fh.read(), dtype=np.complex128).reshape(K, K)
    return OperatorMatrix(m.copy(), _BASIS_NAME[code], {"kind": "loaded"})
