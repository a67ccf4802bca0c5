"""Config-driven experiment runner: predictions, r-sweeps, spectra, checks.

Subcommands
-----------
predict   write two-term coefficients and per-r predictions (JSON + CSV)
sweep     build the operator per r, measure trace/count, fit against the
          prediction, write the report and plot-ready columns
spectrum  dump the eigenvalues for a single r (CSV)
verify    run a named invariant battery and report pass/fail per check

Exit codes: 0 success, 1 config/usage error, 2 numerical failure.
All floats in output files are printed with 17 significant digits; repeated
runs of the same config are byte-identical.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import geometry, quantize, symbolics, szego, timefreq
from .grids import GridSpec

__all__ = ["CliError", "load_config", "run_predict", "run_sweep",
           "run_spectrum", "run_verify", "main"]


class CliError(ValueError):
    """Configuration / usage problem (exit code 1)."""


def _fmt(x):
    return f"{float(x):.17g}"


def _need(cfg, key, path):
    if key not in cfg:
        raise CliError(f"{path}: missing required field '{key}'")
    return cfg[key]


def build_domain(spec):
    kind = _need(spec, "kind", "domain")
    if kind == "disc":
        return geometry.disc(spec.get("radius", 1.0),
                             tuple(spec.get("center", (0.0, 0.0))))
    if kind == "ellipse":
        return geometry.ellipse(_need(spec, "a", "domain"),
                                _need(spec, "b", "domain"))
    if kind == "star":
        return geometry.star_domain(_need(spec, "eps", "domain"),
                                    _need(spec, "k", "domain"),
                                    spec.get("base_radius", 1.0))
    raise CliError(f"domain.kind: unknown kind {kind!r}")


def build_weight(spec):
    kind = _need(spec, "kind", "window")
    if kind == "gaussian":
        return timefreq.gaussian_weight()
    if kind == "hermite":
        w = timefreq.hermite_window(_need(spec, "k", "window"))
        return timefreq.wigner(w, w, normalize=True)
    if kind == "pair":
        w2 = timefreq.hermite_window(_need(spec, "k1", "window"))
        w1 = timefreq.hermite_window(_need(spec, "k2", "window"))
        return timefreq.wigner(w2, w1, normalize=spec.get("normalize", False))
    raise CliError(f"window.kind: unknown kind {kind!r}")


def build_amplitude(spec):
    kind = _need(spec, "kind", "symbol")
    if kind == "constant":
        v = float(spec.get("value", 1.0))
        return lambda x, xi: np.full(np.broadcast(np.asarray(x), np.asarray(xi)).shape, v)
    if kind == "gaussian_bump":
        amp = float(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 1.0))
        cx, cxi = spec.get("center", (0.0, 0.0))

        def bump(x, xi):
            x = np.asarray(x, dtype=float)
            xi = np.asarray(xi, dtype=float)
            return amp * np.exp(-(((x - cx) ** 2 + (xi - cxi) ** 2) / width ** 2))

        return bump
    if kind in ("sum", "product"):
        terms = [build_amplitude(t) for t in _need(spec, "terms", "symbol")]
        if not terms:
            raise CliError("symbol.terms: must be non-empty")
        if kind == "sum":
            return lambda x, xi: sum(t(x, xi) for t in terms)

        def prod(x, xi):
            out = terms[0](x, xi)
            for t in terms[1:]:
                out = out * t(x, xi)
            return out

        return prod
    raise CliError(f"symbol.kind: unknown kind {kind!r}")


def _parse_mode(spec):
    kind = _need(spec, "kind", "mode")
    if kind == "counting":
        delta = float(_need(spec, "delta", "mode"))
        if not 0.0 < delta < 1.0:
            raise CliError("mode.delta: counting level must lie in (0, 1)")
        return ("counting", delta)
    if kind == "trace":
        coeffs = _need(spec, "coeffs", "mode")
        try:
            f = quantize.SpectralFunction.poly(coeffs)
        except ValueError as e:
            raise CliError(f"mode.coeffs: {e}") from None
        return ("trace", f)
    raise CliError(f"mode.kind: unknown kind {kind!r}")


class ExperimentConfig:
    """Validated experiment description (see load_config for the schema)."""

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise CliError("config: top level must be a JSON object")
        self.raw = raw
        self.domain = build_domain(_need(raw, "domain", "config"))
        self.weight = build_weight(_need(raw, "window", "config"))
        self.amplitude_spec = raw.get("symbol", {"kind": "constant", "value": 1.0})
        self.amplitude = build_amplitude(self.amplitude_spec)
        self.mode_kind, self.mode_arg = _parse_mode(_need(raw, "mode", "config"))
        r_list = _need(raw, "r_list", "config")
        if not isinstance(r_list, list) or not r_list:
            raise CliError("r_list: must be a non-empty list")
        r = [float(v) for v in r_list]
        if any(b <= a for a, b in zip(r, r[1:])):
            raise CliError("r_list: values must be strictly increasing")
        if any(v <= 0 for v in r):
            raise CliError("r_list: values must be positive")
        self.r_list = r
        grid = raw.get("grid", {})
        self.grid_n = grid.get("n")
        self.grid_pad = float(grid.get("pad", 10.0))
        basis = raw.get("basis", {})
        self.basis_safety = float(basis.get("safety", 1.2))
        self.basis_K = basis.get("K")
        self.seed = int(raw.get("seed", 0))

    def symbol_grid(self, r):
        L = r * self.domain.bounding_radius + self.grid_pad
        n = self.grid_n
        if n is None:
            n = max(1024, 1 << int(np.ceil(np.log2(2.0 * L / 0.045))))
        return GridSpec(half_extent=L, n=int(n))

    def basis_size(self, r):
        if self.basis_K is not None:
            return int(self.basis_K)
        return quantize.default_basis_size(r, self.domain.bounding_radius,
                                           self.basis_safety)


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise CliError(f"config: cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"config: invalid JSON at line {e.lineno}: {e.msg}") from None
    return ExperimentConfig(raw)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _coefficients(cfg):
    """Two-term coefficients for the configured mode, plus the tail budget."""
    if cfg.mode_kind == "counting":
        A0 = szego.coeff_A0(1.0, cfg.domain,
                            quantize.SpectralFunction.poly((0.0, 1.0)))
        A1 = szego.coeff_A1_counting(cfg.domain, cfg.weight, cfg.mode_arg)
    else:
        A0 = szego.coeff_A0(cfg.amplitude, cfg.domain, cfg.mode_arg)
        A1 = szego.coeff_A1(cfg.amplitude, cfg.domain, cfg.mode_arg, cfg.weight)
    lam_cut = 8.0
    tail = float(np.exp(-(lam_cut - 1.0) ** 2))
    return A0, A1, tail


def run_predict(cfg, outdir):
    """Write predict.json / predict.csv; returns the report dict."""
    A0, A1, tail = _coefficients(cfg)
    rows = [(f"{r:g}", A0 * r * r + A1 * r, tail) for r in cfg.r_list]
    os.makedirs(outdir, exist_ok=True)
    _write_csv(os.path.join(outdir, "predict.csv"),
               ["r", "prediction", "a1_tail_bound"], rows)
    report = {
        "mode": cfg.mode_kind,
        "A0": A0,
        "A1": A1,
        "a1_tail_bound": tail,
        "predictions": {f"{r:g}": A0 * r * r + A1 * r for r in cfg.r_list},
    }
    _write_json(os.path.join(outdir, "predict.json"), report)
    return report


def build_case(cfg, r):
    """Build the operator for one r; returns eigenvalues plus metadata."""
    grid = cfg.symbol_grid(r)
    q = symbolics.smoothed_symbol(cfg.weight, cfg.amplitude, cfg.domain, r,
                                  grid=grid)
    K = cfg.basis_size(r)
    op = quantize.op_hermite(q, K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", quantize.EigenvalueNearThreshold)
        eigs = quantize.eigenvalues(op)
    return {
        "r": r,
        "eigs": eigs,
        "K": K,
        "grid_n": grid.n,
        "half_extent": grid.half_extent,
        "identity_defect": op.meta["identity_defect"],
        "basis_tail_bound": op.meta["basis_tail_bound"],
        "edge_mass": q.meta["edge_mass"],
        "pixel_mass": q.meta["pixel_mass"],
    }


def _measure(cfg, eigs):
    if cfg.mode_kind == "counting":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", quantize.EigenvalueNearThreshold)
            return float(quantize.counting(eigs, cfg.mode_arg))
    return float(np.sum(cfg.mode_arg(eigs)))


def run_sweep(cfg, outdir):
    """Full r-sweep: build, measure, fit, write sweep.json / sweep.csv."""
    A0, A1, tail = _coefficients(cfg)
    rows, results, failures = [], [], []
    for r in cfg.r_list:
        try:
            case = build_case(cfg, r)
        except Exception as e:                      # recorded, not fatal
            failures.append({"r": r, "error": f"{type(e).__name__}: {e}"})
            continue
        measured = _measure(cfg, case["eigs"])
        predicted = A0 * r * r + A1 * r
        resid = measured - predicted
        results.append((r, measured))
        rows.append((r, measured, predicted, resid, resid / r,
                     case["identity_defect"], case["basis_tail_bound"],
                     case["edge_mass"]))
    report = {
        "mode": cfg.mode_kind,
        "A0": A0,
        "A1": A1,
        "a1_tail_bound": tail,
        "rows": [dict(zip(("r", "measured", "predicted", "residual",
                           "residual_over_r", "identity_defect",
                           "basis_tail_bound", "edge_mass"), row))
                 for row in rows],
        "failures": failures,
    }
    if len(results) >= 4:
        try:
            fit = szego.fit_and_compare([r for r, _ in results],
                                        [m for _, m in results], A0, A1)
            report["fit"] = fit.to_dict()
            report["fit"]["rel_error_c2"] = fit.rel_error_c2()
            report["fit"]["rel_error_c1"] = fit.rel_error_c1()
        except szego.IllConditionedFit as e:
            report["fit"] = None
            report["fit_refused"] = str(e)
    else:
        report["fit"] = None
        report["fit_refused"] = f"only {len(results)} successful r values (< 4)"
    os.makedirs(outdir, exist_ok=True)
    _write_csv(os.path.join(outdir, "sweep.csv"),
               ["r", "measured", "predicted", "residual", "residual_over_r",
                "identity_defect", "basis_tail_bound", "edge_mass"], rows)
    _write_json(os.path.join(outdir, "sweep.json"), report)
    return report


def run_spectrum(cfg, outdir):
    """Dump eigenvalues for a single r: spectrum.csv / spectrum.json."""
    if len(cfg.r_list) != 1:
        raise CliError("r_list: spectrum mode needs exactly one r")
    case = build_case(cfg, cfg.r_list[0])
    eigs = case["eigs"][::-1]                       # descending
    rows = [(str(i), float(v), case["identity_defect"],
             case["basis_tail_bound"]) for i, v in enumerate(eigs)]
    os.makedirs(outdir, exist_ok=True)
    _write_csv(os.path.join(outdir, "spectrum.csv"),
               ["index", "eigenvalue", "identity_defect", "basis_tail_bound"],
               rows)
    meta = {k: v for k, v in case.items() if k != "eigs"}
    meta["count"] = len(eigs)
    meta["max_eigenvalue"] = float(eigs[0])
    meta["min_eigenvalue"] = float(eigs[-1])
    _write_json(os.path.join(outdir, "spectrum.json"), meta)
    return meta


# ----------------------------------------------------------------------
# verification batteries


def _check(name, measured, bound):
    return {"name": name, "measured": float(measured), "bound": float(bound),
            "passed": bool(measured <= bound)}


def _suite_geometry():
    out = []
    ell = geometry.ellipse(1.3, 0.8)
    out.append(_check("ellipse tubular radius = b^2/a",
                      abs(geometry.tubular_radius(ell) - 0.8 ** 2 / 1.3), 1e-6))
    d = geometry.disc()
    rng = np.random.default_rng(7)
    z = rng.uniform(-2, 2, size=(64, 2))
    sd = geometry.signed_distance(d, z)
    out.append(_check("disc signed distance closed form",
                      np.max(np.abs(sd - (1.0 - np.hypot(z[:, 0], z[:, 1])))), 1e-10))
    area = geometry.tube_integral(d, lambda p: np.ones(len(p)), 0.3)
    out.append(_check("disc tube area vs annulus",
                      abs(area - np.pi * (1.3 ** 2 - 0.7 ** 2)), 1e-8))
    nint = geometry.boundary_integral(ell, lambda p: geometry.inward_normal(
        ell, np.linspace(0, 2 * np.pi, len(p), endpoint=False)))
    out.append(_check("closed-curve normal integral vanishes",
                      np.max(np.abs(nint)), 1e-10))
    return out


def _suite_timefreq():
    out = []
    W = timefreq.wigner(timefreq.gaussian_window(), timefreq.gaussian_window())
    X, XI = W.grid.mesh()
    exact = np.exp(-(X ** 2 + XI ** 2)) / np.pi
    out.append(_check("gaussian pair transform closed form",
                      np.max(np.abs(W.values - exact)), 1e-8))
    prof = timefreq.profile_q_halfplane(W, (1.0, 0.0))
    from scipy.special import erf
    lam = prof.lambdas
    band = np.abs(lam) <= 6.0
    out.append(_check("gaussian profile matches (1+erf)/2",
                      np.max(np.abs(prof.values[band] - (1 + erf(lam[band])) / 2)),
                      1e-8))
    prof2 = timefreq.profile_q_frft(timefreq.gaussian_window(),
                                    timefreq.gaussian_window(), (0.6, 0.8))
    pf = timefreq.profile_q_halfplane(W, (0.6, 0.8))
    out.append(_check("half-plane vs rotation route",
                      np.max(np.abs(pf(lam[band]) - prof2(lam[band]))), 1e-6))
    g_meas = timefreq.counting_profile_g(prof, 0.25, method="measure")
    g_inv = timefreq.counting_profile_g(prof, 0.25, method="inverse")
    out.append(_check("counting correction route agreement",
                      abs(g_meas - g_inv), 1e-9))
    return out


def _suite_symbolics():
    out = []
    g = GridSpec(half_extent=12.0, n=256)
    p = symbolics.sample_symbol(lambda x, xi: np.exp(-(x ** 2 + xi ** 2) / 4), g)
    t1 = symbolics.moyal_term(p, p, 1)
    out.append(_check("self-bracket vanishes",
                      np.max(np.abs(t1.values)), 1e-13))
    px = symbolics.sample_symbol(
        lambda x, xi: x * np.exp(-(x ** 2 + xi ** 2) / 4), g)
    pxi = symbolics.sample_symbol(
        lambda x, xi: xi * np.exp(-(x ** 2 + xi ** 2) / 4), g)
    tb = symbolics.moyal_term(px, pxi, 1)
    X, XI = g.mesh()
    rho2 = X ** 2 + XI ** 2
    closed = 0.5j * (1.0 - rho2 / 2.0) * np.exp(-rho2 / 2.0)
    out.append(_check("gaussian position-momentum bracket closed form",
                      np.max(np.abs(tb.values - closed)), 1e-10))
    W = timefreq.gaussian_weight()
    q = symbolics.smoothed_symbol(W, 1.0, geometry.disc(), 4.0)
    out.append(_check("smoothing preserves total mass",
                      abs(q.integral() - q.meta["pixel_mass"]) /
                      q.meta["pixel_mass"], 1e-9))
    return out


def _suite_quantize():
    out = []
    ident = quantize.op_hermite(lambda x, xi: np.ones_like(np.asarray(x)), 32)
    out.append(_check("constant symbol gives the identity",
                      np.max(np.abs(ident.matrix - np.eye(32))), 1e-8))
    bump = lambda x, xi: np.exp(-(x ** 2 + xi ** 2) / 2.0)
    op = quantize.op_hermite(bump, 48)
    tr = quantize.trace(op)
    out.append(_check("trace equals phase-plane average",
                      abs(tr - 1.0), 1e-6))
    W = timefreq.gaussian_weight()
    q = symbolics.smoothed_symbol(W, 1.0, geometry.disc(), 4.0)
    opd = quantize.op_hermite(q, quantize.default_basis_size(4.0))
    eigs = quantize.eigenvalues(opd)
    out.append(_check("smoothed indicator spectrum within [0, 1] (1e-8)",
                      max(-eigs.min(), eigs.max() - 1.0), 1e-8))
    qc = symbolics.sample_symbol(
        lambda x, xi: (x + 1j * xi) * np.exp(-(x ** 2 + xi ** 2) / 2.0),
        GridSpec(half_extent=12.0, n=256))
    qcc = symbolics.SymbolGrid(qc.grid, np.conj(qc.values))
    m1 = quantize.op_hermite(qc, 24, compute_defect=False)
    m2 = quantize.op_hermite(qcc, 24, compute_defect=False)
    out.append(_check("adjoint matches conjugate symbol",
                      np.max(np.abs(m1.matrix.conj().T - m2.matrix)), 1e-10))
    return out


def _suite_szego():
    out = []
    d = geometry.disc()
    W = timefreq.gaussian_weight()
    t2 = quantize.SpectralFunction.poly((0.0, 0.0, 1.0))
    tlin = quantize.SpectralFunction.poly((0.0, 1.0))
    out.append(_check("bulk coefficient of the unit disc",
                      abs(szego.coeff_A0(1.0, d, tlin) - 0.5), 1e-4))
    out.append(_check("boundary coefficient vanishes for linear f",
                      abs(szego.coeff_A1(1.0, d, tlin, W)), 1e-12))
    out.append(_check("boundary coefficient for f=t^2 (gaussian, disc)",
                      abs(szego.coeff_A1(1.0, d, t2, W) + 1 / np.sqrt(2 * np.pi)),
                      1e-6))
    out.append(_check("counting correction at level 0.25",
                      abs(szego.coeff_A1_counting(d, W, 0.25) - 0.4769362762044699),
                      1e-6))
    return out


_SUITES = {
    "geometry": _suite_geometry,
    "timefreq": _suite_timefreq,
    "symbolics": _suite_symbolics,
    "quantize": _suite_quantize,
    "szego": _suite_szego,
}


def run_verify(suite, outdir=None):
    """Run one battery (or 'all'); returns (all_passed, checks list)."""
    if suite == "all":
        names = list(_SUITES)
    elif suite in _SUITES:
        names = [suite]
    else:
        raise CliError(f"--suite: unknown suite {suite!r} "
                       f"(choose from {', '.join([*_SUITES, 'all'])})")
    checks = []
    for name in names:
        for c in _SUITES[name]():
            c["suite"] = name
            checks.append(c)
    ok = all(c["passed"] for c in checks)
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        _write_json(os.path.join(outdir, "verify.json"),
                    {"suite": suite, "passed": ok, "checks": checks})
    return ok, checks


# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):                        # usage errors exit 1
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def main(argv=None):
    parser = _Parser(prog="phasetrace",
                     description="Smoothed-symbol operator experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("predict", "sweep", "spectrum"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--threads", type=int, default=None)
    pv = sub.add_parser("verify")
    pv.add_argument("--suite", default="all")
    pv.add_argument("--out", default=None)
    pv.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    limiter = None
    if args.threads is not None:
        try:
            from threadpoolctl import threadpool_limits
            limiter = threadpool_limits(limits=args.threads)
        except ImportError:
            print("note: threadpoolctl unavailable; --threads ignored",
                  file=sys.stderr)
    try:
        if args.command == "verify":
            ok, checks = run_verify(args.suite, args.out)
            for c in checks:
                state = "PASS" if c["passed"] else "FAIL"
                print(f"{state} [{c['suite']}] {c['name']}: "
                      f"measured {c['measured']:.3e} vs bound {c['bound']:.3e}")
            print(f"{sum(c['passed'] for c in checks)}/{len(checks)} checks passed")
            return 0 if ok else 2
        cfg = load_config(args.config)
        if args.command == "predict":
            run_predict(cfg, args.out)
        elif args.command == "sweep":
            report = run_sweep(cfg, args.out)
            if not report["rows"]:
                print("sweep: every r failed", file=sys.stderr)
                return 2
        elif args.command == "spectrum":
            run_spectrum(cfg, args.out)
        print(f"wrote {args.command} outputs to {args.out}")
        return 0
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    raise SystemExit(main())


if __name__ == "__main__":
    sys.exit(main())
