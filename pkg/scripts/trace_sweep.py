#!/usr/bin/env python3
"""Trace sweep: tr f(T_r) against the two-term prediction for polynomial f.

For each dilation r this builds the smoothed indicator symbol, quantises it,
applies the polynomial spectral function to the eigenvalues, and compares
the trace with A0 r^2 + A1 r.  The residual should stay O(1) as r grows.

Example
-------
    python scripts/trace_sweep.py --coeffs 0 0 1 --r 4 6 8 12
"""

import argparse
import sys

import numpy as np

from phasetrace import (
    coeff_A0, coeff_A1, default_basis_size, disc, eigenvalues, ellipse,
    fit_and_compare, gaussian_weight, op_hermite, smoothed_symbol,
    SpectralFunction,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", choices=("disc", "ellipse"), default="disc")
    ap.add_argument("--coeffs", type=float, nargs="+", default=[0.0, 0.0, 1.0],
                    help="ascending polynomial coefficients of f (f(0)=0)")
    ap.add_argument("--r", type=float, nargs="+", default=[4.0, 6.0, 8.0, 12.0])
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args(argv)

    dom = disc() if args.domain == "disc" else ellipse(1.3, 0.8)
    weight = gaussian_weight()
    f = SpectralFunction.poly(args.coeffs)
    A0 = coeff_A0(1.0, dom, f)
    A1 = coeff_A1(1.0, dom, f, weight)
    print(f"domain={dom.name}  f={f.label}  A0={A0:.9f}  A1={A1:.9f}")
    print(f"{'r':>6} {'K':>5} {'trace':>12} {'predicted':>12} {'resid':>10} "
          f"{'defect':>9}")

    rows = []
    for r in args.r:
        q = smoothed_symbol(weight, 1.0, dom, r)
        op = op_hermite(q, default_basis_size(r, dom.bounding_radius))
        tr = float(np.sum(f(eigenvalues(op))))
        pred = A0 * r * r + A1 * r
        rows.append((r, tr))
        print(f"{r:6.2f} {op.meta['K']:5d} {tr:12.6f} {pred:12.6f} "
              f"{tr - pred:10.6f} {op.meta['identity_defect']:9.2e}")

    if len(rows) >= 4:
        fit = fit_and_compare([r for r, _ in rows], [t for _, t in rows], A0, A1)
        print(f"fitted c2={fit.fitted_c2:.6f} (A0 rel err {fit.rel_error_c2():.2%}), "
              f"c1={fit.fitted_c1:.6f} (A1 rel err {fit.rel_error_c1():.2%})")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("r,trace\n")
            for r, t in rows:
                fh.write(f"{r:.17g},{t:.17g}\n")
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
