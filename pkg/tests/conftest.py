"""Shared fixtures: the disc pipeline is built once per session and reused.

Building the smoothed disc symbol and its Hermite-basis operator is the
dominant cost of the suite (the r = 24 case alone needs a 540-dimensional
basis), so eigenvalues, traces, and diagnostics are cached per dilation and
shared across tests.
"""

import numpy as np
import pytest

from phasetrace import (
    default_basis_size, disc, eigenvalues, gaussian_weight, op_hermite,
    smoothed_symbol, trace,
)

SWEEP_R = (4.0, 8.0, 12.0, 16.0, 24.0)


@pytest.fixture(scope="session")
def unit_disc():
    return disc()


@pytest.fixture(scope="session")
def gauss_weight():
    return gaussian_weight()


@pytest.fixture(scope="session")
def disc_cases(unit_disc, gauss_weight):
    """dict r -> {eigs, trace, symbol_integral, K, identity_defect, ...}."""
    cases = {}
    for r in SWEEP_R:
        q = smoothed_symbol(gauss_weight, 1.0, unit_disc, r)
        K = default_basis_size(r, unit_disc.bounding_radius)
        op = op_hermite(q, K)
        cases[r] = {
            "r": r,
            "K": K,
            "eigs": eigenvalues(op),
            "trace": trace(op),
            "symbol_integral": float(q.integral().real),
            "identity_defect": op.meta["identity_defect"],
            "basis_tail_bound": op.meta["basis_tail_bound"],
            "edge_mass": q.meta["edge_mass"],
            "grid_n": q.grid.n,
            "half_extent": q.grid.half_extent,
        }
    return cases
