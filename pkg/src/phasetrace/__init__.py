"""Numerical laboratory for smoothed-symbol phase-plane operators.

Build the operator with symbol (W * a·1_Omega)(z/r) in the Hermite basis,
compute its spectrum, traces, and counting functions, and compare them
against the two-term area-plus-boundary asymptotics in the dilation
parameter r.

Modules
-------
grids      square phase-plane sampling grids
geometry   smooth planar domains, projections, tubular neighbourhoods
timefreq   windows, phase-space weights, level profiles and their inverses
symbolics  symbol sampling, smoothing by convolution, star-product terms
quantize   Hermite-basis and integral-kernel quantisation, spectra, traces
szego      bulk/boundary coefficients, predictions, sweep fits
cli        config-driven experiment runner (predict / sweep / spectrum / verify)
"""

from .grids import GridSpec
from .geometry import (
    Domain,
    GeometryError,
    NotInTube,
    DegenerateBoundary,
    TubeTooWide,
    disc,
    ellipse,
    star_domain,
    scale_domain,
    boundary_points,
    inward_normal,
    curvature_at,
    signed_distance,
    nearest_boundary_point,
    tubular_radius,
    boundary_integral,
    tube_integral,
)
from .timefreq import (
    TimeFreqError,
    GridTooCoarse,
    BasisTooSmall,
    FlatCrossing,
    Window,
    PhaseWeight,
    ProfileQ,
    gaussian_window,
    hermite_window,
    hermite_functions,
    gaussian_weight,
    wigner,
    frft,
    profile_q_halfplane,
    profile_q_frft,
    counting_profile_g,
    default_level_grid,
)
from .symbolics import (
    SymbolicsError,
    GridTooSmall,
    GridMismatch,
    SymbolGrid,
    sample_symbol,
    dilate,
    sharp_symbol,
    smoothed_symbol,
    default_symbol_grid,
    moyal_term,
    symbol_norm_report,
)
from .quantize import (
    QuantizeError,
    BasisOverflow,
    AliasedKernel,
    NonHermitianOperator,
    EigenvalueNearThreshold,
    OperatorMatrix,
    SpectralFunction,
    cross_wigner_hermite,
    default_basis_size,
    op_hermite,
    op_hermite_reference,
    op_kernel,
    eigenvalues,
    trace,
    trace_norm,
    operator_norm,
    counting,
    spectral_apply,
    trace_spectral,
    composition_remainder,
    save_operator,
    load_operator,
)
from .szego import (
    SzegoError,
    IllConditionedFit,
    AsymptoticsReport,
    coeff_A0,
    coeff_A1,
    coeff_A1_counting,
    is_radial_weight,
    predict,
    fit_and_compare,
)

__version__ = "0.1.0"
