"""Dyadic-shell (Littlewood-Paley) calculus, Besov-type norms, and a
Navier-Stokes mild-solution solver on the periodic torus."""

from .norms import (
    BesovIndex,
    NormReport,
    TimeGrid,
    TimeSeriesField,
    besov_norm,
    check_ale,
    chemin_lerner_norm,
    heat_char_norm,
    inequality_suite,
    lp_norm,
    x_norm,
    y_norm,
    z_norm,
)
from .paraproduct import (
    ProductReport,
    bony_product,
    bony_vs_pointwise,
    paraproduct,
    pointwise_tensor,
    projected_divergence_blockwise,
    remainder,
)
from .solver import (
    CalibrationTable,
    PicardTrace,
    PersistenceTrace,
    SmallnessError,
    SolutionRecord,
    SolverConfig,
    bilinear_term,
    bilinear_term_bony,
    blowup_monitor,
    duhamel,
    heat_source,
    lambda_root,
    persistence_check,
    picard_solve,
    semigroup_check,
    smallness_condition,
    uniqueness_check,
)
from .spectral import (
    CutoffPair,
    DyadicRange,
    Grid,
    SpectralField,
    apply_first_order_symbol,
    bernstein_ratio,
    build_cutoffs,
    dyadic_block,
    dyadic_range,
    forward_transform,
    heat_flow,
    inverse_transform,
    leray_project,
    low_pass,
    projected_divergence,
    to_physical,
)

__version__ = "0.1.0"
