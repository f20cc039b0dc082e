"""specedge: deterministic spectral laws of X'TX for signed diagonal T,
edge location and classification, GOE Tracy-Widom edge tests, MANOVA
variance-component populations, Monte Carlo verification harness, and
Lindeberg swap sequences with tracked edges."""

__version__ = "0.1.0"

from .edges import (
    EdgeInfo,
    SupportReport,
    balanced_sufficiency,
    check_regularity,
    edge_for_m_sign,
    find_edges,
)
from .errors import SpecEdgeError
from .manova import (
    GeneralDesign,
    OneWayDesign,
    estimate_sigma_sq,
    general_F_population,
    manova_estimate,
    oneway_B_matrices,
    oneway_population,
)
from .population import PopulationSpec, from_values
from .simulate import (
    CoverageResult,
    LocalLawProbe,
    SimConfig,
    edge_concentration,
    local_law_probe,
    sample_spectrum,
    support_adherence,
    table1_experiment,
)
from .spectral import (
    atom_mass_at_zero,
    density_f0,
    solve_m0,
    stieltjes_boundary,
    z0_derivative,
    z0_eval,
)
from .swaps import (
    SwapDiagnostics,
    SwapState,
    build_swap_sequence,
    rescale_unit_gamma,
    sum_rule_residuals,
    track_edge_after_swap,
    verify_swappable,
)
from .tw import f1_cdf, f1_quantile
from .twtest import TestReport, edge_test, plugin_edge_test

__all__ = [
    "CoverageResult",
    "EdgeInfo",
    "GeneralDesign",
    "LocalLawProbe",
    "OneWayDesign",
    "PopulationSpec",
    "SimConfig",
    "SpecEdgeError",
    "SupportReport",
    "SwapDiagnostics",
    "SwapState",
    "TestReport",
    "atom_mass_at_zero",
    "balanced_sufficiency",
    "build_swap_sequence",
    "check_regularity",
    "density_f0",
    "edge_concentration",
    "edge_for_m_sign",
    "edge_test",
    "estimate_sigma_sq",
    "f1_cdf",
    "f1_quantile",
    "find_edges",
    "from_values",
    "general_F_population",
    "local_law_probe",
    "manova_estimate",
    "oneway_B_matrices",
    "oneway_population",
    "plugin_edge_test",
    "rescale_unit_gamma",
    "sample_spectrum",
    "solve_m0",
    "stieltjes_boundary",
    "sum_rule_residuals",
    "support_adherence",
    "table1_experiment",
    "track_edge_after_swap",
    "verify_swappable",
    "z0_derivative",
    "z0_eval",
]
