"""Spectral statistics of random graphs with hard vs soft degree constraints."""

from .degrees import (
    AssumptionReport,
    DegreeSequence,
    assumption_diagnostics,
    is_graphical,
    make_family,
    moments,
    new_degree_sequence,
)
from .ensembles import (
    ExpectedAdjacency,
    Matching,
    MultiGraph,
    RngStream,
    SimpleGraph,
    SimpleSample,
    expected_adjacency_cm,
    havel_hakimi,
    is_simple,
    matching_to_multigraph,
    rank_one_direction,
    sample_chung_lu,
    sample_cm_simple,
    sample_cm_simple_mcmc,
    sample_cm_simple_rejection,
    sample_matching,
    uniform_simple_edge_prob,
)
from .oracle import (
    ExactLaw,
    UniformityReport,
    enumerate_matchings,
    enumerate_simple_graphs,
    exact_cm_law,
    uniformity_check,
)
from .spectral import (
    EsdHistogram,
    SpectralSummary,
    SymmetricOperator,
    adjacency_operator,
    centered_operator,
    dense_spectrum,
    esd_histogram,
    extreme_eigenvalues,
    operator_norm,
    quadratic_form,
)
from .theory import (
    Prediction,
    alon_boppana_bound,
    expected_h_quadratic_k1,
    expected_h_quadratic_k2,
    expected_wedge_sum,
    kesten_mckay_pdf,
    lambda1_canonical,
    lambda1_microcanonical,
    normalized_h2_leading,
    semicircle_pdf,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
