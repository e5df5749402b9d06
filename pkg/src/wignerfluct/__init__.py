"""Fluctuation moments of resolvent chains over Wigner ensembles.

Subpackages
-----------
``ncgeom``
    Non-crossing partitions, annular non-crossing permutations, Kreweras
    complements, Moebius function, marked pairs, non-crossing graphs.
``semicircle``
    Stieltjes transform of the semicircle law, divided differences, free
    cumulants, transpose-aware chain moments.
``second_order``
    Scalar fluctuation-moment recursion, its ensemble components,
    second-order free cumulants, good graphs.
``matrix_layer``
    Deterministic matrices for chains, the matrix-valued fluctuation
    recursion, closed combinatorial formulas.
``functional_cov``
    Semicircle moments, the logarithmic covariance kernel, quadrature,
    annular pairing predictions for polynomial statistics.
``montecarlo``
    Wigner sampling, chain traces, covariance estimators with verdicts.
"""

from .config import CapExceeded
from .ncgeom import (
    AnnulusShape,
    CyclicPermutation,
    MarkedPartitionPair,
    SetPartition,
    WeightedGraph,
    annular_pairings,
    enumerate_annular_ncp,
    enumerate_marked,
    enumerate_ncg,
    enumerate_ncp,
    kreweras_annular,
    kreweras_disk,
    moebius_nc,
)
from .semicircle import (
    SharpVector,
    SpectralPoint,
    divided_difference,
    divided_difference_recursive,
    edge_weight,
    free_cumulant,
    free_cumulant_moebius,
    mixed_chain_cumulant,
    mixed_chain_cumulant_moebius,
    mixed_chain_moment,
    mixed_chain_moment_recursive,
    stieltjes,
    stieltjes_derivative,
)
from .second_order import (
    EnsembleParams,
    GUE_PARAMS,
    fluctuation_component,
    fluctuation_moment,
    fluctuation_moment_graph_sum,
    good_graph_multiplicities,
    good_graphs,
    second_cumulant,
)
from .matrix_layer import (
    ChainFactor,
    ChainSpec,
    chain_deterministic_matrix,
    chain_fluctuation_component,
    chain_fluctuation_moment,
    chain_moment,
    closed_gue_formula,
    closed_sigma_formula,
    omega_formula_1x1,
)
from .functional_cov import (
    MonomialSpec,
    QuadratureConfig,
    kernel_u,
    phi_gue,
    poly_covariance,
    sc_circ,
    sc_circ_circ,
    sc_moment,
    sc_second,
)
from .montecarlo import (
    EstimatorReport,
    WignerEnsemble,
    chain_trace,
    estimate_covariance,
    estimate_poly_covariance,
    sample_wigner,
)

__version__ = "0.1.0"
