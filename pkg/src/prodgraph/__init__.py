"""Sparse sampling and reconstruction of signals on product graphs."""

__version__ = "0.1.0"

from .errors import (
    InvalidInputError, InvalidParameterError, ParseError, ProdGraphError,
    SearchSpaceError, SingularSystemError, UndefinedMetricError,
)
from .graph_core import (
    Graph, ShiftKind, ShiftOperator, adjacency, build_cycle_graph, build_knn_graph,
    degree_vector, laplacian, shift_operator,
)
from .spectral import (
    FrequencySupport, ReducedBasis, SpectralBasis, eigendecompose, reduce,
    select_support_by_energy, select_support_first_k,
)
from .product import (
    ProductKind, ProductModel, analyze, matricize, product_adjacency,
    product_eigenvalues, synthesize, vectorize,
)
from .sampler import (
    IdentifiabilityReport, RemovalState, SamplingDesign, brute_force_design,
    check_identifiability, frame_potential, greedy_design, marginal_gain,
    product_frame_potential, random_design, surrogate_value,
)
from .reconstruct import (
    SampledObservation, estimate_coefficients, fisher_information, masked_rmse,
    reconstruct_signal, relative_error, sample,
)
