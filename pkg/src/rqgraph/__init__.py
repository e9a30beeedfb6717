"""Quantum transport through open quantum graphs and randomized quantum graphs."""

__version__ = "0.1.0"

from .families import complete_graph, complete_minus_edge, open_kne
from .graph import (
    MetricGraph,
    OpenQuantumGraph,
    SubgraphMask,
    VertexAmplitudes,
    apply_mask,
    build_open_graph,
    masks_with_edge_count,
    nk_amplitudes,
    total_degree,
)
from .rqg import (
    EdgeCountProfile,
    RqgEstimate,
    approx_transmission,
    argmax_over_p,
    exact_profile,
    exact_transmission,
    max_abs_error,
    mc_profile,
    sample_ensemble,
    subgraph_weight,
)
from .scattering import (
    ScatteringResult,
    SingularAtK,
    probability,
    reflection_amplitude,
    scatter,
    transmission_amplitude,
    transmission_curve,
)
from .symmetry import IsoClass, classify_subgraphs, lead_preserving_automorphisms
