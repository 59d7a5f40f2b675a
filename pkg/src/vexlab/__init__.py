"""Laboratory for planted sparse vertex cuts.

Generate semi-random two-sided instances, solve the balanced
vertex-expansion SDP, build and verify exact rational dual certificates
of integrality, and round solutions into cuts.
"""

from .graphs import (CutReport, Graph, WeightedDigraph,
                     balanced_vertex_expansion_bruteforce, laplacian_quadform,
                     vertex_boundary, vertex_expansion)
from .instances import (PlantedInstance, VbmParams, apply_adversary,
                        gen_bipartite_random, gen_expander, gen_hn, gen_lr14, gen_vbm,
                        verify_bipartite_properties)
from .certificate import (CertReport, DualCertificate, build_certificate,
                          complementary_slackness, flow_check, harmonic_condition,
                          verify_certificate)
from .rounding import (LineEmbedding, algorithm1_round, algorithm2_planted,
                       cluster_to_embedding, line_sweep, round_exact)
from .sdp import (SdpProblem, SdpSolution, SolverOptions, build_primal, factorize,
                  solve, strengthen_triangle)
from .spectral import spectral_gap, spectral_sweep_edge_cut, stationary_distribution

__version__ = "0.1.0"

__all__ = [
    "CutReport", "Graph", "WeightedDigraph", "balanced_vertex_expansion_bruteforce",
    "laplacian_quadform", "vertex_boundary", "vertex_expansion",
    "PlantedInstance", "VbmParams", "apply_adversary", "gen_bipartite_random",
    "gen_expander", "gen_hn", "gen_lr14", "gen_vbm", "verify_bipartite_properties",
    "CertReport", "DualCertificate", "build_certificate", "complementary_slackness",
    "flow_check", "harmonic_condition", "verify_certificate",
    "LineEmbedding", "algorithm1_round", "algorithm2_planted", "cluster_to_embedding",
    "line_sweep", "round_exact",
    "SdpProblem", "SdpSolution", "SolverOptions", "build_primal", "factorize",
    "solve", "strengthen_triangle",
    "spectral_gap", "spectral_sweep_edge_cut", "stationary_distribution",
]
