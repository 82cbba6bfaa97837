"""Subset random sampling and reconstruction of time-vertex graph signals."""

__version__ = "0.1.0"

from .analysis import SvdSummary, numerical_rank, row_2inf_norm, thin_svd_summary
from .bounds import (
    BoundParams,
    BoundsReport,
    lemma1_min_selection,
    lemma2_coherence_bounds,
    mc_coherence_transfer,
    mc_rank_preservation,
    theorem_min_samples,
)
from .lssp import LsspConfig, LsspResult, LsspState, SolverError, lssp_reconstruct, soft_threshold
from .sampling import (
    SampleSet,
    observed_matrix,
    project_onto_complement,
    project_onto_samples,
    subset_random_sample,
)
from .signal import (
    GraphTopology,
    TimeVertexSignal,
    TopologyError,
    build_incidence,
    graph_tv_quadratic,
    joint_gradient,
    smoothness_report,
    temporal_diff,
    temporal_operators,
)
from .spectral import SpectralBases, analyze, gft_basis, harmonic_basis, make_bases, synthesize
from .svt import svt_baseline
from .synth import SynthSpec, generate_synthetic, nrmse, run_sweep, synthetic_instance

__all__ = [
    "BoundParams", "BoundsReport", "GraphTopology", "LsspConfig", "LsspResult", "LsspState",
    "SampleSet", "SolverError", "SpectralBases", "SvdSummary", "SynthSpec", "TimeVertexSignal",
    "TopologyError", "analyze", "build_incidence", "generate_synthetic", "gft_basis",
    "graph_tv_quadratic", "harmonic_basis", "joint_gradient", "lemma1_min_selection",
    "lemma2_coherence_bounds", "lssp_reconstruct", "make_bases", "mc_coherence_transfer",
    "mc_rank_preservation", "nrmse", "numerical_rank", "observed_matrix",
    "project_onto_complement", "project_onto_samples", "row_2inf_norm", "run_sweep",
    "smoothness_report", "soft_threshold", "subset_random_sample", "svt_baseline",
    "synthesize", "synthetic_instance", "temporal_diff", "temporal_operators",
    "theorem_min_samples", "thin_svd_summary",
]
