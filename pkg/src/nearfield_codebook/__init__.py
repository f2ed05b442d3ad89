"""Near-field hierarchical beamforming codebooks for uniform linear arrays."""
from .array import (
    ArrayConfig,
    BeamVector,
    ChannelRealization,
    PolarPoint,
    beam_gain,
    gain_map,
    steering_matrix,
    steering_vector,
    synthesize_channel,
)
from .estimators import BeamSelector, check_channels
from .fresnel import fresnel_c, fresnel_cs, fresnel_s, closed_form_gain, steering_gain
from .hierarchy import HierarchicalCodebook, HierarchyConfig, build_hierarchy
from .lower import CoverageRegion, LowerCodebook, build_lower_codebook, lower_codebook
from .patterns import bmwss_pattern, deact_pattern, quadric_pattern
from .search import SearchResult, exhaustive_search, hierarchical_search, topk_agreement
from .sim import ExperimentReport, SimConfig, emit_report, run_gain_experiment, run_search_experiment, sample_users
from .transforms import relocate, rotate

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig", "BeamVector", "ChannelRealization", "PolarPoint", "beam_gain", "gain_map",
    "steering_matrix", "steering_vector", "synthesize_channel", "BeamSelector", "check_channels",
    "fresnel_c", "fresnel_cs", "fresnel_s", "closed_form_gain", "steering_gain", "HierarchicalCodebook",
    "HierarchyConfig", "build_hierarchy", "CoverageRegion", "LowerCodebook", "build_lower_codebook",
    "lower_codebook", "bmwss_pattern", "deact_pattern", "quadric_pattern", "SearchResult",
    "exhaustive_search", "hierarchical_search", "topk_agreement", "ExperimentReport", "SimConfig",
    "emit_report", "run_gain_experiment", "run_search_experiment", "sample_users", "relocate", "rotate",
]
