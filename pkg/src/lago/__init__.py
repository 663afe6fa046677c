"""Dynamic community detection on link streams by Longitudinal Modularity optimization."""

from .benchgen import Block, ScenarioSpec, generate, preset_scenarios
from .community import (NEW, Community, DynamicCommunityStructure, Violation, apply_move, csc,
                        singleton_structure, trim, validate)
from .estimator import LAGO
from .exceptions import LagoError
from .linkstream import (ActiveTimeNode, LinkStream, infer_tick, parse_edge_list, read_edge_list,
                         stream_from_records, write_edge_list)
from .metrics import RankTable, nvi, rank_variants, variation_of_information
from .optimizer import (VARIANTS, FastExplorationSchedule, LagoConfig, RunReport, TimeModule,
                        candidate_neighbors, normalize_variant, refine_stem, refine_stmm,
                        refine_stnm, rtmm_level, run_lago)
from .quality import (IncrementalQuality, QualityBreakdown, QualityConfig, delta_move,
                      expectation_jm, expectation_mm, q_score, q_score_naive)

__version__ = "0.1.0"

__all__ = [
    "LAGO", "NEW", "VARIANTS", "ActiveTimeNode", "Block", "Community",
    "DynamicCommunityStructure", "FastExplorationSchedule", "IncrementalQuality", "LagoConfig",
    "LagoError", "LinkStream", "QualityBreakdown", "QualityConfig", "RankTable", "RunReport",
    "ScenarioSpec", "TimeModule", "Violation", "apply_move", "candidate_neighbors", "csc",
    "delta_move", "expectation_jm", "expectation_mm", "generate", "infer_tick",
    "normalize_variant", "nvi", "parse_edge_list", "preset_scenarios", "q_score",
    "q_score_naive", "rank_variants", "read_edge_list", "refine_stem", "refine_stmm",
    "refine_stnm", "rtmm_level", "run_lago", "singleton_structure", "stream_from_records",
    "trim", "validate", "variation_of_information", "write_edge_list",
]
