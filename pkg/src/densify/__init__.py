"""Anytime shortest paths on densified Halton roadmaps with lazy collision checking."""

from .bench import AnytimeProfile, RunConfig, comparative_experiment, run_strategy, scaling_experiment
from .cspace import EdgeCache, HyperRect, Scenario, empty_scenario, generate_scenario, point_free, segment_free
from .informed import InformedSet, ellipsoid_volume
from .roadmap import Roadmap, graph_distance_oracle
from .sampling import SampleSequence, dispersion_bound, halton_point, radical_inverse
from .search import LazySearch, PathResult, eager_astar, lazy_search
from .strategy import BatchSchedule, edge_schedule, hybrid_schedule, quality_bound, vertex_schedule

__version__ = "0.1.0"

__all__ = [
    "AnytimeProfile",
    "BatchSchedule",
    "EdgeCache",
    "HyperRect",
    "InformedSet",
    "LazySearch",
    "PathResult",
    "Roadmap",
    "RunConfig",
    "SampleSequence",
    "Scenario",
    "comparative_experiment",
    "dispersion_bound",
    "eager_astar",
    "edge_schedule",
    "ellipsoid_volume",
    "empty_scenario",
    "generate_scenario",
    "graph_distance_oracle",
    "halton_point",
    "hybrid_schedule",
    "lazy_search",
    "point_free",
    "quality_bound",
    "radical_inverse",
    "run_strategy",
    "scaling_experiment",
    "segment_free",
    "vertex_schedule",
]
