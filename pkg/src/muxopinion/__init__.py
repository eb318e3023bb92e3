"""Opinion-based centrality for multiplex networks."""

from .analysis import ComparisonReport, benchmark, compare_measures, rank_difference, spearman
from .baselines import (degree_centrality, eigenvector_centrality, hits, katz_centrality,
                        pagerank)
from .dynamics import SimulationTrace, fixed_point, integrate_ode, simulate
from .errors import CapacityError, ConditionError, InputError, MuxOpinionError, NumericalError
from .io import EdgeRecord, RunConfig, parse_config, parse_edge_list, render_edges, write_report
from .multiplex import (ConditionReport, EffectiveMatrix, ModelParams, MultiplexNetwork,
                        WeightedDigraph, aggregate, build_network, effective_matrix,
                        random_multiplex, validate_conditions)
from .opinion import (UtilitySpec, column_influence, gamma_lower_bound, naive_opinion_centrality,
                      opinion_centrality, raw_opinion_score, solve_romp_numeric)
from .results import CentralityResult, fractional_ranks
from .toynet import BarrelSpec, alpha_sweep, build_barrel

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport", "benchmark", "compare_measures", "rank_difference", "spearman",
    "degree_centrality", "eigenvector_centrality", "hits", "katz_centrality", "pagerank",
    "SimulationTrace", "fixed_point", "integrate_ode", "simulate",
    "CapacityError", "ConditionError", "InputError", "MuxOpinionError", "NumericalError",
    "EdgeRecord", "RunConfig", "parse_config", "parse_edge_list", "render_edges", "write_report",
    "ConditionReport", "EffectiveMatrix", "ModelParams", "MultiplexNetwork", "WeightedDigraph",
    "aggregate", "build_network", "effective_matrix", "random_multiplex", "validate_conditions",
    "UtilitySpec", "column_influence", "gamma_lower_bound", "naive_opinion_centrality",
    "opinion_centrality", "raw_opinion_score", "solve_romp_numeric",
    "CentralityResult", "fractional_ranks",
    "BarrelSpec", "alpha_sweep", "build_barrel",
]
