"""Exact verification of hypersignaling in squit-based toy theories."""

from .analysis import (
    WITNESS_GAME,
    XI,
    build_xi,
    capacity_blahut_arimoto,
    elementary_signaling_dimension,
    full_report,
    verify_hypersignaling,
)
from .exact import RatMatrix, binomial, rank, solve_unique, stirling2
from .gpt import CorrelationMatrix, Measurement, SystemSpec, correlation, enumerate_extremal_measurements
from .lp import HPolytope, LpProblem, LpResult, lp_solve
from .polytope import GameMatrix, MembershipCertificate, game_max, membership, payoff, vertex_count, vertices_iter
from .squit import bipartite_group, build_bipartite, build_elementary, classify_models, consistency_scan, get_model
from .vertex import enumerate_vertices

__version__ = "0.1.0"
