"""Peer-to-peer ride matching with schedule trees.

Pipeline for a batch: geometric pruning of driver/passenger pairs, feasible
passenger combinations per driver (grown level by level with schedule-tree
insertion), then an exact set-packing assignment.
"""
from ._core import BACKEND
from .assign import AssignmentProblem, solve_exact, solve_greedy
from .combos import build_candidates
from .config import RunConfig, load_config
from .demand import DriverOffer, TripRequest, make_driver, make_request
from .dyntree import best_sequence, enumerate_sequences, init_tree, insert_request
from .network import generate_network, load_network, shortest_path, travel_matrix
from .pruning import candidate_pairs

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AssignmentProblem", "solve_exact", "solve_greedy", "build_candidates",
    "RunConfig", "load_config", "DriverOffer", "TripRequest", "make_driver", "make_request",
    "best_sequence", "enumerate_sequences", "init_tree", "insert_request",
    "generate_network", "load_network", "shortest_path", "travel_matrix", "candidate_pairs",
]
