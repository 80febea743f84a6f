"""Solvers and brute-force oracles for symmetric VPN design with linear or concave capacity costs."""

from .approx import SsfInstance, FlowSolution, solve_cvpnd, solve_ssbab, solve_ssrob, steiner_2approx
from .cables import CableList, CableType, prune_cables, segments_to_cables
from .exact import solve_exact_linear
from .instance import (
    IDENTITY,
    ConcaveCost,
    Instance,
    eval_cost_fn,
    parse_cost_fn,
    parse_instance,
    serialize_instance,
    shortest_path_tree,
)
from .oracle import (
    DemandMatrix,
    capacity_requirement,
    optimal_routing_oracle,
    optimal_tree_oracle,
    verify_feasible,
)
from .tree import Routing, TreeSolution, extract_paths, tree_capacities, tree_cost, tree_median_value

__version__ = "0.1.0"
