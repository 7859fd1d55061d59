from .placement_cost import (
    Organization, CostWeights, PlacementCost, Placement, Assignment, forwarders_of,
    assign_forwarders, choose_root, validate_placement, placement_cost, controller_path_latency
)
from .placement_manager import exhaustive_place, local_search_place, best_organization, solve_placement
