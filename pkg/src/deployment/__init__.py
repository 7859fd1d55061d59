from .selectability import (
    Pair, override_points, is_selectable, SelectabilityIndex, selectable_count,
    secure_path, all_ordered_pairs
)
from .deployment_manager import (
    DeploymentPlan, SubmodularityReport, RedeployStep, greedy_deploy, lazy_greedy_deploy,
    brute_force_deploy, check_submodularity, redeploy
)
