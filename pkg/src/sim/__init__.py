from .scenario import ReactionMode, SimParams, Flow, Scenario, TimelineEntry
from .metrics import Metrics, SimTrace
from .energy import (
    energy_model, energy_overhead, delay_overhead, calibrated_e_reconf, calibrated_e_status
)
from .engine import SimKind, Simulation, run, compare_modes, seed_sweep
