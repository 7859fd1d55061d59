"""
Affine energy model for controller-induced work and the delay overhead of
reconfiguration pauses.

Defaults are calibrated on the reference scenario: one reconfiguration every
20 s costs 20% over the idle baseline, and one status update every 3 s
stays at or below 1%.
"""

import logging
from typing import Optional

from utils.errors import SmanetError

logger = logging.getLogger(__name__)

RECONF_OVERHEAD_SHARE = 0.20
RECONF_REFERENCE_PERIOD_S = 20.0
STATUS_OVERHEAD_SHARE = 0.01
STATUS_REFERENCE_PERIOD_S = 3.0


def calibrated_e_reconf(baseline_rate: float = 1.0) -> float:
    return RECONF_OVERHEAD_SHARE * baseline_rate * RECONF_REFERENCE_PERIOD_S


def calibrated_e_status(baseline_rate: float = 1.0) -> float:
    return STATUS_OVERHEAD_SHARE * baseline_rate * STATUS_REFERENCE_PERIOD_S


def energy_model(reconfigurations: int, status_updates: int, duration_s: float, baseline_rate: float = 1.0,
                 e_reconf: Optional[float] = None, e_status: Optional[float] = None) -> float:
    """baseline_rate * duration + e_reconf * reconfigurations + e_status * status_updates"""
    if not duration_s > 0:
        raise SmanetError(f"duration must be > 0, got {duration_s}")
    if reconfigurations < 0 or status_updates < 0:
        raise SmanetError("event counts must be non-negative")
    e_reconf = calibrated_e_reconf(baseline_rate) if e_reconf is None else e_reconf
    e_status = calibrated_e_status(baseline_rate) if e_status is None else e_status
    return baseline_rate * duration_s + e_reconf * reconfigurations + e_status * status_updates


def energy_overhead(energy: float, duration_s: float, baseline_rate: float = 1.0) -> float:
    """Fraction of energy spent above the idle baseline"""
    baseline = baseline_rate * duration_s
    return (energy - baseline) / baseline


def delay_overhead(with_reconfig, without_reconfig) -> float:
    """
    Relative increase of mean delivery delay caused by reconfigurations.
    Both arguments are Metrics (or anything with mean_delivery_delay).
    """
    base = without_reconfig.mean_delivery_delay
    if base <= 0:
        raise SmanetError("baseline run has zero mean delivery delay; overhead is undefined")
    return (with_reconfig.mean_delivery_delay - base) / base
