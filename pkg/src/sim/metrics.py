from dataclasses import dataclass, field
from typing import Dict, List


@dataclass
class Metrics:
    """Aggregate counters of one simulation run"""
    mode: str = ''
    seed: int = 0
    injected: int = 0
    delivered: int = 0
    dropped_policy: int = 0
    dropped_loss: int = 0
    in_flight: int = 0
    total_delay_ms: float = 0.0
    recovery_latency: List[float] = field(default_factory=list)
    ntk_violations: int = 0
    compromised_transits: int = 0
    loop_drops: int = 0
    energy: Dict[int, float] = field(default_factory=dict)
    controller_messages: int = 0
    failover_controller_messages: int = 0
    reconfigurations: int = 0
    status_updates: int = 0

    @property
    def mean_delivery_delay(self) -> float:
        return self.total_delay_ms / self.delivered if self.delivered else 0.0

    @property
    def total_energy(self) -> float:
        return sum(self.energy.values())

    def conserved(self) -> bool:
        return self.injected == self.delivered + self.dropped_policy + self.dropped_loss + self.in_flight

    def counters(self) -> Dict[str, int]:
        return {
            "injected": self.injected,
            "delivered": self.delivered,
            "dropped_policy": self.dropped_policy,
            "dropped_loss": self.dropped_loss,
            "in_flight": self.in_flight,
        }


@dataclass
class SimTrace:
    """Line-per-event log plus conservation checkpoints"""
    lines: List[str] = field(default_factory=list)
    checkpoints: List[dict] = field(default_factory=list)

    def record(self, time_us: int, seq: int, kind: str, **fields) -> None:
        detail = " ".join(f"{k}={v}" for k, v in fields.items())
        self.lines.append(f"{time_us:012d} {seq:08d} {kind} {detail}".rstrip())

    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def __len__(self) -> int:
        return len(self.lines)
