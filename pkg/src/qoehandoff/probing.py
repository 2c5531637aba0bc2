"""Passive probe bookkeeping: per-epoch RTT aggregation, lost-probe
imputation, signaling overhead, and the smoothed load metric (EWMA of RTT
plus weighted EWMA of RTT jitter) used by the load-based baseline policy.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import DomainError

THRESHOLD_CLAMP = "threshold_clamp"
CARRY_FORWARD = "carry_forward"


@dataclass(frozen=True)
class ProbeConfig:
    probes_per_second: int = 5
    ba_packet_bytes: int = 24
    late_threshold_s: float = 0.650
    imputation: str = THRESHOLD_CLAMP

    def __post_init__(self):
        if self.probes_per_second < 1:
            raise DomainError("probes_per_second must be >= 1")
        if self.ba_packet_bytes <= 0:
            raise DomainError("ba_packet_bytes must be > 0")
        if self.imputation not in (THRESHOLD_CLAMP, CARRY_FORWARD):
            raise DomainError(f"unknown imputation mode {self.imputation!r}")


@dataclass(frozen=True)
class ProbeRecord:
    epoch_t: int
    interface: int
    rtt_s: float
    imputed: bool = False

    def __post_init__(self):
        if self.rtt_s <= 0:
            raise DomainError("rtt_s must be > 0")


def signaling_overhead_bps(config: ProbeConfig) -> int:
    """Probe signaling load in bits per second (5 probes x 24 bytes = 960 bps)."""
    return config.probes_per_second * config.ba_packet_bytes * 8


def aggregate_epoch(records, config: ProbeConfig,
                    previous_rtt_s: float | None = None) -> tuple[float, bool]:
    """Reduce one epoch's received probes to a single RTT.

    Returns (rtt_s, imputed). With zero received probes the value is imputed:
    the lateness threshold under ``threshold_clamp``, the previous epoch's
    value under ``carry_forward``.
    """
    rtts = [r.rtt_s for r in records]
    if rtts:
        return sum(rtts) / len(rtts), False
    if config.imputation == THRESHOLD_CLAMP:
        return config.late_threshold_s, True
    if previous_rtt_s is None:
        raise DomainError("carry_forward imputation needs a previous epoch value")
    return previous_rtt_s, True


@dataclass
class RnlEstimator:
    """Streaming network-load estimate from an RTT sequence.

    Maintains Z (EWMA of RTT over a window of h samples) and J (EWMA of
    absolute RTT jitter), reporting Z + c*J. J is seeded from the first
    jitter sample, so the jitter term only contributes from the third
    sample onward; before that the estimate is Z alone.
    """

    h: int = 5
    c: float = 5.0
    z: float = 0.0
    j: float = 0.0
    last_rtt: float = 0.0
    count: int = field(default=0)

    def __post_init__(self):
        if self.h < 1:
            raise DomainError("history window h must be >= 1")

    @property
    def initialized(self) -> bool:
        return self.count >= 2

    @property
    def rnl(self) -> float:
        if self.count == 0:
            raise DomainError("no samples yet")
        # The seeded J only enters once it has been smoothed at least once.
        return self.z + self.c * self.j if self.count >= 3 else self.z

    def update(self, rtt_s: float) -> float:
        if rtt_s <= 0:
            raise DomainError("rtt_s must be > 0")
        w = 1.0 / self.h
        if self.count == 0:
            self.z = rtt_s
        else:
            self.z = w * rtt_s + (1.0 - w) * self.z
            d = rtt_s - self.last_rtt
            if self.count == 1:
                # J seeded with the first jitter sample, then immediately
                # folded through the same EWMA, which leaves it unchanged.
                self.j = abs(d)
            else:
                self.j = w * abs(d) + (1.0 - w) * self.j
        self.last_rtt = rtt_s
        self.count += 1
        return self.rnl


def rnl_update(est: RnlEstimator, rtt_s: float) -> tuple[RnlEstimator, float]:
    """Pure-style wrapper: returns an updated copy and the new load value."""
    est = copy.copy(est)
    rnl = est.update(rtt_s)
    return est, rnl
