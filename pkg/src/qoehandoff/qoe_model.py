"""Delay/loss to MOS mapping and MOS quantization into discrete QoE states.

The MOS computation follows the standard parametric voice-quality chain:
an R-factor starting at R0 is reduced by a delay impairment (piecewise
linear with a knee at 177.3 ms one-way delay) and an effective equipment
impairment that grows with packet loss, then mapped to MOS through the
usual cubic and clamped to [1, 5].
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .errors import DomainError

R0 = 93.2
DELAY_KNEE_S = 0.1773
MOS_MIN = 1.0
MOS_MAX = 5.0


@dataclass(frozen=True)
class CodecProfile:
    """Voice codec constants: equipment impairment, loss robustness and the
    probe-lateness cutoff beyond which a sample counts as lost."""

    name: str
    equipment_impairment: float  # Ie
    loss_robustness: float       # bpl, loss fraction at which Ie_eff halves its headroom
    late_threshold_s: float

    def __post_init__(self):
        if self.equipment_impairment < 0:
            raise DomainError("equipment_impairment must be >= 0")
        if self.late_threshold_s <= 0:
            raise DomainError("late_threshold_s must be > 0")


G711 = CodecProfile(name="G711", equipment_impairment=0.0, loss_robustness=0.25,
                    late_threshold_s=0.650)
G729 = CodecProfile(name="G729", equipment_impairment=11.0, loss_robustness=0.19,
                    late_threshold_s=0.650)

CODECS = {"g711": G711, "g729": G729}


@dataclass(frozen=True)
class QuantizationScheme:
    """Ascending MOS cut points splitting [1, 5] into half-open state bands.

    State k covers [b_{k-1}, b_k); a MOS equal to a boundary belongs to the
    upper band. State 1 is the worst band.
    """

    boundaries: tuple[float, ...]

    def __post_init__(self):
        bs = tuple(float(b) for b in self.boundaries)
        object.__setattr__(self, "boundaries", bs)
        if self.state_count not in (2, 3, 5):
            raise DomainError(f"unsupported state count {self.state_count}")
        if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
            raise DomainError("boundaries must be strictly ascending")
        if bs and (bs[0] <= MOS_MIN or bs[-1] >= MOS_MAX):
            raise DomainError("boundaries must lie strictly inside (1, 5)")

    @property
    def state_count(self) -> int:
        return len(self.boundaries) + 1


# 3-state congestion bands: MOS < 2, [2, 3), >= 3.
CONGESTION_SCHEME = QuantizationScheme((2.0, 3.0))
# 3-state roaming bands: MOS < 2, [2, 4), >= 4.
ROAMING_SCHEME = QuantizationScheme((2.0, 4.0))


def mos_from_delay(owd_s: float, loss_fraction: float, codec: CodecProfile) -> float:
    """MOS for a one-way delay (seconds) and loss fraction under the codec.

    Deterministic and monotone non-increasing in both impairments.
    """
    if owd_s < 0:
        raise DomainError("one-way delay must be >= 0")
    if not 0.0 <= loss_fraction <= 1.0:
        raise DomainError("loss fraction must be in [0, 1]")
    d_ms = owd_s * 1000.0
    delay_impairment = 0.024 * d_ms
    if owd_s > DELAY_KNEE_S:
        delay_impairment += 0.11 * (d_ms - DELAY_KNEE_S * 1000.0)
    ie = codec.equipment_impairment
    loss_impairment = ie + (95.0 - ie) * loss_fraction / (loss_fraction + codec.loss_robustness)
    r = R0 - delay_impairment - loss_impairment
    return mos_from_r(r)


def mos_from_r(r: float) -> float:
    """Cubic R-factor to MOS map, with R clamped to [0, 100] and MOS to [1, 5]."""
    r = min(max(r, 0.0), 100.0)
    mos = 1.0 + 0.035 * r + 7e-6 * r * (r - 60.0) * (100.0 - r)
    return min(max(mos, MOS_MIN), MOS_MAX)


def quantize_mos(mos: float, scheme: QuantizationScheme) -> int:
    """1-based QoE state index of the band containing `mos`."""
    mos = min(max(mos, MOS_MIN), MOS_MAX)
    return bisect.bisect_right(scheme.boundaries, mos) + 1
