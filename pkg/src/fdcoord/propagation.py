"""Path-loss and power arithmetic.

Inter-user (UE-UE) path loss follows a two-regime model in distance ``d`` (km)
and carrier ``f`` (MHz):

    d <  0.05 km:  32.45 + 20 log10(d) + 20 log10(f)        (free-space form)
    d >= 0.05 km:  38.32 log10(d) + 21 log10(f) + 61.6

The boundary distance uses the far model. The ~8.6 dB discontinuity between
the regimes at 50 m is intentional and not smoothed.

The effective inter-user attenuation between two positions is
``max(alpha, p)`` where ``p`` is the model loss and ``alpha`` is the largest
isolation floor of any region pair that separates the two positions (when no
pair separates them, only ``p`` applies). Noise and interference always
combine in linear power; everything else stays in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .geometry import Position

if TYPE_CHECKING:  # pragma: no cover
    from .regions import IsolationDatabase

UE_UE_BREAKPOINT_KM = 0.05

SOURCE_MODEL = "model"
SOURCE_REGION_FLOOR = "region_floor"


@dataclass(frozen=True)
class LinkBudgetConfig:
    """Powers, noise, and band plan for one cell."""

    noise_floor_dbm: float = -100.0
    ue_tx_power_dbm: float = 20.0
    bs_tx_power_dbm: float = 20.0
    dl_band_mhz: tuple[float, float] = (2100.0, 2180.0)
    ul_band_mhz: tuple[float, float] = (1900.0, 1980.0)
    user_bandwidth_hz: float = 400e3

    def __post_init__(self) -> None:
        for name, band in (("dl_band_mhz", self.dl_band_mhz), ("ul_band_mhz", self.ul_band_mhz)):
            low, high = band
            if not (low > 0 and high > low):
                raise ValueError(f"{name} must be a non-degenerate (low, high) pair, got {band}")
        if self.user_bandwidth_hz <= 0:
            raise ValueError("per-user bandwidth must be positive")

    @property
    def dl_band_center_mhz(self) -> float:
        return 0.5 * (self.dl_band_mhz[0] + self.dl_band_mhz[1])

    @property
    def ul_band_center_mhz(self) -> float:
        return 0.5 * (self.ul_band_mhz[0] + self.ul_band_mhz[1])

    def resources_per_band(self) -> int:
        """Number of per-user resources that fit in one band."""
        width_hz = (self.dl_band_mhz[1] - self.dl_band_mhz[0]) * 1e6
        return int(width_hz // self.user_bandwidth_hz)


@dataclass(frozen=True)
class EffectivePathloss:
    """Effective UE-UE attenuation and which branch of the max() produced it."""

    value_db: float
    source: str  # SOURCE_MODEL or SOURCE_REGION_FLOOR


def ue_ue_pathloss(d_km: float, f_mhz: float) -> float:
    """Two-regime UE-UE path loss in dB; ``d_km`` > 0 and ``f_mhz`` > 0."""
    if d_km <= 0:
        raise ValueError(f"distance must be positive, got {d_km} km")
    if f_mhz <= 0:
        raise ValueError(f"frequency must be positive, got {f_mhz} MHz")
    if d_km < UE_UE_BREAKPOINT_KM:
        return 32.45 + 20.0 * math.log10(d_km) + 20.0 * math.log10(f_mhz)
    return 38.32 * math.log10(d_km) + 21.0 * math.log10(f_mhz) + 61.6


def effective_interuser_pathloss(
    pos_a: Position, pos_b: Position, db: "IsolationDatabase | None", f_mhz: float
) -> EffectivePathloss:
    """max(region floor, model loss) between two user positions.

    The region floor applies only when some pair in ``db`` has the two
    positions on opposite sides (either orientation); with several such pairs
    the largest floor wins. Ties between floor and model report the floor.
    """
    model_db = ue_ue_pathloss(pos_a.distance_to(pos_b) / 1000.0, f_mhz)
    floor_db = db.alpha_floor(pos_a, pos_b) if db is not None else None
    if floor_db is not None and floor_db >= model_db:
        return EffectivePathloss(floor_db, SOURCE_REGION_FLOOR)
    return EffectivePathloss(model_db, SOURCE_MODEL)


def interference_power_dbm(
    tx_power_dbm: float,
    tx_pos: Position,
    victim_pos: Position,
    db: "IsolationDatabase | None",
    f_mhz: float,
) -> float:
    """Received co-channel power at the victim from the transmitting user."""
    eff = effective_interuser_pathloss(tx_pos, victim_pos, db, f_mhz)
    return tx_power_dbm - eff.value_db


def power_sum_dbm(*levels_dbm: float) -> float:
    """Sum power levels in the linear domain, result back in dBm."""
    total_mw = sum(10.0 ** (level / 10.0) for level in levels_dbm)
    return 10.0 * math.log10(total_mw)


def sinr_db(s_dbm: float, noise_dbm: float, interference_dbm: float | None = None) -> float:
    if interference_dbm is None:
        return s_dbm - noise_dbm
    return s_dbm - power_sum_dbm(noise_dbm, interference_dbm)


def shannon_rate_density(sinr: float) -> float:
    """Shannon spectral efficiency log2(1 + SINR_linear) in bits/s/Hz."""
    return math.log2(1.0 + 10.0 ** (sinr / 10.0))


def sinr_and_rate(
    s_dbm: float, noise_dbm: float, interference_dbm: float | None = None
) -> tuple[float, float]:
    """(SINR in dB, Shannon rate density in bits/s/Hz) for one link."""
    sinr = sinr_db(s_dbm, noise_dbm, interference_dbm)
    return sinr, shannon_rate_density(sinr)
