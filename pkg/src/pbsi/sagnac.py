"""Rotation-induced phase in a Sagnac loop and the resulting rate sensitivity."""

from __future__ import annotations

import math
from dataclasses import dataclass

from pbsi.errors import DomainError, UsageError
from pbsi.interferometer import PhaseSetting

SPEED_OF_LIGHT = 299_792_458.0  # m/s
EARTH_ROTATION_RATE = 7.292e-5  # rad/s

#: Classical resolution limit of a plain Sagnac interferometer, in radians.
CLASSICAL_RESOLUTION = math.pi / 2


@dataclass(frozen=True)
class SagnacGeometry:
    """Loop area (m^2), optical wavelength (m) and rotation rate (rad/s).

    Positive ``rotation_rate`` is counter-clockwise and yields a positive
    phase difference ``phi_ccw - phi_cw``.
    """

    area: float
    wavelength: float
    rotation_rate: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.area) and self.area > 0):
            raise DomainError(f"area must be positive, got {self.area!r}")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise DomainError(f"wavelength must be positive, got {self.wavelength!r}")
        if not math.isfinite(self.rotation_rate):
            raise DomainError("rotation_rate must be finite")

    @property
    def light_speed(self) -> float:
        return SPEED_OF_LIGHT


def sagnac_time_delay(g: SagnacGeometry) -> float:
    """``4 A Omega / c**2`` in seconds."""
    return 4.0 * g.area * g.rotation_rate / SPEED_OF_LIGHT**2


def sagnac_phase(g: SagnacGeometry) -> float:
    """Counter-propagating phase difference ``8 pi A Omega / (c lambda)``.

    This is ``2 phi``; the per-arm phase is half of it.
    """
    return 8.0 * math.pi * g.area * g.rotation_rate / (SPEED_OF_LIGHT * g.wavelength)


def per_arm_phase(g: SagnacGeometry) -> float:
    return 0.5 * sagnac_phase(g)


def antiphase_setting(g: SagnacGeometry, bias: float = 0.0) -> PhaseSetting:
    """Antiphase setting driven by rotation, plus a fixed preset ``bias`` on phi."""
    return PhaseSetting.antiphase(per_arm_phase(g) + bias)


def min_detectable_rotation(g: SagnacGeometry, phase_resolution: float) -> float:
    """Rotation rate whose Sagnac phase equals ``phase_resolution``.

    ``g.rotation_rate`` is ignored.
    """
    if not (math.isfinite(phase_resolution) and phase_resolution > 0):
        raise DomainError(f"phase_resolution must be positive, got {phase_resolution!r}")
    return phase_resolution * SPEED_OF_LIGHT * g.wavelength / (8.0 * math.pi * g.area)


def pbsi_resolution(classical_resolution: float = CLASSICAL_RESOLUTION, effective_order: int = 1) -> float:
    """Cavity-enhanced resolution ``classical / (2 n)``."""
    if int(effective_order) != effective_order or effective_order < 1:
        raise UsageError(f"effective_order must be a positive integer, got {effective_order!r}")
    return classical_resolution / (2 * effective_order)
