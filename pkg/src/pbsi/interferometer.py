"""Mach-Zehnder block D and the cross-coupled double MZI.

Block D is ``[BS][Theta][BS]`` with ``Theta = diag(e^{i psi}, e^{i phi})``.
The second block D' swaps the phase placement,
``theta' = diag(e^{i phi}, e^{i psi})``, and the CCD-MZI is D followed by D'.

Each model is available twice: as a transcribed closed form (used for
outputs and sweeps) and as an explicit product of splitter and phase
stages (used as the cross-check).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from pbsi.errors import DomainError, UsageError
from pbsi.optics_core import (
    UNIT_INPUT,
    TransferMatrix,
    TwoPortField,
    apply,
    beam_splitter,
    compose,
    phase_stage,
)
from pbsi.tables import SweepGrid, SweepTable


class Mode(enum.Enum):
    INDEPENDENT = "independent"
    ANTIPHASE = "antiphase"
    PSI_ZERO = "psi-zero"


class System(enum.Enum):
    BLOCK_D = "block-d"
    CCD = "ccd"


@dataclass(frozen=True)
class PhaseSetting:
    """Phase pair ``(phi, psi)`` in radians, with its coupling mode.

    Use :meth:`antiphase` and :meth:`psi_zero` to build constrained
    settings; the constructor rejects a ``psi`` that breaks the mode.
    """

    phi: float
    psi: float = 0.0
    mode: Mode = Mode.INDEPENDENT

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.psi)):
            raise DomainError("phases must be finite")
        if self.mode is Mode.ANTIPHASE and self.psi != -self.phi:
            raise DomainError(f"antiphase mode needs psi == -phi, got phi={self.phi}, psi={self.psi}")
        if self.mode is Mode.PSI_ZERO and self.psi != 0.0:
            raise DomainError(f"psi-zero mode needs psi == 0, got {self.psi}")

    @classmethod
    def antiphase(cls, phi: float) -> PhaseSetting:
        return cls(phi, -phi, Mode.ANTIPHASE)

    @classmethod
    def psi_zero(cls, phi: float) -> PhaseSetting:
        return cls(phi, 0.0, Mode.PSI_ZERO)

    @classmethod
    def independent(cls, phi: float, psi: float) -> PhaseSetting:
        return cls(phi, psi, Mode.INDEPENDENT)


@dataclass(frozen=True)
class BlockOutput:
    field: TwoPortField
    i_upper: float
    i_lower: float


def _output(m: TransferMatrix, field: TwoPortField) -> BlockOutput:
    out = apply(m, field)
    return BlockOutput(out, out.i_upper, out.i_lower)


# -- block D ---------------------------------------------------------------


def block_d_matrix(p: PhaseSetting) -> TransferMatrix:
    """Closed-form block-D matrix.

    ``(1/2) e^{i psi} [[1 - w, i(1 + w)], [i(1 + w), -(1 - w)]]`` with
    ``w = e^{i(phi - psi)}``.
    """
    w = cmath.exp(1j * (p.phi - p.psi))
    pre = 0.5 * cmath.exp(1j * p.psi)
    return TransferMatrix(
        [[pre * (1 - w), pre * 1j * (1 + w)], [pre * 1j * (1 + w), -pre * (1 - w)]]
    )


def block_d_stage_product(p: PhaseSetting) -> TransferMatrix:
    bs = beam_splitter()
    return compose([bs, phase_stage(p.psi, p.phi), bs])


def block_d_output(p: PhaseSetting, input: TwoPortField = UNIT_INPUT) -> BlockOutput:
    """Fields ``(alpha, beta)`` leaving block D for an arbitrary input."""
    return _output(block_d_matrix(p), input)


def block_d_intensity_curves(phi, psi):
    """Vectorised ``(I_alpha, I_beta)`` for unit upper-port input."""
    half = 0.5 * (np.asarray(phi, dtype=float) - np.asarray(psi, dtype=float))
    return np.sin(half) ** 2, np.cos(half) ** 2


def block_d_intensities(p: PhaseSetting) -> tuple[float, float]:
    """``I_alpha = sin^2((phi-psi)/2)``, ``I_beta = cos^2((phi-psi)/2)`` in units of I0."""
    i_a, i_b = block_d_intensity_curves(p.phi, p.psi)
    return float(i_a), float(i_b)


# -- cross-coupled double MZI ----------------------------------------------


def ccd_matrix(p: PhaseSetting) -> TransferMatrix:
    """Closed-form CCD-MZI matrix ``e^{i(phi+psi)} R(phi - psi)``.

    ``R(x) = [[cos x, sin x], [-sin x, cos x]]``. The explicit stage product
    (:func:`ccd_stage_product`) equals ``-1`` times this matrix; the sign is
    a global phase of pi and leaves every intensity unchanged.
    """
    d = p.phi - p.psi
    c, s = math.cos(d), math.sin(d)
    pre = cmath.exp(1j * (p.phi + p.psi))
    return TransferMatrix([[pre * c, pre * s], [-pre * s, pre * c]])


def ccd_stage_product(p: PhaseSetting) -> TransferMatrix:
    bs = beam_splitter()
    return compose(
        [bs, phase_stage(p.psi, p.phi), bs, bs, phase_stage(p.phi, p.psi), bs]
    )


def ccd_output(p: PhaseSetting, input: TwoPortField = UNIT_INPUT) -> BlockOutput:
    """Fields ``(A, B)`` leaving the CCD-MZI for an arbitrary input."""
    return _output(ccd_matrix(p), input)


def ccd_intensity_curves(phi, psi):
    """Vectorised ``(I_A, I_B) = (cos^2(phi-psi), sin^2(phi-psi))``."""
    d = np.asarray(phi, dtype=float) - np.asarray(psi, dtype=float)
    return np.cos(d) ** 2, np.sin(d) ** 2


def ccd_intensities(p: PhaseSetting) -> tuple[float, float]:
    i_a, i_b = ccd_intensity_curves(p.phi, p.psi)
    return float(i_a), float(i_b)


# -- anticorrelation -------------------------------------------------------


def g2_metric(i_upper, i_lower):
    """Two-port anticorrelation metric ``I_upper * I_lower / I0**2``.

    Zero wherever all light leaves through one port; at most 1/4 for a
    lossless block with unit input. Accepts scalars or arrays.
    """
    iu = np.asarray(i_upper, dtype=float)
    il = np.asarray(i_lower, dtype=float)
    if np.any(iu < 0) or np.any(il < 0):
        raise DomainError("intensities must be non-negative")
    g2 = iu * il
    return float(g2) if g2.ndim == 0 else g2


# -- sweeps ----------------------------------------------------------------

_CURVES = {System.BLOCK_D: block_d_intensity_curves, System.CCD: ccd_intensity_curves}


def _psi_for(mode: Mode, phi: np.ndarray, psi: float) -> np.ndarray:
    if mode is Mode.ANTIPHASE:
        return -phi
    if mode is Mode.PSI_ZERO:
        return np.zeros_like(phi)
    if not math.isfinite(psi):
        raise UsageError("a finite psi is required in independent mode")
    return np.full_like(phi, psi)


def sweep_1d(system: System, mode: Mode, grid: SweepGrid, psi: float = 0.0) -> SweepTable:
    """Tabulate ``phi, i_a, i_b, g2`` over ``grid``.

    ``i_a``/``i_b`` are the upper/lower output ports of the chosen system
    (alpha/beta for block D, A/B for the CCD-MZI). ``psi`` is only read in
    independent mode.
    """
    system, mode = System(system), Mode(mode)
    phi = grid.values()
    i_a, i_b = _CURVES[system](phi, _psi_for(mode, phi, psi))
    return SweepTable.from_columns(
        meta={"system": system.value, "mode": mode.value},
        phi=phi,
        i_a=i_a,
        i_b=i_b,
        g2=g2_metric(i_a, i_b),
    )


def sweep_2d(system: System, phi_grid: SweepGrid, psi_grid: SweepGrid) -> np.ndarray:
    """Upper-port intensity on the ``(phi, psi)`` plane.

    Row ``i`` is ``phi_grid.values()[i]`` and column ``j`` is
    ``psi_grid.values()[j]``.
    """
    phi, psi = np.meshgrid(phi_grid.values(), psi_grid.values(), indexing="ij")
    i_upper, _ = _CURVES[System(system)](phi, psi)
    return i_upper
