"""2x2 transfer-matrix algebra for two-port optics.

Conventions
-----------
Fields are column vectors ``(upper, lower)``. A matrix acts on a field by
left multiplication, so an optical train whose elements are met in the
order ``S1, S2, ..., Sk`` has total matrix ``Sk @ ... @ S2 @ S1``.

:func:`compose` takes stages in *physical* (propagation) order and does the
reversal internally, so ``compose([bs, theta, bs])`` is the usual
``[BS][Theta][BS]`` product. The identity

    apply(compose([m1, m2]), f) == apply(m2, apply(m1, f))

holds exactly for every pair of stages.

Amplitudes are normalised to ``E0 = 1`` and intensities are reported in
units of ``I0 = |E0|**2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pbsi.errors import DomainError, UsageError

#: Absolute tolerance for unitarity and equality checks.
TOL = 1e-12

_SQRT_HALF = 1.0 / math.sqrt(2.0)


def _require_finite(value: complex, name: str) -> None:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class TwoPortField:
    """Complex amplitudes at the upper (``a``) and lower (``b``) ports."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        _require_finite(self.a, "a")
        _require_finite(self.b, "b")

    @property
    def i_upper(self) -> float:
        return abs(self.a) ** 2

    @property
    def i_lower(self) -> float:
        return abs(self.b) ** 2

    @property
    def total_intensity(self) -> float:
        return self.i_upper + self.i_lower

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)


#: Unit field injected into the upper port only.
UNIT_INPUT = TwoPortField(1.0, 0.0)


class TransferMatrix:
    """Immutable 2x2 complex matrix.

    Entries are exposed as ``m00, m01, m10, m11`` (row major) and the
    underlying array through :attr:`array` (read only).
    """

    __slots__ = ("_m",)

    def __init__(self, entries):
        m = np.array(entries, dtype=complex)
        if m.shape != (2, 2):
            raise UsageError(f"transfer matrix must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("transfer matrix entries must be finite")
        m.setflags(write=False)
        self._m = m

    @property
    def array(self) -> np.ndarray:
        return self._m

    m00 = property(lambda self: complex(self._m[0, 0]))
    m01 = property(lambda self: complex(self._m[0, 1]))
    m10 = property(lambda self: complex(self._m[1, 0]))
    m11 = property(lambda self: complex(self._m[1, 1]))

    def __matmul__(self, other: TransferMatrix) -> TransferMatrix:
        if not isinstance(other, TransferMatrix):
            return NotImplemented
        return TransferMatrix(self._m @ other._m)

    def __mul__(self, scalar: complex) -> TransferMatrix:
        return TransferMatrix(self._m * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"TransferMatrix({self._m.tolist()!r})"

    def det(self) -> complex:
        m = self._m
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def dagger(self) -> TransferMatrix:
        return TransferMatrix(self._m.conj().T)

    def is_unitary(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self._m.conj().T @ self._m - np.eye(2))) < tol)

    def allclose(self, other: TransferMatrix, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self._m - other._m)) < tol)


IDENTITY = TransferMatrix(np.eye(2))


def beam_splitter() -> TransferMatrix:
    """Symmetric lossless 50/50 splitter, ``(1/sqrt2) [[1, i], [i, 1]]``."""
    return TransferMatrix([[_SQRT_HALF, 1j * _SQRT_HALF], [1j * _SQRT_HALF, _SQRT_HALF]])


def phase_stage(upper_phase: float, lower_phase: float) -> TransferMatrix:
    """Diagonal phase shifter ``diag(exp(i*upper), exp(i*lower))``.

    The block-D shifter is ``phase_stage(psi, phi)`` and the block-D'
    shifter is ``phase_stage(phi, psi)``.
    """
    for name, value in (("upper_phase", upper_phase), ("lower_phase", lower_phase)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    return TransferMatrix([[cmath.exp(1j * upper_phase), 0.0], [0.0, cmath.exp(1j * lower_phase)]])


def compose(stages: Sequence[TransferMatrix]) -> TransferMatrix:
    """Total matrix of ``stages`` listed in propagation order."""
    if len(stages) == 0:
        raise UsageError("compose needs at least one stage")
    total = stages[0].array
    for stage in stages[1:]:
        total = stage.array @ total
    return TransferMatrix(total)


def apply(m: TransferMatrix, field: TwoPortField) -> TwoPortField:
    out = m.array @ field.as_array()
    return TwoPortField(out[0], out[1])
