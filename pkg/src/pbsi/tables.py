"""Sweep grids and the column tables produced by sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pbsi.errors import UsageError


@dataclass(frozen=True)
class SweepGrid:
    """Uniform phase grid ``start..end`` (inclusive) with ``steps`` points."""

    start: float
    end: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise UsageError("grid bounds must be finite")
        if int(self.steps) != self.steps or self.steps < 2:
            raise UsageError(f"grid needs at least 2 points, got {self.steps}")
        if self.end <= self.start:
            raise UsageError(f"grid end ({self.end}) must exceed start ({self.start})")

    @property
    def spacing(self) -> float:
        return (self.end - self.start) / (self.steps - 1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.end, int(self.steps))


@dataclass
class SweepTable:
    """Named float columns of equal length, plus free-form metadata.

    The first column is the independent variable (usually ``phi``).
    """

    columns: tuple[str, ...]
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise UsageError(
                f"table data shape {self.data.shape} does not match columns {self.columns}"
            )

    @classmethod
    def from_columns(cls, meta: dict | None = None, **cols) -> SweepTable:
        names = tuple(cols)
        data = np.column_stack([np.asarray(cols[n], dtype=float) for n in names])
        return cls(names, data, dict(meta or {}))

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    @property
    def x(self) -> np.ndarray:
        return self.data[:, 0]
