"""Fringe metrology on sweep tables.

Phase resolution is measured as the full width at half maximum of the
principal peak; the classical reference width is pi/2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from pbsi.errors import UnresolvedError, UsageError
from pbsi.tables import SweepTable

CLASSICAL_RESOLUTION = math.pi / 2

#: Minimum normalised autocorrelation accepted as a repeat of the signal.
PERIOD_MIN_CORRELATION = 0.5

#: Grid spacing must be at most this fraction of the measured FWHM.
ADEQUATE_FRACTION = 0.1


@dataclass(frozen=True)
class Peak:
    phi: float
    height: float
    index: int


@dataclass(frozen=True)
class FringeReport:
    peaks: list[tuple[float, float]]
    fwhm: float | None
    period: float | None
    enhancement: float | None
    lambda_b_ratio: float | None
    grid_adequate: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["peaks"] = [{"phi": p, "height": h} for p, h in self.peaks]
        return d


def _check_xy(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if phi.size == 0 or y.size == 0:
        raise UsageError("empty table")
    if phi.shape != y.shape or phi.ndim != 1:
        raise UsageError("phi and values must be 1-D arrays of equal length")
    if phi.size > 1 and np.any(np.diff(phi) <= 0):
        raise UsageError("phi must be strictly increasing")
    return phi, y


def _parabola_vertex(x0, x1, x2, y0, y1, y2):
    d0 = (y1 - y0) / (x1 - x0)
    d1 = (y2 - y1) / (x2 - x1)
    a = (d1 - d0) / (x2 - x0)
    if a == 0.0:
        return x1, y1
    b = d0 - a * (x0 + x1)
    xv = -b / (2 * a)
    # stay inside the bracketing interval
    xv = min(max(xv, x0), x2)
    return xv, y1 + (xv - x1) * (d0 + a * (xv - x0))  # Newton form evaluated at xv


def find_peaks(phi, y, min_height: float) -> list[Peak]:
    """Interior local maxima at or above ``min_height``, refined by a parabola.

    A point is a peak when it exceeds its left neighbour and is not below
    its right neighbour, so a flat plateau yields no peak.
    """
    phi, y = _check_xy(phi, y)
    if not min_height > 0:
        raise UsageError("min_height must be positive")
    if y.size < 3:
        return []
    mid = y[1:-1]
    idx = np.nonzero((mid > y[:-2]) & (mid >= y[2:]) & (mid >= min_height))[0] + 1
    peaks = []
    for i in idx:
        x, h = _parabola_vertex(phi[i - 1], phi[i], phi[i + 1], y[i - 1], y[i], y[i + 1])
        peaks.append(Peak(float(x), float(max(h, y[i])), int(i)))
    return peaks


def _crossing(phi, y, i, j, level):
    # linear interpolation between samples i and j
    return phi[i] + (level - y[i]) * (phi[j] - phi[i]) / (y[j] - y[i])


def fwhm(phi, y, peak: Peak, baseline: float = 0.0) -> float:
    """Full width at half the peak height above ``baseline``."""
    phi, y = _check_xy(phi, y)
    half = baseline + 0.5 * (peak.height - baseline)
    i = peak.index
    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i + 1 :] < half)[0]
    if left.size == 0 or right.size == 0:
        raise UnresolvedError(
            f"half-maximum crossing of the peak at phi={peak.phi:.6g} lies outside the table"
        )
    j = left[-1]
    k = i + 1 + right[0]
    return float(_crossing(phi, y, k - 1, k, half) - _crossing(phi, y, j, j + 1, half))


def _uniform_spacing(phi):
    d = np.diff(phi)
    h = (phi[-1] - phi[0]) / (phi.size - 1)
    if np.max(np.abs(d - h)) > 1e-9 * abs(h):
        raise UsageError("period estimation needs a uniform grid")
    return h


def normalized_autocorrelation(y) -> np.ndarray:
    """Pearson correlation between ``y[:n-k]`` and ``y[k:]`` for each lag ``k``.

    Lags run from 0 to ``n // 2``.
    """
    y = np.asarray(y, dtype=float)
    y = y - y.mean()
    n = y.size
    kmax = n // 2
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(y, nfft)
    sxy = np.fft.irfft(spec * spec.conj(), nfft)[: kmax + 1]
    cs = np.concatenate(([0.0], np.cumsum(y)))
    cs2 = np.concatenate(([0.0], np.cumsum(y * y)))
    k = np.arange(kmax + 1)
    m = n - k
    sx, sy = cs[m], cs[n] - cs[k]
    sxx, syy = cs2[m], cs2[n] - cs2[k]
    cov = sxy / m - (sx / m) * (sy / m)
    varx = sxx / m - (sx / m) ** 2
    vary = syy / m - (sy / m) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = cov / np.sqrt(varx * vary)
    return np.nan_to_num(rho, nan=0.0)


def modulation_period(phi, y) -> float | None:
    """Dominant period from the first autocorrelation maximum.

    Returns None for a flat signal. Raises :class:`UnresolvedError` when the
    table does not contain a repeat within half its span.
    """
    phi, y = _check_xy(phi, y)
    if y.size < 4:
        raise UnresolvedError("too few samples to estimate a period")
    if np.std(y) <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        return None
    h = _uniform_spacing(phi)
    rho = normalized_autocorrelation(y)
    for k in range(2, rho.size - 1):
        if rho[k] > rho[k - 1] and rho[k] >= rho[k + 1] and rho[k] > PERIOD_MIN_CORRELATION:
            lag, _ = _parabola_vertex(k - 1, k, k + 1, rho[k - 1], rho[k], rho[k + 1])
            return float(lag * h)
    raise UnresolvedError("no repeat found within half the table span")


def enhancement_report(table: SweepTable, column: str = "i_a", baseline: float = 0.0) -> FringeReport:
    """Peaks, width, period and resolution enhancement of one sweep column.

    Peaks of at least half the column maximum are reported; the tallest is
    the principal peak. The period is taken from ``g2`` when the table has
    that column, otherwise from ``column``; it is None when flat or when the
    table is too short to show a repeat.
    """
    phi, y = table.x, table[column]
    top = float(np.max(y))
    peaks = find_peaks(phi, y, 0.5 * top) if top > 0 else []

    width = None
    if peaks:
        principal = max(peaks, key=lambda p: p.height)
        width = fwhm(phi, y, principal, baseline)

    period_source = table["g2"] if "g2" in table else y
    try:
        period = modulation_period(phi, period_source)
    except UnresolvedError:
        period = None

    spacing = float(phi[-1] - phi[0]) / (len(phi) - 1) if len(phi) > 1 else math.inf
    return FringeReport(
        peaks=[(p.phi, p.height) for p in peaks],
        fwhm=width,
        period=period,
        enhancement=CLASSICAL_RESOLUTION / width if width else None,
        lambda_b_ratio=2 * math.pi / period if period else None,
        grid_adequate=bool(width is not None and spacing <= ADEQUATE_FRACTION * width),
    )
