"""Exit criteria, one test per criterion; see the terminal summary for the PASS/FAIL list."""

import csv
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special

from pbsi import cavity
from pbsi.analysis import find_peaks, modulation_period
from pbsi.cavity import CavityParams, amplitude_sum, amplitude_sum_curves, ordered_field_curves, roundtrip_oracle
from pbsi.cli import main
from pbsi.interferometer import (
    Mode,
    PhaseSetting,
    System,
    block_d_intensities,
    block_d_intensity_curves,
    block_d_matrix,
    block_d_output,
    block_d_stage_product,
    ccd_intensity_curves,
    ccd_matrix,
    ccd_output,
    ccd_stage_product,
    g2_metric,
    sweep_1d,
)
from pbsi.sagnac import (
    SPEED_OF_LIGHT,
    SagnacGeometry,
    min_detectable_rotation,
    sagnac_phase,
    sagnac_time_delay,
)
from pbsi.tables import SweepGrid

PI = math.pi
criterion = pytest.mark.criterion


@pytest.fixture(scope="module")
def fig4_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig4")
    t0 = time.perf_counter()
    status = main(["fig4", "--out-dir", str(out)])
    elapsed = time.perf_counter() - t0
    summary = json.loads((out / "fig4.json").read_text())
    return status, elapsed, out, summary["results"]


def _read(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    return {name: data[:, i] for i, name in enumerate(rows[0])}


@criterion("1", "closed forms match matrix products (1e-12) and round-trip oracle (1e-10), < 10 s")
def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20200218)
    worst_d = worst_ccd = 0.0
    for phi, psi in rng.uniform(-2 * PI, 2 * PI, size=(1000, 2)):
        p = PhaseSetting.independent(phi, psi)
        worst_d = max(worst_d, np.max(np.abs(block_d_matrix(p).array - block_d_stage_product(p).array)))
        # the stage product carries an extra global phase e^{i pi}
        worst_ccd = max(worst_ccd, np.max(np.abs(ccd_matrix(p).array + ccd_stage_product(p).array)))
    assert worst_d < 1e-12 and worst_ccd < 1e-12

    phis = rng.uniform(-PI, PI, 100)
    for r in (0.5, 0.9, 0.999):
        p = CavityParams(r)
        oracle = roundtrip_oracle(phis, p, n_orders=5000)
        for n in range(1, 5001):
            e_a, e_b = ordered_field_curves(n, phis, p)
            assert np.max(np.abs(oracle[n - 1, 0] - e_a)) < 1e-10
            assert np.max(np.abs(oracle[n - 1, 1] - e_b)) < 1e-10
    assert time.perf_counter() - t0 < 10.0


@criterion("2", "energy conservation I_alpha+I_beta = I_A+I_B = I0 within 1e-12 (>= 1e4 samples)")
def test_criterion_2_energy_conservation():
    rng = np.random.default_rng(2)
    phi, psi = rng.uniform(-2 * PI, 2 * PI, size=(2, 10_000))
    for curves in (block_d_intensity_curves, ccd_intensity_curves):
        up, low = curves(phi, psi)
        assert np.max(np.abs(up + low - 1.0)) < 1e-12
    for a, b in zip(phi, psi):
        p = PhaseSetting.independent(a, b)
        for out in (block_d_output(p), ccd_output(p)):
            assert abs(out.i_upper + out.i_lower - 1.0) < 1e-12


@criterion("3", "antiphase periods: block-D I = pi, CCD I = pi/2, CCD g2 = pi/4 (1e-3 rad)")
def test_criterion_3_period_laws():
    grid = SweepGrid(-2 * PI, 2 * PI, 4001)
    blk = sweep_1d(System.BLOCK_D, Mode.ANTIPHASE, grid)
    ccd = sweep_1d(System.CCD, Mode.ANTIPHASE, grid)
    assert modulation_period(blk.x, blk["i_a"]) == pytest.approx(PI, abs=1e-3)
    assert modulation_period(ccd.x, ccd["i_a"]) == pytest.approx(PI / 2, abs=1e-3)
    assert modulation_period(ccd.x, ccd["g2"]) == pytest.approx(PI / 4, abs=1e-3)


@criterion("4", "block-D antiphase g2(m pi/2) < 1e-24 for m in -4..4")
def test_criterion_4_anticorrelation_zeros():
    for m in range(-4, 5):
        assert g2_metric(*block_d_intensities(PhaseSetting.antiphase(m * PI / 2))) < 1e-24


@criterion("5", "converged I_A(pi/2) = (1+r)^2 I0 (1e-6 rel); in [3.99, 4.00] at r=0.999; I_B < 1e-20")
def test_criterion_5_cavity_peak_law():
    for r in (0.0, 0.5, 0.9, 0.999):
        out = amplitude_sum(PI / 2, CavityParams(r, max_order=100_000, epsilon=1e-12))
        assert out.i_upper == pytest.approx((1 + r) ** 2, rel=1e-6)
        assert out.i_lower < 1e-20
        if r == 0.999:
            assert 3.99 <= out.i_upper <= 4.00


@criterion("6a", "fig4 preset < 60 s; r=0.999 n=5000: FWHM in [1e-4, 1e-3], enhancement in [10^2.5, 10^3.5]")
def test_criterion_6_paper_scale(fig4_run):
    status, elapsed, _, results = fig4_run
    assert status == 0 and elapsed < 60.0
    rep = results["f"]["report"]
    assert 1e-4 <= rep["fwhm"] <= 1e-3
    assert 10**2.5 <= rep["enhancement"] <= 10**3.5


@criterion("6b", "r=0.9 n=50 variant: FWHM in [1e-2, 1e-1]")
def test_criterion_6_r09_width(fig4_run):
    rep = fig4_run[3]["h"]["report"]
    assert 1e-2 <= rep["fwhm"] <= 1e-1


@criterion("6c", "r=0.9 n=50 variant: peak = 3.61 I0 within 1%")
def test_criterion_6_r09_peak(fig4_run):
    assert fig4_run[3]["h"]["peak_intensity"] == pytest.approx(3.61, rel=0.01)


@criterion("7", "r=0.999: exactly two I_B maxima within +-3 FWHM of pi/2, each > 0.8 I0")
def test_criterion_7_sidebands(fig4_run):
    _, _, out, results = fig4_run
    table = _read(out / "fig4f.csv")
    width = results["f"]["report"]["fwhm"]
    phi, i_b = table["phi"], table["i_b"]
    near = [p for p in find_peaks(phi, i_b, 1e-12) if abs(p.phi - PI / 2) <= 3 * width]
    assert len(near) == 2
    assert all(p.height > 0.8 for p in near)
    assert near[0].phi < PI / 2 < near[1].phi


@criterion("8", "(1/pi) integral of (I_A + I_B) over [0, pi] = (1-r^2)(1-r^(2 N_eff)) I0 (1e-6 rel)")
def test_criterion_8_mean_energy():
    for r in (0.5, 0.9, 0.999):
        p = CavityParams(r)
        n_eff = cavity.effective_order(p)
        expected = (1 - r * r) * (1 - r ** (2 * n_eff))

        def total(phi):
            e_a, e_b = amplitude_sum_curves(phi, p)
            return np.abs(e_a) ** 2 + np.abs(e_b) ** 2

        # trapezoid on a periodic trig polynomial: exact once points exceed its degree
        x = np.linspace(0, PI, 4 * n_eff + 1)
        trap = integrate.trapezoid(total(x), x) / PI
        # Gauss-Legendre as an unrelated rule
        nodes, weights = special.roots_legendre(2 * n_eff + 64)
        gauss = 0.5 * PI * np.dot(weights, total(0.5 * PI * (nodes + 1))) / PI
        assert trap == pytest.approx(expected, rel=1e-6)
        assert gauss == pytest.approx(expected, rel=1e-6)


@criterion("9", "Sagnac: delta_t and delta_phi within 1%; delta_phi = 2 pi c delta_t / lambda (1e-12); exact inversion")
def test_criterion_9_sagnac():
    g = SagnacGeometry(1.0, 633e-9, 7.292e-5)
    assert sagnac_time_delay(g) == pytest.approx(3.245e-21, rel=0.01)
    assert sagnac_phase(g) == pytest.approx(9.66e-6, rel=0.01)
    assert sagnac_phase(g) == pytest.approx(
        2 * PI * SPEED_OF_LIGHT * sagnac_time_delay(g) / g.wavelength, rel=1e-12
    )
    assert min_detectable_rotation(g, sagnac_phase(g)) == pytest.approx(g.rotation_rate, rel=1e-12)


@criterion("10", "fig2/fig3/fig4 reruns byte-identical; analyze round-trips sweep-cavity")
def test_criterion_10_cli_determinism(tmp_path, fig4_run):
    first, second = tmp_path / "a", tmp_path / "b"
    for cmd in ("fig2", "fig3"):
        assert main([cmd, "--out-dir", str(first)]) == 0
        assert main([cmd, "--out-dir", str(second)]) == 0
    assert main(["fig4", "--out-dir", str(second)]) == 0
    first_fig4 = fig4_run[2]
    files = sorted(p.name for p in second.iterdir())
    assert files
    for name in files:
        ref = (first_fig4 if name.startswith("fig4") else first) / name
        assert ref.read_bytes() == (second / name).read_bytes(), name

    assert main(["sweep-cavity", "--start", "1.566", "--end", "1.5756", "--steps", "4001", "--out-dir", str(tmp_path)]) == 0
    embedded = json.loads((tmp_path / "sweep-cavity.json").read_text())["results"]["report"]
    assert embedded is not None
    assert main(["analyze", "--input", str(tmp_path / "sweep-cavity.csv"), "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "analyze.json").read_text())["results"]["report"] == embedded
