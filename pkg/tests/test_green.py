import math

import numpy as np
import pytest
import scipy.special

from mtvar.constants import MTParams
from mtvar.errors import DomainError, ExtractionError
from mtvar.green import (GreenTable, bessel_K0, extract_A0,
                         green_weighted_norm, solve_green)

_EULER_GAMMA = 0.5772156649015329
_A0_2_EXACT = (math.log(2.0) - _EULER_GAMMA) / (2.0 * math.pi)


def test_bessel_K0_against_scipy():
    r = np.geomspace(1e-4, 30.0, 400)
    ref = scipy.special.k0(r)
    assert np.max(np.abs(bessel_K0(r) - ref) / ref) <= 1e-12


def test_A0_closed_form_N2(green2):
    assert abs(green2.A0 - _A0_2_EXACT) <= 1e-4


def test_pointwise_N2(green2):
    r = np.geomspace(1e-3, 10.0, 500)
    ref = scipy.special.k0(r) / (2.0 * math.pi)
    assert np.max(np.abs(green2.g(r) - ref) / ref) <= 1e-4


def test_g_prime_N2(green2):
    r = np.geomspace(1e-2, 5.0, 100)
    ref = -scipy.special.k1(r) / (2.0 * math.pi)
    assert np.max(np.abs(green2.g_prime(r) - ref) / np.abs(ref)) <= 1e-3


def test_flux_normalization(green2):
    # 10 * r_min is one decade above the start: omega * r |G'| should be ~ 1
    dev = green2.residual_report["flux_dev_at_10rmin"]
    assert dev <= 1e-3


def test_grid_refinement_stability():
    a = solve_green(2, M=1024, tol=1e-9).A0
    b = solve_green(2, M=2048, tol=1e-9).A0
    assert abs(a - b) < 1e-4


def test_extract_A0_synthetic_table_machine_precision():
    # exact N=2 solution: extraction must recover A0 to near machine accuracy
    params = MTParams(N=2)
    radii = np.geomspace(1e-7, 10.0, 4000)
    G = scipy.special.k0(radii) / (2.0 * math.pi)
    Gp = -scipy.special.k1(radii) / (2.0 * math.pi)
    table = GreenTable(params=params, radii=radii, G_values=G, G_prime=Gp,
                       A0=_A0_2_EXACT)
    a0, fit_error = extract_A0(table)
    assert abs(a0 - _A0_2_EXACT) <= 1e-10
    assert fit_error <= 1e-8


def test_extract_A0_rejects_narrow_table():
    params = MTParams(N=2)
    radii = np.geomspace(1.0, 10.0, 100)
    G = scipy.special.k0(radii) / (2.0 * math.pi)
    Gp = -scipy.special.k1(radii) / (2.0 * math.pi)
    table = GreenTable(params=params, radii=radii, G_values=G, G_prime=Gp,
                       A0=_A0_2_EXACT)
    with pytest.raises(ExtractionError):
        extract_A0(table)


def test_solved_A0_N3_stability(green3):
    # self-convergence: a shorter domain and coarser tolerance agree to 1e-6
    other = solve_green(3, r_max=100.0, tol=1e-9)
    assert abs(green3.A0 - other.A0) <= 1e-6


def test_green_weighted_norm_synthetic():
    # synthetic strictly decreasing table G = e^{-r}: for N=2, beta=0.5,
    # int G^2 |x|^{-1} dx = 2 pi int_0^inf e^{-2r} dr = pi.
    # The solver-facing near-origin asymptote correction is bypassed by
    # starting the table deep enough that the core contribution is tiny.
    params = MTParams(N=2)
    radii = np.geomspace(1e-12, 60.0, 20000)
    G = np.exp(-radii)
    table = GreenTable(params=params, radii=radii, G_values=G, G_prime=-G,
                       A0=0.0)
    # core piece uses the ln-asymptote with A0 = 0 below 1e-12: negligible
    assert green_weighted_norm(table, 0.5) == pytest.approx(math.pi, rel=1e-4)


def test_green_weighted_norm_N2_oracle(green2):
    # oracle: quadrature on the exact K0/2pi closed form
    r = np.geomspace(1e-10, green2.radii[-1], 200000)
    ref = 2.0 * math.pi * np.trapezoid(r * (scipy.special.k0(r) / (2 * math.pi)) ** 2, r)
    assert green_weighted_norm(green2, 0.0) == pytest.approx(ref, rel=1e-4)
    with pytest.raises(DomainError):
        green_weighted_norm(green2, 1.0)


def test_table_csv_round_trip(tmp_path, green2):
    path = tmp_path / "g.csv"
    green2.to_csv(path)
    back = GreenTable.from_csv(path)
    assert back.A0 == green2.A0
    assert np.array_equal(back.radii, green2.radii)
    assert np.array_equal(back.G_values, green2.G_values)
    r = np.geomspace(1e-3, 5.0, 50)
    assert np.allclose(back.g(r), green2.g(r), rtol=0, atol=0)


def test_runtime_under_one_second():
    import time

    t0 = time.perf_counter()
    solve_green(2)
    assert time.perf_counter() - t0 < 1.0
