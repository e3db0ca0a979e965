import math

import numpy as np
import pytest

from mtvar.constants import MTParams
from mtvar.errors import ContractError, DomainError
from mtvar.extremal import (compute_B_N, compute_B_N_ground_state,
                            existence_certificate, gns_quotient, maximize_MT,
                            perturbation_curve, predicted_slope)
from mtvar.limits import compute_limits, default_bump
from mtvar.nonlinearity import NonlinearitySpec
from mtvar.profiles import RadialProfile, functional_J, lp_norm_pow, total_energy


@pytest.fixture(scope="module")
def bn2():
    return compute_B_N(2)


def test_gns_quotient_gaussian_oracle():
    # closed form for u = e^{-r^2} in R^2: ||u||_4^4 = pi/4,
    # ||grad u||_2^2 = pi, ||u||_2^2 = pi/2  =>  quotient = 1/(2 pi)
    params = MTParams(N=2)
    radii = np.geomspace(1e-5, 15.0, 4000)
    u = RadialProfile(radii, np.exp(-(radii**2)))
    assert gns_quotient(u, params) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-6)


def test_B_N_dual_routes_agree(bn2):
    B2, _ = bn2
    assert abs(B2 - compute_B_N_ground_state(2)) <= 0.02 * B2


def test_B_N_quotient_invariance(bn2):
    B2, u = bn2
    params = MTParams(N=2)
    scaled = RadialProfile(u.radii / 3.0, 2.5 * u.values)
    assert gns_quotient(scaled, params) == pytest.approx(B2, rel=1e-6)


def test_maximize_MT_exceeds_both_limits(green2):
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    report = maximize_MT(params, spec, {"green": green2})
    limits = compute_limits(params, spec, green2.A0)
    cert = existence_certificate(report, limits)
    assert cert["exceeds_d_nvl"] and cert["exceeds_d_ncl"]
    assert cert["margin"] > 0.0
    # invariants of the report
    assert total_energy(report.best_profile, params) == pytest.approx(1.0, abs=1e-8)
    assert functional_J(report.best_profile, spec, params) == pytest.approx(
        report.best_value, rel=1e-10)
    assert all(np.all(np.diff(h) >= 0) for h in report.history)  # monotone ascent


def test_maximize_MT_grid_stability(green2):
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    a = maximize_MT(params, spec, {"green": green2}).best_value
    b = maximize_MT(params, spec,
                    {"green": green2, "grid": (1e-6, 100.0, 1700)}).best_value
    assert abs(a - b) <= 0.01 * max(a, b)


def test_maximize_MT_rejects_bad_nonlinearity():
    params = MTParams(N=2)
    bad = NonlinearitySpec.polynomial(params, [2.0 * params.alpha_beta, 0.0])
    with pytest.raises(DomainError):
        maximize_MT(params, bad, {"liruf_seeds": ()})


def test_existence_certificate_input_contract(green2):
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    report = maximize_MT(params, spec, {"green": green2, "max_iter": 5})
    other = compute_limits(MTParams(N=3), NonlinearitySpec.phi_critical(MTParams(N=3)),
                           green2.A0)
    with pytest.raises(ContractError):
        existence_certificate(report, other)


def test_perturbation_slope_signs(bn2):
    # slope of J(w_t) at t=0+ changes sign at C_{2(N-1)} = C(F)/B_N
    params = MTParams(N=2)
    B2, _ = bn2
    bump = default_bump(params)  # ||v||_2 = 1 by construction
    cf = 1.0
    threshold = cf / B2
    t_vals = np.linspace(0.0, 1e-3, 6)

    def fitted_slope(c_top):
        spec = NonlinearitySpec.polynomial(params, [cf, c_top])
        curve = perturbation_curve(spec, params, bump, t_vals)
        t = np.array([p[0] for p in curve])
        J = np.array([p[1] for p in curve])
        slope = np.polyfit(t, J, 1)[0]
        pred = predicted_slope(spec, params, bump)
        assert slope == pytest.approx(pred, rel=0.1)
        return slope

    assert fitted_slope(2.0 * threshold) > 0.0
    assert fitted_slope(0.5 * threshold) < 0.0


def test_perturbation_curve_requires_unit_LN_and_beta0():
    params = MTParams(N=2)
    spec = NonlinearitySpec.polynomial(params, [1.0, 0.5])
    bump = default_bump(params)
    with pytest.raises(DomainError):
        perturbation_curve(spec, MTParams(N=2, beta=0.5), bump, [0.0, 1e-3])
    with pytest.raises(DomainError):
        perturbation_curve(spec, params, bump.scaled(2.0), [0.0, 1e-3])
