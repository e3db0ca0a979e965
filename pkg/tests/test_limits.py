import math

import numpy as np
import pytest

from mtvar.constants import MTParams
from mtvar.errors import ConstructionError, DomainError
from mtvar.limits import (SequenceSpec, b_N_constant, classify_sequence,
                          compute_limits, d_ncl, d_nvl, default_bump,
                          geq3_lower_bound, liruf_profile, vanishing_profile)
from mtvar.nonlinearity import NonlinearitySpec
from mtvar.profiles import functional_J, sobolev_energy, total_energy

_EULER_GAMMA = 0.5772156649015329


def test_limit_closed_forms_N2(green2):
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    assert d_nvl(params, spec) == pytest.approx(4.0 * math.pi, rel=1e-12)
    target = 4.0 * math.pi * math.exp(1.0 - 2.0 * _EULER_GAMMA)
    assert d_ncl(params, spec, green2.A0) == pytest.approx(target, rel=1e-3)


def test_limits_vanish_in_expected_regimes(green2):
    params = MTParams(N=2, beta=0.5)
    spec = NonlinearitySpec.phi_critical(params)
    assert d_nvl(params, spec) == 0.0  # beta > 0
    sub = NonlinearitySpec.polynomial(params, [1.0, 0.0])
    assert d_ncl(params, sub, green2.A0) == 0.0  # subcritical
    lv = compute_limits(params, spec, green2.A0)
    assert lv.d_nvl == 0.0 and lv.d_ncl > 0.0


def test_b_N_constant():
    params = MTParams(N=2)
    assert b_N_constant(params) == pytest.approx(math.pi, rel=1e-12)


def test_liruf_profile_unit_energy(green2):
    params = MTParams(N=2)
    peaks = []
    for eps in (1e-2, 1e-3):
        u = liruf_profile(params, eps, green2)
        assert total_energy(u, params) == pytest.approx(1.0, abs=1e-12)
        peaks.append(u.values[0])
    assert peaks[1] > peaks[0]  # concentrating peak grows as eps shrinks


def test_liruf_rejects_large_epsilon(green2):
    params = MTParams(N=2)
    with pytest.raises((ConstructionError, DomainError)):
        liruf_profile(params, 1.0, green2)  # matching radius degenerates


def test_vanishing_profile_energy_and_flattening():
    params = MTParams(N=2)
    bump = default_bump(params)
    g, l = sobolev_energy(bump, params)
    assert g == pytest.approx(1.0, abs=1e-10)
    assert l == pytest.approx(1.0, abs=1e-10)
    for lam in (0.5, 0.01):
        u = vanishing_profile(params, lam, bump)
        assert total_energy(u, params) == pytest.approx(1.0, abs=1e-10)
    assert vanishing_profile(params, 0.01, bump).values[0] < 0.02


def test_vanishing_J_converges_to_C_of_F():
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    bump = default_bump(params)
    u = vanishing_profile(params, 1e-3, bump)
    assert functional_J(u, spec, params) == pytest.approx(spec.C_of_F, rel=1e-6)


def test_geq3_lower_bound_below_liruf_values(green2):
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    for eps in (1e-2, 1e-3):
        u = liruf_profile(params, eps, green2)
        bound = geq3_lower_bound(params, spec, eps, green2)
        assert functional_J(u, spec, params) >= bound
        assert bound > d_ncl(params, spec, green2.A0)


def test_sequence_spec_validation():
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    with pytest.raises(DomainError):
        SequenceSpec("bogus", [1e-2, 1e-3, 1e-4], params, spec)
    with pytest.raises(DomainError):
        SequenceSpec("vanishing", [1e-3, 1e-2], params, spec)  # not decreasing


def test_classifier_verdicts(green2, green3):
    for N, green in ((2, green2), (3, green3)):
        for beta in (0.0, 0.5):
            params = MTParams(N=N, beta=beta)
            spec = NonlinearitySpec.phi_critical(params)
            conc = SequenceSpec("li-ruf", [1e-2, 1e-3, 1e-4], params, spec)
            rep = classify_sequence(conc.generate(green=green), params, spec)
            assert rep.verdict == "concentrating", (N, beta, rep.tail_energy)
            van = SequenceSpec("vanishing", [0.3, 0.1, 0.03], params, spec)
            rep = classify_sequence(van.generate(), params, spec)
            assert rep.verdict == "vanishing", (N, beta, rep.inner_mass)


def test_classifier_compact_candidate():
    # a fixed profile repeated: neither tail energy nor inner mass decays
    params = MTParams(N=2)
    spec = NonlinearitySpec.phi_critical(params)
    bump = default_bump(params)
    u = vanishing_profile(params, 1.0, bump)
    rep = classify_sequence([u, u, u], params, spec)
    assert rep.verdict == "compact-candidate"
    assert rep.energy_deficit < 0.1  # energy essentially inside the big ball
