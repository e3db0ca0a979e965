import math

import numpy as np
import pytest

from mtvar.constants import (MTParams, omega_sphere, phi_truncated_exp,
                             phi_truncated_exp_prime)
from mtvar.errors import DomainError


def test_sphere_areas_closed_form():
    assert omega_sphere(2) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert omega_sphere(3) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert omega_sphere(4) == pytest.approx(2.0 * math.pi**2, rel=1e-15)


def test_alpha_constants():
    p2 = MTParams(N=2)
    assert p2.alpha_N == pytest.approx(4.0 * math.pi, rel=1e-15)
    p3 = MTParams(N=3, beta=0.5)
    assert p3.alpha_N == pytest.approx(3.0 * (4.0 * math.pi) ** 0.5, rel=1e-15)
    assert p3.alpha_beta == pytest.approx(0.5 * p3.alpha_N, rel=1e-15)
    assert p3.ball_volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
    assert MTParams(N=4).harmonic == pytest.approx(1.0 + 0.5 + 1.0 / 3.0, rel=1e-15)


def test_params_validation():
    with pytest.raises(DomainError):
        MTParams(N=1)
    with pytest.raises(DomainError):
        MTParams(N=2, beta=1.0)
    with pytest.raises(DomainError):
        MTParams(N=2, beta=-0.1)


def test_phi_matches_direct_subtraction_moderate_t():
    # at moderate t the naive formula is accurate; compare against it
    for N in (2, 3, 4):
        t = np.linspace(0.5, 30.0, 50)
        partial = sum(t**k / math.factorial(k) for k in range(N - 1))
        naive = np.exp(t) - partial
        assert np.allclose(phi_truncated_exp(N, t), naive, rtol=1e-12)


def test_phi_small_t_leading_order():
    # Phi_N(t) / t^{N-1} -> 1/(N-1)!; the next term is t/N, so the deviation
    # at a finite sample point is of that order
    for N in (2, 3, 4):
        for t in (1e-2, 1e-4):
            ratio = phi_truncated_exp(N, t) / t ** (N - 1)
            tol = max(1e-3, 2.0 * t / N)
            assert ratio == pytest.approx(1.0 / math.factorial(N - 1), rel=tol)


def test_phi_small_t_no_cancellation():
    # the compensated branch keeps full relative precision where the naive
    # subtraction would lose ~16 digits
    t = 1e-12
    assert phi_truncated_exp(4, t) == pytest.approx(t**3 / 6.0, rel=1e-12)


def test_phi_prime_is_lower_phi():
    t = np.linspace(0.1, 5.0, 20)
    assert np.allclose(phi_truncated_exp_prime(3, t), phi_truncated_exp(2, t), rtol=1e-13)
    assert np.allclose(phi_truncated_exp_prime(2, t), np.exp(t), rtol=1e-13)


def test_phi_rejects_negative_argument():
    with pytest.raises(DomainError):
        phi_truncated_exp(2, -1.0)
