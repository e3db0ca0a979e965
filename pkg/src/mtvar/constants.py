"""Dimensional constants and the truncated exponential Phi_N.

Everything here is closed form: unit-sphere areas, the critical exponent
alpha_N = N * omega_{N-1}^(1/(N-1)), its singular-weight reduction
(1-beta)*alpha_N, and Phi_N(t) = e^t - sum_{k<=N-2} t^k/k!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def omega_sphere(N: int) -> float:
    """Surface area of the unit sphere in R^N (i.e. omega_{N-1})."""
    if N < 2:
        raise DomainError(f"dimension must be >= 2, got {N}")
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class MTParams:
    """Dimension N >= 2 and singularity exponent beta in [0, 1)."""

    N: int
    beta: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N}")
        if not (0.0 <= self.beta < 1.0):
            raise DomainError(f"beta must lie in [0, 1), got {self.beta}")

    @property
    def omega(self) -> float:
        """omega_{N-1}, area of the unit sphere in R^N."""
        return omega_sphere(self.N)

    @property
    def ball_volume(self) -> float:
        """|B_1| = omega_{N-1} / N."""
        return self.omega / self.N

    @property
    def alpha_N(self) -> float:
        """Critical Moser-Trudinger exponent N * omega_{N-1}^(1/(N-1))."""
        return self.N * self.omega ** (1.0 / (self.N - 1))

    @property
    def alpha_beta(self) -> float:
        """Singular critical exponent (1-beta) * alpha_N."""
        return (1.0 - self.beta) * self.alpha_N

    @property
    def harmonic(self) -> float:
        """Partial harmonic sum 1 + 1/2 + ... + 1/(N-1)."""
        return sum(1.0 / k for k in range(1, self.N))


def alpha_N(params: MTParams) -> float:
    return params.alpha_N


def alpha_beta(params: MTParams) -> float:
    return params.alpha_beta


def phi_truncated_exp(N: int, t):
    """Phi_N(t) = e^t - sum_{k=0}^{N-2} t^k / k!, for t >= 0.

    Behaves like t^(N-1)/(N-1)! near zero, which is many orders below e^t,
    so the subtraction is done in compensated form: for small t the tail
    series sum_{k>=N-1} t^k/k! is summed directly, otherwise the truncated
    Taylor polynomial is accumulated in pairwise descending order before
    subtracting from exp(t).
    """
    if N < 2:
        raise DomainError(f"dimension must be >= 2, got {N}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("phi_truncated_exp requires t >= 0; pass |t| explicitly")
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)

    small = t < 1e-3 * (N - 1)
    if np.any(small):
        ts = t[small]
        # tail series from k = N-1; converges in a handful of terms
        term = ts ** (N - 1) / math.factorial(N - 1)
        acc = term.copy()
        for k in range(N, N + 30):
            term = term * ts / k
            acc += term
            if np.all(term <= 1e-18 * acc):
                break
        out[small] = acc
    if np.any(~small):
        tl = t[~small]
        partial = np.zeros_like(tl)
        # descending powers: largest terms last so the running sum stays stable
        for k in range(N - 2, -1, -1):
            partial += tl**k / math.factorial(k)
        out[~small] = np.exp(tl) - partial
    return float(out[0]) if scalar else out


def phi_truncated_exp_prime(N: int, t):
    """d/dt Phi_N(t) = Phi_{N-1}(t) for N >= 3, e^t for N = 2."""
    if N == 2:
        return np.exp(np.asarray(t, dtype=float)) if np.ndim(t) else math.exp(t)
    return phi_truncated_exp(N - 1, t)
