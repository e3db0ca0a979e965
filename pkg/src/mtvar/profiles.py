"""Non-increasing radial Sobolev functions on a log grid.

A profile stores node values u_1 >= ... >= u_M >= 0 on radii r_1 < ... < r_M,
interpolated piecewise linearly in ln r, constant u_1 on [0, r_1], zero
beyond r_M. In the variable s = ln r the gradient term collapses exactly:

    int r^{N-1} |u'|^N dr = sum_cells |dv/ds|^N ds,

so the Dirichlet part of the Sobolev energy is closed form on this
representation; the L^N and weighted-F parts use Gauss-Legendre per cell,
with the integrable singularity at r = 0 handled by the closed-form integral
of the constant center piece against r^{N-1-N*beta}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import MTParams
from .errors import DomainError, IntegrationError
from .nonlinearity import NonlinearitySpec, eval_F

# Gauss-Legendre nodes/weights on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

DEFAULT_GRID = (1e-6, 1e3, 4096)

_MONOTONE_SLACK = 1e-12


@dataclass
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.radii.size < 3:
            raise DomainError("profile needs at least 3 nodes")
        if self.radii[0] <= 0 or np.any(np.diff(self.radii) <= 0):
            raise DomainError("radii must be strictly increasing and positive")
        if self.values.shape != self.radii.shape:
            raise DomainError("radii/values length mismatch")
        if np.any(self.values < -_MONOTONE_SLACK):
            raise DomainError("profile values must be nonnegative")
        scale = max(self.values.max(initial=0.0), 1.0)
        if np.any(np.diff(self.values) > _MONOTONE_SLACK * scale):
            raise DomainError("profile values must be non-increasing")
        # clip resampling noise
        self.values = np.maximum.accumulate(np.maximum(self.values, 0.0)[::-1])[::-1]

    # -- construction -----------------------------------------------------

    @staticmethod
    def log_grid(r_min=DEFAULT_GRID[0], r_max=DEFAULT_GRID[1], M=DEFAULT_GRID[2]):
        return np.geomspace(r_min, r_max, M)

    @classmethod
    def from_callable(cls, f, radii=None) -> "RadialProfile":
        radii = cls.log_grid() if radii is None else np.asarray(radii, dtype=float)
        return cls(radii, np.asarray(f(radii), dtype=float))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        v = np.interp(np.log(np.maximum(r, self.radii[0] * 1e-300)),
                      np.log(self.radii), self.values,
                      left=self.values[0], right=0.0)
        return v

    def scaled(self, c: float) -> "RadialProfile":
        return RadialProfile(self.radii, c * self.values)

    def dilated(self, lam: float) -> "RadialProfile":
        """u_lam(x) = u(lam * x)."""
        return RadialProfile(self.radii / lam, self.values)

    # -- CSV round trip ----------------------------------------------------

    def to_csv(self, path, params: MTParams):
        with open(path, "w") as fh:
            fh.write(f"# N={params.N} beta={params.beta!r}\n")
            fh.write("r,u\n")
            for r, u in zip(self.radii, self.values):
                fh.write(f"{float(r)!r},{float(u)!r}\n")

    @staticmethod
    def from_csv(path):
        with open(path) as fh:
            header = fh.readline().strip()
            parts = dict(tok.split("=") for tok in header.lstrip("# ").split())
            params = MTParams(N=int(parts["N"]), beta=float(parts["beta"]))
            fh.readline()  # column names
            data = np.loadtxt(fh, delimiter=",")
        return RadialProfile(data[:, 0], data[:, 1]), params


def _cell_quadrature(u: RadialProfile):
    """Gauss nodes in s = ln r per cell: (s_nodes, weights*ds, v_nodes)."""
    s = np.log(u.radii)
    ds = np.diff(s)
    sg = s[:-1, None] + ds[:, None] * _GL_X[None, :]
    vg = u.values[:-1, None] + np.diff(u.values)[:, None] * _GL_X[None, :]
    wg = ds[:, None] * _GL_W[None, :]
    return sg, wg, vg


def sobolev_energy(u: RadialProfile, params: MTParams):
    """(grad_part, lp_part) = omega * (int r^{N-1}|u'|^N dr, int r^{N-1}u^N dr)."""
    N, om = params.N, params.omega
    s = np.log(u.radii)
    ds = np.diff(s)
    grad = om * float(np.sum(np.abs(np.diff(u.values)) ** N / ds ** (N - 1)))
    sg, wg, vg = _cell_quadrature(u)
    lp = om * float(np.sum(wg * vg**N * np.exp(N * sg)))
    lp += om / N * u.values[0] ** N * u.radii[0] ** N  # constant center piece
    if not (np.isfinite(grad) and np.isfinite(lp)):
        raise IntegrationError("non-finite Sobolev energy")
    return grad, lp


def lp_norm_pow(u: RadialProfile, params: MTParams, p: float) -> float:
    """||u||_p^p = omega * int r^{N-1} |u|^p dr, center piece in closed form."""
    N, om = params.N, params.omega
    sg, wg, vg = _cell_quadrature(u)
    val = om * float(np.sum(wg * vg**p * np.exp(N * sg)))
    return val + om / N * u.values[0] ** p * u.radii[0] ** N


def total_energy(u: RadialProfile, params: MTParams) -> float:
    g, l = sobolev_energy(u, params)
    return g + l


def normalized(u: RadialProfile, params: MTParams) -> "RadialProfile":
    """Rescale values so grad_part + lp_part = 1 (exact by N-homogeneity)."""
    e = total_energy(u, params)
    if e <= 0:
        raise DomainError("cannot normalize the zero profile")
    return u.scaled(e ** (-1.0 / params.N))


def functional_J(u: RadialProfile, spec: NonlinearitySpec, params: MTParams) -> float:
    """J_F^beta(u) = omega * int r^{N-1-N*beta} F(u(r)) dr."""
    N, b, om = params.N, params.beta, params.omega
    sg, wg, vg = _cell_quadrature(u)
    with np.errstate(over="raise"):
        try:
            val = om * float(np.sum(wg * eval_F(spec, params, vg) * np.exp(N * (1 - b) * sg)))
            val += om * eval_F(spec, params, u.values[0]) * u.radii[0] ** (N * (1 - b)) / (
                N * (1 - b)
            )
        except FloatingPointError as exc:
            raise IntegrationError("F grows too fast on this profile") from exc
    if not np.isfinite(val):
        raise IntegrationError("non-finite functional value")
    return val


def radial_decay_ratio(u: RadialProfile, params: MTParams) -> float:
    """sup over nodes of u(r) r^{(N-1)/N} / ||u||_{W^{1,N}}; scale invariant."""
    g, l = sobolev_energy(u, params)
    norm = (g + l) ** (1.0 / params.N)
    if norm <= 0:
        raise DomainError("radial decay ratio undefined for the zero profile")
    return float(np.max(u.values * u.radii ** ((params.N - 1) / params.N)) / norm)


def elementary_inequality_gap(a: float, b: float, eps: float, r: float) -> float:
    """RHS - LHS of (a+b)^r <= (1+eps) a^r + (1-(1+eps)^{1/(1-r)})^{1-r} b^r."""
    if a < 0 or b < 0 or eps <= 0 or r <= 1:
        raise DomainError("requires a,b >= 0, eps > 0, r > 1")
    coeff = (1.0 - (1.0 + eps) ** (1.0 / (1.0 - r))) ** (1.0 - r)
    return (1.0 + eps) * a**r + coeff * b**r - (a + b) ** r


def _segment_arrays(u: RadialProfile, R: float, side: str):
    """Node arrays of u restricted to r >= R ('outer') or r <= R ('inner'),
    splitting the cell that contains R."""
    radii, values = u.radii, u.values
    i = int(np.searchsorted(radii, R))  # first index with radii[i] >= R
    vR = float(u(R))
    if side == "outer":
        j = i + 1 if (i < radii.size and radii[i] == R) else i
        return np.concatenate(([R], radii[j:])), np.concatenate(([vR], values[j:]))
    return np.concatenate((radii[:i], [R])), np.concatenate((values[:i], [vR]))


def _gauss_cells(radii, values):
    s = np.log(radii)
    ds = np.diff(s)
    sg = s[:-1, None] + ds[:, None] * _GL_X[None, :]
    vg = values[:-1, None] + np.diff(values)[:, None] * _GL_X[None, :]
    wg = ds[:, None] * _GL_W[None, :]
    return sg, wg, vg, ds


def energy_outside(u: RadialProfile, params: MTParams, R: float) -> float:
    """Sobolev energy integrated over |x| > R (used by the trichotomy classifier)."""
    N, om = params.N, params.omega
    if R >= u.radii[-1]:
        return 0.0
    if R <= u.radii[0]:
        g, l = sobolev_energy(u, params)
        return g + l - om / N * u.values[0] ** N * R**N
    radii, values = _segment_arrays(u, R, "outer")
    sg, wg, vg, ds = _gauss_cells(radii, values)
    grad = om * float(np.sum(np.abs(np.diff(values)) ** N / ds ** (N - 1)))
    lp = om * float(np.sum(wg * vg**N * np.exp(N * sg)))
    return grad + lp


def functional_J_inside(u: RadialProfile, spec, params: MTParams, R: float) -> float:
    """J_F^beta restricted to the ball |x| < R."""
    N, b, om = params.N, params.beta, params.omega
    center = om * eval_F(spec, params, u.values[0]) * min(R, u.radii[0]) ** (
        N * (1 - b)
    ) / (N * (1 - b))
    if R <= u.radii[0]:
        return center
    radii, values = _segment_arrays(u, min(R, u.radii[-1]), "inner")
    sg, wg, vg, _ = _gauss_cells(radii, values)
    val = center + om * float(
        np.sum(wg * eval_F(spec, params, vg) * np.exp(N * (1 - b) * sg))
    )
    return val
