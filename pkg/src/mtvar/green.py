"""Radial N-Laplacian Green function and its additive constant A0.

The distributional problem -Delta_N G + G^{N-1} = delta_0 reduces on rays to

    -(r^{N-1} |G'|^{N-2} G')' + r^{N-1} G^{N-1} = 0,   r > 0,

with the flux normalization omega_{N-1} r^{N-1} |G'|^{N-1} -> 1 as r -> 0.
In s = ln r with state (G, P), P = |dG/ds|^{N-2} dG/ds, the system reads
dG/ds = sign(P)|P|^{1/(N-1)}, dP/ds = e^{Ns} G^{N-1}; near the origin G is
affine in s with slope -N/alpha_N and intercept A0, and P -> -1/omega_{N-1}.

The decaying solution is a separatrix: shooting on A0 classifies trajectories
by whether G crosses zero first (A0 too small) or the flux P turns nonnegative
while G is still visible (too large). Bisection runs in two phases, a coarse
integrator tolerance to localize the bracket and a tight one to finish, since
pointwise accuracy in the far tail requires A0 resolved to ~1e-12 (upstream
errors grow like the unstable mode e^{2r} relative to the decaying branch).

For N = 2 the solution is K0(r)/(2*pi); bessel_K0 below is self-contained
(power series below r = 2, the cosh-integral representation above) and serves
as the closed-form cross-check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .constants import MTParams
from .errors import DomainError, ExtractionError, IntegrationError, SolverError

_EULER_GAMMA = 0.5772156649015329

_TINY_G = 1e-12  # "tail reached" threshold for trajectory classification


def bessel_K0(r):
    """Modified Bessel function K0, relative error well below 1e-8.

    r < 2: K0 = -(ln(r/2) + gamma) I0(r) + sum_k (r^2/4)^k H_k / (k!)^2.
    r >= 2: K0 = int_0^infty e^{-r cosh t} dt; the integrand extends evenly
    through t = 0 and decays double-exponentially, so the trapezoid rule
    converges spectrally.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("bessel_K0 requires r > 0")
    scalar = r.ndim == 0
    rr = np.atleast_1d(r)
    out = np.empty_like(rr)

    small = rr < 2.0
    if np.any(small):
        x = rr[small]
        q = x * x / 4.0
        i0 = np.ones_like(x)
        corr = np.zeros_like(x)
        term = np.ones_like(x)
        hk = 0.0
        for k in range(1, 40):
            term = term * q / (k * k)
            hk += 1.0 / k
            i0 += term
            corr += term * hk
            if np.all(term * max(hk, 1.0) < 1e-18 * (i0 + corr)):
                break
        out[small] = -(np.log(x / 2.0) + _EULER_GAMMA) * i0 + corr
    if np.any(~small):
        x = rr[~small]
        t = np.linspace(0.0, 6.0, 600)
        vals = np.exp(-x[:, None] * np.cosh(t)[None, :])
        out[~small] = np.trapezoid(vals, t, axis=1)
    return float(out[0]) if scalar else out


@dataclass
class GreenTable:
    """Tabulated (r, G, G') on a log grid with the extracted constant A0."""

    params: MTParams
    radii: np.ndarray
    G_values: np.ndarray
    G_prime: np.ndarray
    A0: float
    residual_report: dict = field(default_factory=dict)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.G_values = np.asarray(self.G_values, dtype=float)
        self.G_prime = np.asarray(self.G_prime, dtype=float)
        if self.radii.size < 3 or np.any(np.diff(self.radii) <= 0) or self.radii[0] <= 0:
            raise DomainError("radii must be strictly increasing and positive")
        if np.any(self.G_values <= 0) or np.any(np.diff(self.G_values) >= 0):
            raise DomainError("G must be positive and strictly decreasing")
        if np.any(self.G_prime >= 0):
            raise DomainError("G' must be negative")

    def g(self, r):
        """G(r); cubic Hermite in ln r inside the table (values + stored
        slopes q = r G'), the near-origin asymptote below r_min, zero above."""
        r = np.asarray(r, dtype=float)
        s_nodes = np.log(self.radii)
        q_nodes = self.radii * self.G_prime  # dG/ds at the nodes
        s = np.log(np.atleast_1d(r))
        i = np.clip(np.searchsorted(s_nodes, s) - 1, 0, s_nodes.size - 2)
        h = s_nodes[i + 1] - s_nodes[i]
        t = np.clip((s - s_nodes[i]) / h, 0.0, 1.0)
        g0, g1 = self.G_values[i], self.G_values[i + 1]
        q0, q1 = q_nodes[i] * h, q_nodes[i + 1] * h
        t2, t3 = t * t, t * t * t
        v = ((2 * t3 - 3 * t2 + 1) * g0 + (t3 - 2 * t2 + t) * q0
             + (-2 * t3 + 3 * t2) * g1 + (t3 - t2) * q1)
        slope = -self.params.N / self.params.alpha_N
        v = np.where(s < s_nodes[0], slope * s + self.A0, v)
        v = np.where(s > s_nodes[-1], 0.0, v)
        return float(v[0]) if r.ndim == 0 else v

    def g_prime(self, r):
        r = np.asarray(r, dtype=float)
        # q = r G' is the smooth quantity in ln r; interpolate it
        q = np.interp(np.log(r), np.log(self.radii), self.radii * self.G_prime,
                      left=-self.params.N / self.params.alpha_N, right=0.0)
        v = q / r
        return float(v) if v.ndim == 0 else v

    # -- CSV export with JSON header ---------------------------------------

    def to_csv(self, path):
        header = {
            "N": self.params.N,
            "A0": self.A0,
            "fit_error": self.residual_report.get("fit_error"),
            "residuals": {
                k: v for k, v in self.residual_report.items() if isinstance(v, float)
            },
        }
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(header) + "\n")
            fh.write("r,G,G_prime\n")
            for r, g, gp in zip(self.radii, self.G_values, self.G_prime):
                fh.write(f"{float(r)!r},{float(g)!r},{float(gp)!r}\n")

    @staticmethod
    def from_csv(path) -> "GreenTable":
        with open(path) as fh:
            header = json.loads(fh.readline().lstrip("# "))
            fh.readline()
            data = np.loadtxt(fh, delimiter=",")
        report = {"fit_error": header.get("fit_error")}
        report.update(header.get("residuals", {}))
        return GreenTable(
            params=MTParams(N=int(header["N"])),
            radii=data[:, 0],
            G_values=data[:, 1],
            G_prime=data[:, 2],
            A0=float(header["A0"]),
            residual_report=report,
        )


def _shoot(N, om, slope, s0, s1, A0, rtol, dense=False):
    """Integrate the (G, P) system outward from the near-origin asymptote."""

    def rhs(s, y):
        G, P = y
        q = -((-P) ** (1.0 / (N - 1))) if P < 0 else P ** (1.0 / (N - 1))
        return (q, math.exp(N * s) * max(G, 0.0) ** (N - 1))

    def hitzero(s, y):
        return y[0]

    hitzero.terminal, hitzero.direction = True, -1

    def fluxzero(s, y):
        return y[1]

    fluxzero.terminal, fluxzero.direction = True, 1

    G0 = slope * s0 + A0
    # flux correction accumulated on (-inf, s0]: P(s0) = -1/om + int e^{Ns} G^{N-1} ds
    ss = np.linspace(s0 - 60.0, s0, 400)
    P0 = -1.0 / om + np.trapezoid(np.exp(N * ss) * (slope * ss + A0) ** (N - 1), ss)
    return solve_ivp(rhs, (s0, s1), [G0, P0], rtol=rtol, atol=1e-300,
                     events=(hitzero, fluxzero), dense_output=dense,
                     method="DOP853")


def _classify(N, om, slope, s0, s1, A0, rtol):
    """-1: G crossed zero (A0 too small); +1: flux turned while G visible
    (too large); 0: tail reached."""
    if slope * s0 + A0 <= 0:
        return -1
    sol = _shoot(N, om, slope, s0, s1, A0, rtol)
    if sol.t_events[0].size:
        return -1
    if sol.t_events[1].size:
        return 0 if sol.y[0, -1] < _TINY_G else +1
    return 0 if abs(sol.y[0, -1]) < _TINY_G else +1


def solve_green(N: int, r_min: float = 1e-6, r_max: float = None,
                tol: float = 1e-11, M: int = 4096,
                a_lo: float = -2.0, a_hi: float = 3.0) -> GreenTable:
    """Shooting solver for the radial Green table; bisects on A0."""
    params = MTParams(N=N)
    if r_max is None:
        r_max = 50.0 * N
    if not (0.0 < r_min < 1.0 < r_max):
        raise DomainError("need 0 < r_min < 1 < r_max")
    om = params.omega
    slope = -N / params.alpha_N
    s0, s1 = math.log(r_min), math.log(r_max)
    rtol_coarse = max(1e4 * tol, 1e-8)

    def bisect(lo, hi, rtol, width):
        clo = _classify(N, om, slope, s0, s1, lo, rtol)
        chi = _classify(N, om, slope, s0, s1, hi, rtol)
        if clo != -1 or chi != +1:
            raise SolverError(
                f"A0 bracket [{lo}, {hi}] does not straddle the separatrix "
                f"(classes {clo}, {chi})"
            )
        while hi - lo > width * max(1.0, abs(hi)):
            mid = 0.5 * (lo + hi)
            c = _classify(N, om, slope, s0, s1, mid, rtol)
            if c == 0:
                return mid, mid
            if c < 0:
                lo = mid
            else:
                hi = mid
        return lo, hi

    # coarse pass localizes A0; the tight pass restarts from a padded bracket
    # because the classification boundary moves by the integrator error
    lo, hi = bisect(a_lo, a_hi, rtol_coarse, 1e-7)
    pad = 50.0 * rtol_coarse
    lo, hi = bisect(lo - pad, hi + pad, tol, 1e-14)
    A0 = 0.5 * (lo + hi)

    sol = _shoot(N, om, slope, s0, s1, A0, tol, dense=True)
    s_end = sol.t[-1]
    s_nodes = np.linspace(s0, s_end, M)
    G, P = sol.sol(s_nodes)
    q = np.where(P < 0, -((-np.minimum(P, 0.0)) ** (1.0 / (N - 1))), 0.0)
    radii = np.exp(s_nodes)
    g_prime = q / radii

    # trim terminal wiggle where the trajectory has left the separatrix
    bad = (G <= 0) | (g_prime >= 0)
    bad[1:] |= np.diff(G) >= 0
    cut = int(np.argmax(bad)) if bad.any() else G.size
    radii, G, g_prime = radii[:cut], G[:cut], g_prime[:cut]

    report = _residual_report(params, sol, s0, s_end, tol)
    report["a0_bracket_width"] = float(hi - lo)
    report["tol"] = float(tol)
    table = GreenTable(params=params, radii=radii, G_values=G, G_prime=g_prime,
                       A0=A0, residual_report=report)
    a0_fit, fit_error = extract_A0(table)
    table.residual_report["fit_error"] = fit_error
    table.residual_report["a0_fit_gap"] = abs(a0_fit - A0)
    return table


def _residual_report(params: MTParams, sol, s0: float, s_end: float, tol: float) -> dict:
    """Cell-wise weak flux balance P(s_b) - P(s_a) = int e^{Ns} G^{N-1} ds."""
    N = params.N
    edges = np.linspace(s0, s_end, 257)
    # Gauss 8 per cell on the dense solution
    gx, gw = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    s_q = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    Gq = np.maximum(sol.sol(s_q)[0].reshape(-1, 8), 0.0)
    cell_int = (half[:, None] * gw[None, :] * np.exp(N * s_q.reshape(-1, 8)) * Gq ** (N - 1)).sum(axis=1)
    P_edges = sol.sol(edges)[1]
    resid = np.abs(np.diff(P_edges) - cell_int)
    # flux normalization near the origin, checked one decade above r_min
    s_chk = s0 + math.log(10.0)
    P_chk = sol.sol(s_chk)[1]
    flux_dev = abs(params.omega * abs(P_chk) - 1.0)
    return {
        "flux_residual_max": float(resid.max()),
        "flux_dev_at_10rmin": float(flux_dev),
        "terminal_G": float(sol.y[0, -1]),
        "terminal_r": float(math.exp(s_end)),
        "tail_condition": f"|G| < {_TINY_G} or flux sign change with negligible G",
    }


def extract_A0(table: GreenTable, tol: float = 1e-6):
    """(A0, fit_error) by Richardson extrapolation of G(r) + (N/alpha_N) ln r
    over the smallest decades of the table."""
    params = table.params
    N = params.N
    r0 = table.radii[0]
    decades = r0 * 10.0 ** np.arange(4)
    decades = decades[decades <= min(0.1, table.radii[-1])]
    if decades.size < 2:
        raise ExtractionError("table range too narrow for decade extrapolation")
    h = table.g(decades) + (N / params.alpha_N) * np.log(decades)
    # remainder is O(r^N ln^{N-1} r): eliminate the power, log factor ignored
    ratio = 10.0**N
    extrap = (ratio * h[:-1] - h[1:]) / (ratio - 1.0)
    A0 = float(extrap[0])
    fit_error = float(np.max(extrap) - np.min(extrap)) if extrap.size > 1 else float(
        abs(extrap[0] - h[0])
    )
    if fit_error > 10.0 * tol:
        raise ExtractionError(
            f"decade extrapolants spread {fit_error:.3e} exceeds 10*tol = {10 * tol:.3e}"
        )
    return A0, fit_error


def green_weighted_norm(table: GreenTable, beta: float) -> float:
    """int_{R^N} G(x)^N |x|^{-beta N} dx."""
    if not (0.0 <= beta < 1.0):
        raise DomainError(f"beta must lie in [0, 1), got {beta}")
    params = table.params
    N, om = params.N, params.omega
    s = np.log(table.radii)

    # near-origin piece from the asymptote G = slope*s + A0, weight e^{N(1-b)s}
    slope = -N / params.alpha_N
    s0 = s[0]
    depth = 80.0 / (N * (1.0 - beta))
    ss = np.linspace(s0 - depth, s0, 4000)
    core = np.trapezoid(np.exp(N * (1.0 - beta) * ss) * (slope * ss + table.A0) ** N, ss)

    # tabulated piece: Gauss 4 per cell on the log grid
    gx, gw = np.polynomial.legendre.leggauss(4)
    mid = 0.5 * (s[:-1] + s[1:])
    half = 0.5 * np.diff(s)
    s_q = mid[:, None] + half[:, None] * gx[None, :]
    G_q = np.interp(s_q, s, table.G_values)
    main = np.sum(half[:, None] * gw[None, :] * np.exp(N * (1.0 - beta) * s_q) * G_q**N)

    val = om * float(core + main)
    if not np.isfinite(val) or val <= 0:
        raise IntegrationError("weighted Green norm did not evaluate to a finite positive value")
    return val
