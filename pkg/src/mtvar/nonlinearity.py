"""Machine representation of the nonlinearity F and its growth conditions.

Built-in kinds:
  phi-critical         F(t) = Phi_N(alpha_{beta,N} |t|^{N/(N-1)})
  phi-minus-power      F(t) = Phi_N(alpha_{beta,N} |t|^{N/(N-1)}) - lambda |t|^N
  polynomial-perturbed F(t) = sum_k C_k |t|^{Nk/(N-1)}, k = N-1 .. 2(N-1)
  custom               arbitrary even evaluator with declared metadata

The growth conditions (even, strictly increasing on t>=0, dominated by the
truncated exponential, near-zero/near-infinity limits existing) are checked
by sampling, never symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import MTParams, phi_truncated_exp, phi_truncated_exp_prime
from .errors import DomainError, EvaluationError, NoLimitError

KINDS = ("phi-critical", "phi-minus-power", "polynomial-perturbed", "custom")

# C(F) limit detector: successive decades must agree to this relative tolerance
LIMIT_RTOL = 1e-4


@dataclass
class NonlinearitySpec:
    kind: str
    lam: float = 0.0
    near_zero_coeffs: Optional[list] = None  # [C(F), C_N, ..., C_{2(N-1)}]
    criticality: str = "critical"  # "critical" | "subcritical"
    C_of_F: Optional[float] = None
    evaluator: Optional[Callable] = None
    derivative: Optional[Callable] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if self.lam < 0:
            raise DomainError("lambda must be nonnegative")
        if self.kind == "custom" and self.evaluator is None:
            raise DomainError("custom kind requires an evaluator")

    # -- constructors ----------------------------------------------------

    @staticmethod
    def phi_critical(params: MTParams) -> "NonlinearitySpec":
        return NonlinearitySpec(
            kind="phi-critical",
            criticality="critical",
            near_zero_coeffs=_phi_coeffs(params),
            C_of_F=_phi_coeffs(params)[0],
        )

    @staticmethod
    def phi_minus_power(params: MTParams, lam: float) -> "NonlinearitySpec":
        coeffs = _phi_coeffs(params)
        coeffs[0] -= lam
        if coeffs[0] < 0:
            raise DomainError(
                "lambda exceeds alpha_beta^(N-1)/(N-1)!; F would be negative near 0"
            )
        return NonlinearitySpec(
            kind="phi-minus-power",
            lam=lam,
            criticality="critical",
            near_zero_coeffs=coeffs,
            C_of_F=coeffs[0],
        )

    @staticmethod
    def polynomial(params: MTParams, coeffs: Sequence[float]) -> "NonlinearitySpec":
        """coeffs = [C(F), C_N, ..., C_{2(N-1)}], exponents N*k/(N-1) for
        k = N-1 .. 2(N-1). The polynomial is used globally, so it is
        subcritical; termwise domination by Phi_N holds iff C_k <= alpha^k/k!."""
        coeffs = [float(c) for c in coeffs]
        if len(coeffs) != params.N:
            raise DomainError(
                f"expected {params.N} coefficients (C(F), C_N..C_{{2(N-1)}})"
            )
        if any(c < 0 for c in coeffs):
            raise DomainError("polynomial coefficients must be nonnegative")
        return NonlinearitySpec(
            kind="polynomial-perturbed",
            criticality="subcritical",
            near_zero_coeffs=coeffs,
            C_of_F=coeffs[0],
        )

    @staticmethod
    def custom(
        evaluator: Callable,
        criticality: str,
        C_of_F: Optional[float] = None,
        derivative: Optional[Callable] = None,
        **metadata,
    ) -> "NonlinearitySpec":
        return NonlinearitySpec(
            kind="custom",
            criticality=criticality,
            C_of_F=C_of_F,
            evaluator=evaluator,
            derivative=derivative,
            metadata=dict(metadata),
        )

    # -- serialization (key-value text format) ---------------------------

    def to_text(self) -> str:
        if self.kind == "custom":
            raise DomainError("custom evaluators are not serializable")
        lines = [
            f"kind={self.kind}",
            f"lambda={self.lam!r}",
            f"criticality={self.criticality}",
            f"c_of_f={self.C_of_F!r}",
        ]
        if self.near_zero_coeffs is not None:
            lines.append("coeffs=" + ",".join(repr(c) for c in self.near_zero_coeffs))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "NonlinearitySpec":
        fields = {}
        for line in text.strip().splitlines():
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        coeffs = None
        if "coeffs" in fields and fields["coeffs"]:
            coeffs = [float(c) for c in fields["coeffs"].split(",")]
        return NonlinearitySpec(
            kind=fields["kind"],
            lam=float(fields.get("lambda", 0.0)),
            criticality=fields.get("criticality", "critical"),
            C_of_F=float(fields["c_of_f"]) if fields.get("c_of_f") else None,
            near_zero_coeffs=coeffs,
        )


def _phi_coeffs(params: MTParams) -> list:
    """Near-zero expansion of Phi_N(alpha_beta |t|^{N/(N-1)}): the k-th Taylor
    term of the exponential lands on exponent N*k/(N-1), k = N-1 .. 2(N-1)."""
    a = params.alpha_beta
    return [a**k / math.factorial(k) for k in range(params.N - 1, 2 * params.N - 1)]


def eval_F(spec: NonlinearitySpec, params: MTParams, t):
    """Evaluate F(t); even in t, nonnegative."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    at = np.abs(np.atleast_1d(t))
    p = params.N / (params.N - 1)

    if spec.kind == "phi-critical":
        out = phi_truncated_exp(params.N, params.alpha_beta * at**p)
    elif spec.kind == "phi-minus-power":
        out = phi_truncated_exp(params.N, params.alpha_beta * at**p) - spec.lam * at ** params.N
    elif spec.kind == "polynomial-perturbed":
        out = np.zeros_like(at)
        for j, c in enumerate(spec.near_zero_coeffs):
            k = params.N - 1 + j
            out += c * at ** (params.N * k / (params.N - 1))
    else:
        out = np.asarray(spec.evaluator(at), dtype=float)
        if np.any(~np.isfinite(out)) or np.any(out < 0):
            raise EvaluationError("custom evaluator returned negative or non-finite values")
    return float(out[0]) if scalar else out


def eval_F_prime(spec: NonlinearitySpec, params: MTParams, t):
    """dF/dt for t >= 0 (builtins analytic, custom by central differences)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    at = np.abs(np.atleast_1d(t))
    N = params.N
    p = N / (N - 1)

    if spec.kind in ("phi-critical", "phi-minus-power"):
        arg = params.alpha_beta * at**p
        out = phi_truncated_exp_prime(N, arg) * params.alpha_beta * p * at ** (p - 1)
        if spec.kind == "phi-minus-power":
            out = out - spec.lam * N * at ** (N - 1)
    elif spec.kind == "polynomial-perturbed":
        out = np.zeros_like(at)
        for j, c in enumerate(spec.near_zero_coeffs):
            q = N * (N - 1 + j) / (N - 1)
            out += c * q * at ** (q - 1)
    elif spec.derivative is not None:
        out = np.asarray(spec.derivative(at), dtype=float)
    else:
        h = 1e-6 * np.maximum(at, 1.0)
        out = (eval_F(spec, params, at + h) - eval_F(spec, params, np.maximum(at - h, 0.0))) / (
            h + np.minimum(at, h)
        )
    return float(out[0]) if scalar else out


def c_of_F(spec: NonlinearitySpec, params: MTParams) -> float:
    """Sampled limit of F(t)/|t|^N as t -> 0; accepted when three successive
    decades agree within LIMIT_RTOL relative."""
    ts = 10.0 ** -np.arange(2, 9, dtype=float)
    ratios = np.array([eval_F(spec, params, t) / t ** params.N for t in ts])
    for i in range(len(ratios) - 2):
        window = ratios[i : i + 3]
        scale = max(abs(window).max(), 1e-300)
        if (window.max() - window.min()) <= LIMIT_RTOL * scale or scale < 1e-12:
            return float(ratios[i + 2])
    raise NoLimitError(
        f"F(t)/t^N did not stabilize: decade ratios {ratios.tolist()}"
    )


@dataclass
class GrowthReport:
    """Sampled verdicts for the four growth conditions, with failure witnesses."""

    f1_smooth: bool
    f2_even_increasing: bool
    f3_dominated: bool
    f4_limits: bool
    criticality: str
    C_of_F: Optional[float]
    infinity_limit: Optional[float]
    witnesses: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return self.f1_smooth and self.f2_even_increasing and self.f3_dominated and self.f4_limits


def check_growth_conditions(spec: NonlinearitySpec, params: MTParams) -> GrowthReport:
    N = params.N
    p = N / (N - 1)
    # cap the grid where alpha_beta * t^p stays below exp overflow
    t_safe = min(1e2, (690.0 / params.alpha_beta) ** (1.0 / p))
    ts = np.geomspace(1e-8, t_safe, 200)
    F = eval_F(spec, params, ts)
    witnesses = {}

    f1 = bool(np.all(np.isfinite(F)))
    if not f1:
        witnesses["f1"] = float(ts[np.argmax(~np.isfinite(F))])

    even = np.allclose(eval_F(spec, params, -ts), F, rtol=0, atol=0)
    increasing = bool(np.all(np.diff(F) > -1e-15 * np.maximum(F[1:], 1e-300)))
    f2 = even and increasing
    if not increasing:
        witnesses["f2"] = float(ts[1:][np.diff(F) <= 0][0])

    bound = phi_truncated_exp(N, params.alpha_beta * ts**p)
    ok3 = (F >= -1e-300) & (F <= bound * (1 + 1e-10) + 1e-300)
    f3 = bool(np.all(ok3))
    if not f3:
        witnesses["f3"] = float(ts[~ok3][0])

    # near-infinity limit of F(t) e^{-alpha_beta t^p}, sampled on the largest
    # arguments that keep e^{alpha_beta t^p} representable
    t_inf = t_safe * np.array([0.5, 0.7, 0.85, 0.98])
    with np.errstate(over="ignore"):
        ratios = np.array(
            [eval_F(spec, params, t) * math.exp(-params.alpha_beta * t**p) for t in t_inf]
        )
    if np.all(np.abs(ratios - 1.0) < 1e-3):
        criticality, inf_limit = "critical", 1.0
    elif np.all(np.abs(ratios) < 1e-3) or np.all(np.diff(np.abs(ratios)) < 0):
        criticality, inf_limit = "subcritical", 0.0
    else:
        criticality, inf_limit = "critical", float(ratios[-1])
        witnesses["f4_infinity_limit"] = float(ratios[-1])

    try:
        cf = c_of_F(spec, params)
        f4 = True
    except NoLimitError:
        cf, f4 = None, False
        witnesses["f4"] = "C(F) limit did not stabilize"
    if f4 and spec.C_of_F is not None and abs(cf - spec.C_of_F) > 1e-3 * max(abs(cf), 1e-12):
        f4 = False
        witnesses["f4"] = f"declared C(F)={spec.C_of_F} vs sampled {cf}"

    return GrowthReport(
        f1_smooth=f1,
        f2_even_increasing=f2,
        f3_dominated=f3,
        f4_limits=f4,
        criticality=criticality,
        C_of_F=cf,
        infinity_limit=inf_limit,
        witnesses=witnesses,
    )
