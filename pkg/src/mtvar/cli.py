"""Command-line entry point.

Subcommands: green, limits, aux1d, optimize, rearrange, verify. Every run
writes a JSON artifact {tool_version, config, results} (and CSV files where
profiles/tables are produced), echoes enough metadata to rerun it exactly,
and is deterministic for a fixed --seed. The thread count of the underlying
BLAS/OpenMP pools can be pinned with the MTVAR_THREADS environment variable
before NumPy is imported, so it is honored only when the CLI is the process
entry point.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

_THREADS = os.environ.get("MTVAR_THREADS")
if _THREADS:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, _THREADS)

import numpy as np

from . import __version__
from .constants import MTParams
from .errors import DomainError
from .nonlinearity import NonlinearitySpec


def _spec_from_args(params: MTParams, args) -> NonlinearitySpec:
    if args.spec == "phi-critical":
        return NonlinearitySpec.phi_critical(params)
    if args.spec == "phi-minus-power":
        return NonlinearitySpec.phi_minus_power(params, args.lam)
    if args.spec == "polynomial":
        if not args.coeffs:
            raise DomainError("polynomial spec requires --coeffs")
        return NonlinearitySpec.polynomial(params, [float(c) for c in args.coeffs.split(",")])
    raise DomainError(f"unknown spec kind {args.spec!r}")


def _write_artifact(path, config: dict, results: dict):
    config = {k: v for k, v in config.items() if k != "func"}
    doc = {"tool_version": __version__, "config": config, "results": results}
    text = json.dumps(doc, indent=2, default=float)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_green(args):
    from .green import solve_green

    table = solve_green(args.N, r_min=args.rmin, r_max=args.rmax, tol=args.tol,
                        M=args.grid_size)
    if args.table:
        table.to_csv(args.table)
    _write_artifact(args.out, vars(args), {
        "A0": table.A0,
        "fit_error": table.residual_report.get("fit_error"),
        "residuals": {k: v for k, v in table.residual_report.items()
                      if isinstance(v, float)},
        "table_csv": args.table,
    })
    return 0


def _cmd_limits(args):
    from .green import solve_green
    from .limits import SequenceSpec, compute_limits
    from .profiles import functional_J

    params = MTParams(N=args.N, beta=args.beta)
    spec = _spec_from_args(params, args)
    green = solve_green(args.N)
    lv = compute_limits(params, spec, green.A0)
    diagnostics = {}
    if args.schedule:
        sched = [float(x) for x in args.schedule.split(",")]
        for kind in ("li-ruf", "vanishing"):
            profiles = SequenceSpec(kind, sched, params, spec).generate(green=green)
            diagnostics[kind] = {"schedule": sched,
                                 "J": [functional_J(u, spec, params) for u in profiles]}
    _write_artifact(args.out, vars(args), {
        "N": lv.N, "beta": lv.beta, "criticality": lv.criticality,
        "A0": lv.A0, "C_of_F": lv.C_of_F,
        "d_nvl": lv.d_nvl, "d_ncl": lv.d_ncl,
        "schedule_diagnostics": diagnostics,
    })
    return 0


def _cmd_aux1d(args):
    from .green import solve_green
    from .halfline import aux_brute, aux_expansion, aux_gamma, aux_maximizer

    params = MTParams(N=args.N, beta=args.beta)
    green = solve_green(args.N)
    gamma = aux_gamma(args.a, args.b, params, green)
    w, sup_value = aux_maximizer(args.a, args.b, params, green)
    brute_value, _ = aux_brute(args.a, args.b, params,
                               grid_size=args.grid_size, seed=args.seed)
    if args.profile:
        w.to_csv(args.profile, b=args.b, sup_value=sup_value)
    _write_artifact(args.out, vars(args), {
        "gamma": gamma,
        "sup_value": sup_value,
        "brute_value": brute_value,
        "expansion": aux_expansion(args.a, args.b, params, green.A0),
        "profile_csv": args.profile,
    })
    return 0


def _cmd_optimize(args):
    from .green import solve_green
    from .limits import compute_limits
    from .extremal import existence_certificate, maximize_MT

    params = MTParams(N=args.N, beta=args.beta)
    spec = _spec_from_args(params, args)
    green = solve_green(args.N)
    options = {"green": green, "max_iter": args.max_iter}
    report = maximize_MT(params, spec, options)
    cert = existence_certificate(report, compute_limits(params, spec, green.A0))
    if args.profile:
        report.best_profile.to_csv(args.profile, params)
    _write_artifact(args.out, vars(args), {
        "best_value": report.best_value,
        "starts": report.starts,
        "iterations": report.iterations,
        "certificate": cert,
        "profile_csv": args.profile,
    })
    return 0


def _cmd_rearrange(args):
    from .profiles import RadialProfile, sobolev_energy
    from .rearrange import SampledFunction, polya_szego_check, symmetric_rearrangement

    u, params = RadialProfile.from_csv(args.input)
    f = SampledFunction.from_profile(u, params.N)
    rearranged = symmetric_rearrangement(f, params.N)
    grad_before, grad_after = polya_szego_check(f, params.N, params)
    if args.output:
        rearranged.to_csv(args.output, params)
    _write_artifact(args.out, vars(args), {
        "grad_before": grad_before,
        "grad_after": grad_after,
        "polya_szego_ok": bool(grad_after <= grad_before * (1 + 1e-10)),
        "output_csv": args.output,
    })
    return 0


def _cmd_verify(args):
    checks = _verify_battery(seed=args.seed)
    width = max(len(name) for name, _ in checks)
    ok = True
    results = {}
    for name, passed in checks:
        ok &= passed
        results[name] = bool(passed)
        print(f"{name:<{width}}  {'PASS' if passed else 'FAIL'}")
    _write_artifact(args.out, vars(args), results)
    return 0 if ok else 1


def _verify_battery(seed: int = 0):
    import math

    from .extremal import compute_B_N, compute_B_N_ground_state, gns_quotient
    from .green import bessel_K0, solve_green
    from .halfline import (aux_brute, aux_gamma, aux_maximizer,
                           transfer_identities)
    from .limits import d_ncl
    from .profiles import RadialProfile, elementary_inequality_gap

    rng = np.random.default_rng(seed)
    checks = []

    green = solve_green(2)
    exact = (math.log(2.0) - 0.5772156649015329) / (2.0 * math.pi)
    checks.append(("green A0 (N=2 closed form)", abs(green.A0 - exact) <= 1e-4))
    r = np.geomspace(1e-3, 10, 200)
    k0 = bessel_K0(r) / (2.0 * math.pi)
    checks.append(("green pointwise vs K0/2pi",
                   float(np.max(np.abs(green.g(r) - k0) / k0)) <= 1e-4))
    target = 4.0 * math.pi * math.exp(1.0 - 2.0 * 0.5772156649015329)
    params = MTParams(N=2)
    from .nonlinearity import NonlinearitySpec
    spec = NonlinearitySpec.phi_critical(params)
    checks.append(("concentration limit closed form",
                   abs(d_ncl(params, spec, green.A0) - target) <= 1e-3 * target))

    _, sup = aux_maximizer(10.0, 1.0, params, green)
    brute, _ = aux_brute(10.0, 1.0, params, seed=seed)
    checks.append(("auxiliary problem cross-check", abs(brute - sup) <= 5e-3 * sup))

    ok = True
    for _ in range(5):
        radii = np.geomspace(1e-4, 50, 200)
        vals = np.exp(-radii * rng.uniform(0.5, 2.0))
        u = RadialProfile(radii, vals - vals[-1])
        ids = transfer_identities(u, spec, params)
        ok &= all(abs(l - rr) <= 1e-5 * max(abs(rr), 1e-12) for l, rr in ids.values())
    checks.append(("transfer identities", ok))

    ok = True
    for _ in range(200):
        a, b = rng.uniform(0, 5, 2)
        gap = elementary_inequality_gap(a, b, rng.uniform(0.01, 2.0), rng.uniform(1.1, 4.0))
        ok &= gap >= -1e-12
    checks.append(("elementary inequality gap", ok))

    B2, umax = compute_B_N(2)
    checks.append(("B_N dual-method agreement",
                   abs(B2 - compute_B_N_ground_state(2)) <= 0.02 * B2))
    scaled = RadialProfile(umax.radii / 2.0, 3.0 * umax.values)
    checks.append(("B_N quotient invariance",
                   abs(gns_quotient(scaled, params) - B2) <= 1e-6 * B2))
    return checks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtvar",
        description="Constants, limits, and extremal problems of singular "
                    "Moser-Trudinger inequalities on R^N.",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("green", help="solve the radial Green function, extract A0")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--rmin", type=float, default=1e-6)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--grid-size", type=int, default=4096)
    p.add_argument("--table", help="CSV path for the (r, G, G') table")
    p.add_argument("--out", help="JSON artifact path (default: stdout)")
    p.set_defaults(func=_cmd_green)

    p = sub.add_parser("limits", help="normalized vanishing/concentrating limits")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--spec", default="phi-critical",
                   choices=("phi-critical", "phi-minus-power", "polynomial"))
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--coeffs", help="comma-separated near-zero coefficients")
    p.add_argument("--schedule", help="comma-separated decreasing schedule")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("aux1d", help="auxiliary half-line variational problem")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--grid-size", type=int, default=512)
    p.add_argument("--profile", help="CSV path for the maximizer")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_aux1d)

    p = sub.add_parser("optimize", help="maximize the weighted functional")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--spec", default="phi-critical",
                   choices=("phi-critical", "phi-minus-power", "polynomial"))
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--coeffs")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--profile", help="CSV path for the best profile")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("rearrange", help="symmetric decreasing rearrangement of a profile CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="CSV path for the rearranged profile")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rearrange)

    p = sub.add_parser("verify", help="run the invariant battery, print pass/fail")
    p.add_argument("what", nargs="?", default="all", choices=("all",))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ValueError, RuntimeError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
