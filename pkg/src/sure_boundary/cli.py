"""Command line front end.

Subcommands: classify, dominate, verify, simulate, sure-check, asymptotics,
known-variance, crosscheck.  Every run emits a single report (JSON by
default, CSV for simulate) whose "config" block contains the exact
key=value pairs needed to reproduce it; identical configs produce
byte-identical reports.

Exit status: 0 success, 2 classification came back Indeterminate, 1 runtime
error, 64 usage error.  ``SURE_BOUNDARY_THREADS`` caps worker threads for
replication-chunk evaluation (sampling itself is always serial, so the cap
never changes results).
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .boundary import (
    DominatorSpec,
    MARGIN_DEFAULT,
    classify,
    construct_dominator,
    verify_domination,
)
from .core import ProblemDims
from .families import (
    make_shrinkage,
    parse_phi_spec,
    phi_gb_identity_saigo4,
    phi_gb_unknown,
    tail_profile,
)
from .known_variance import (
    PriorSpec,
    brown_classify,
    brown_integral_numeric,
    encode_l_family,
    gradient_bound_check,
    parse_l_family,
    psi_known,
    psi_known_via_identity,
    tauberian_check,
)
from .montecarlo import (
    SimConfig,
    encode_model,
    estimate_risk,
    parse_model,
    sure_unbiasedness_test,
)
from .quadrature import QuadratureConfig
from .reports import canonical_csv, canonical_json, format_real, write_text

USAGE_EXIT = 64

SIMULATE_CSV_HEADER = (
    "theta_norm",
    "sigma",
    "model",
    "reps",
    "seed",
    "mean_loss",
    "se_loss",
    "sure_mean",
    "se_sure",
)


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    Indeterminate verdicts and use 64 (EX_USAGE) instead."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _canon(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_text(config: dict[str, str]) -> str:
    """Canonical key=value rendering (sorted, LF separated)."""
    return "".join(f"{k}={config[k]}\n" for k in sorted(config))


def parse_config_file(path: str) -> list[str]:
    """Expand a key=value file into CLI tokens (key -> --key value)."""
    tokens: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line {line!r} in {path}")
            tokens.append("--" + key.strip().replace("_", "-"))
            tokens.append(value.strip())
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i == 0:
        raise ValueError("--config must follow a subcommand")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    tokens = parse_config_file(argv[i + 1])
    # config tokens go right after the subcommand so explicit flags win
    rest = argv[:i] + argv[i + 2 :]
    return [rest[0]] + tokens + rest[1:]


def _add_common(p: argparse.ArgumentParser, *, dims: bool = True) -> None:
    if dims:
        p.add_argument("--p", "--mean-dim", dest="p", type=int, required=True,
                       help="mean dimension p (>= 3)")
        p.add_argument("--n", "--resid-df", dest="n", type=int, required=True,
                       help="residual degrees of freedom n (>= 3)")
    p.add_argument("--out", "-o", dest="out", default=None, help="report file path")
    p.add_argument("--format", dest="format", default="json", choices=("json", "csv"),
                   help="report format")
    p.add_argument("--config", dest="config", default=None,
                   help="key=value file supplying defaults (flags override)")
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-10,
                   help="quadrature relative tolerance")


def _quad_cfg(args: argparse.Namespace) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=args.rel_tol)


def build_parser() -> _Parser:
    parser = _Parser(prog="sure-boundary", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[], help="quasi-admissibility verdict")
    _add_common(p)
    p.add_argument("--phi", required=True, help="shrinkage spec, e.g. zero, gb:a=-2,b=1.0")
    p.add_argument("--margin", type=float, default=MARGIN_DEFAULT,
                   help="dead zone half-width around the critical coefficient 1")

    p = sub.add_parser("dominate", help="construct and verify a dominating perturbation")
    _add_common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--b", "--tail-coeff", dest="b", type=float, required=True,
                   help="quasi-inadmissibility witness (> 1)")
    p.add_argument("--w-sharp-cap", dest="w_sharp_cap", type=float, default=1e10)

    p = sub.add_parser("verify", help="verify an explicit dominator spec")
    _add_common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--b", "--tail-coeff", dest="b", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--w-sharp", dest="w_sharp", type=float, required=True)
    p.add_argument("--ramp-width", dest="ramp_width", type=float, required=True)
    p.add_argument("--w-star", dest="w_star", type=float, required=True)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=800)

    p = sub.add_parser("simulate", help="Monte Carlo risk of one configuration")
    _add_common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--theta-norm", dest="theta_norm", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", default="normal", help="normal or student-t:df=5")

    p = sub.add_parser("sure-check", help="SURE unbiasedness z-score (Normal model)")
    _add_common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--theta-norm", dest="theta_norm", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("asymptotics", help="tail profile and critical-coefficient fit")
    _add_common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--w-lo", dest="w_lo", type=float, default=1e3)
    p.add_argument("--w-hi", dest="w_hi", type=float, default=1e8)
    p.add_argument("--points", type=int, default=48)

    p = sub.add_parser("known-variance", help="known-variance prior analysis")
    _add_common(p, dims=False)
    p.add_argument("--p", "--mean-dim", dest="p", type=int, required=True)
    p.add_argument("--a", "--prior-power", dest="a", type=float, required=True)
    p.add_argument("--L", dest="L", default="one", help="one or logpow:b=1.0")
    p.add_argument("--z-max", dest="z_max", type=float, default=1e8)
    p.add_argument("--r-max", dest="r_max", type=float, default=1e6)

    p = sub.add_parser("crosscheck", help="two-route identity agreement")
    _add_common(p)
    p.add_argument("--identity", required=True, choices=("saigo4", "psi"))
    p.add_argument("--b", "--tail-coeff", dest="b", type=float, required=True)
    p.add_argument("--w", type=float, default=None, help="evaluation point (saigo4)")
    p.add_argument("--v", type=float, default=None, help="evaluation point (psi)")
    p.add_argument("--tol", type=float, default=1e-8)

    return parser


def _spec_dict(spec: DominatorSpec) -> dict[str, float]:
    return {
        "nu": spec.nu,
        "w_sharp": spec.w_sharp,
        "ramp_width": spec.ramp_width,
        "b": spec.b,
        "w_star": spec.w_star,
    }


def _cert_dict(cert) -> dict[str, Any]:
    return {
        "spec": _spec_dict(cert.spec),
        "grid": [[w, d] for w, d in cert.grid],
        "min_delta_above_sharp": cert.min_delta_above_sharp,
        "zero_below_sharp": cert.zero_below_sharp,
        "verdict": cert.verdict,
    }


def _verdict_dict(verdict) -> dict[str, Any]:
    return {
        "variant": verdict.variant,
        "b_witness": verdict.b_witness,
        "w_star": verdict.w_star,
        "reason": verdict.reason,
    }


def _profile_dict(profile) -> dict[str, Any]:
    return {
        "phi_limit": profile.phi_limit,
        "b_hat": profile.b_hat,
        "fit_quality": profile.fit_quality,
    }


def _gather_config(args: argparse.Namespace, keys: Sequence[str]) -> dict[str, str]:
    cfg = {"command": args.command}
    for key in keys:
        value = getattr(args, key)
        if value is not None:
            cfg[key] = _canon(value)
    return cfg


def _emit(report: Any, args: argparse.Namespace, text: str | None = None) -> None:
    payload = text if text is not None else canonical_json(report)
    if args.out:
        write_text(args.out, payload)
    else:
        sys.stdout.write(payload)


def _cmd_classify(args) -> int:
    dims = ProblemDims(args.p, args.n)
    phi = make_shrinkage(parse_phi_spec(args.phi), dims, _quad_cfg(args))
    profile = phi.tail or tail_profile(phi, dims, np.geomspace(1e3, 1e8, 48))
    verdict = classify(phi, dims, profile, margin=args.margin)
    report = {
        "command": "classify",
        "config": _gather_config(args, ("p", "n", "phi", "margin", "format", "rel_tol")),
        "verdict": _verdict_dict(verdict),
        "tail_profile": _profile_dict(profile),
    }
    _emit(report, args)
    return 2 if verdict.variant == "Indeterminate" else 0


def _cmd_dominate(args) -> int:
    dims = ProblemDims(args.p, args.n)
    phi = make_shrinkage(parse_phi_spec(args.phi), dims, _quad_cfg(args))
    profile = phi.tail or tail_profile(phi, dims, np.geomspace(1e3, 1e8, 48))
    spec = construct_dominator(phi, dims, args.b, profile, w_sharp_cap=args.w_sharp_cap)
    cert = verify_domination(phi, spec, dims)
    report = {
        "command": "dominate",
        "config": _gather_config(
            args, ("p", "n", "phi", "b", "w_sharp_cap", "format", "rel_tol")
        ),
        "certificate": _cert_dict(cert),
    }
    _emit(report, args)
    return 0


def _cmd_verify(args) -> int:
    dims = ProblemDims(args.p, args.n)
    phi = make_shrinkage(parse_phi_spec(args.phi), dims, _quad_cfg(args))
    spec = DominatorSpec(
        nu=args.nu, w_sharp=args.w_sharp, ramp_width=args.ramp_width,
        b=args.b, w_star=args.w_star,
    )
    grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e8, args.grid_points)])
    cert = verify_domination(phi, spec, dims, grid)
    report = {
        "command": "verify",
        "config": _gather_config(
            args,
            ("p", "n", "phi", "b", "nu", "w_sharp", "ramp_width", "w_star",
             "grid_points", "format", "rel_tol"),
        ),
        "certificate": _cert_dict(cert),
    }
    _emit(report, args)
    return 0


def _sim_config(args) -> SimConfig:
    return SimConfig(
        dims=ProblemDims(args.p, args.n),
        theta_norm=args.theta_norm,
        sigma=args.sigma,
        reps=args.reps,
        seed=args.seed,
        model=parse_model(getattr(args, "model", "normal")),
    )


def _cmd_simulate(args) -> int:
    config = _sim_config(args)
    phi = make_shrinkage(parse_phi_spec(args.phi), config.dims, _quad_cfg(args))
    risk = estimate_risk(phi, config)
    keys = ("p", "n", "phi", "theta_norm", "sigma", "reps", "seed", "model",
            "format", "rel_tol")
    if args.format == "csv":
        row = (
            config.theta_norm, config.sigma, encode_model(config.model),
            config.reps, config.seed, risk.mean_loss, risk.se_loss,
            risk.sure_mean, risk.se_sure,
        )
        _emit(None, args, text=canonical_csv(SIMULATE_CSV_HEADER, [row]))
        return 0
    report = {
        "command": "simulate",
        "config": _gather_config(args, keys),
        "risk": {
            "mean_loss": risk.mean_loss,
            "se_loss": risk.se_loss,
            "sure_mean": risk.sure_mean,
            "se_sure": risk.se_sure,
            "reps": risk.reps,
        },
    }
    _emit(report, args)
    return 0


def _cmd_sure_check(args) -> int:
    args.model = "normal"
    config = _sim_config(args)
    phi = make_shrinkage(parse_phi_spec(args.phi), config.dims, _quad_cfg(args))
    check = sure_unbiasedness_test(phi, config)
    report = {
        "command": "sure-check",
        "config": _gather_config(
            args, ("p", "n", "phi", "theta_norm", "sigma", "reps", "seed",
                   "format", "rel_tol")
        ),
        "check": {
            "z": check.z,
            "mean_loss": check.mean_loss,
            "se_loss": check.se_loss,
            "sure_mean": check.sure_mean,
            "se_sure": check.se_sure,
            "reps": check.reps,
            "flagged": check.flagged,
        },
    }
    _emit(report, args)
    return 0


def _cmd_asymptotics(args) -> int:
    dims = ProblemDims(args.p, args.n)
    phi = make_shrinkage(parse_phi_spec(args.phi), dims, _quad_cfg(args))
    grid = np.geomspace(args.w_lo, args.w_hi, args.points)
    profile = tail_profile(phi, dims, grid)
    report = {
        "command": "asymptotics",
        "config": _gather_config(
            args, ("p", "n", "phi", "w_lo", "w_hi", "points", "format", "rel_tol")
        ),
        "tail_profile": _profile_dict(profile),
    }
    _emit(report, args)
    return 0


def _cmd_known_variance(args) -> int:
    prior = PriorSpec(a=args.a, L=parse_l_family(args.L))
    prior.validate_for(args.p)
    cfg = _quad_cfg(args)
    verdict = brown_classify(prior)
    z_grid = np.geomspace(10.0, args.z_max, 15)
    taub = tauberian_check(prior, args.p, z_grid, cfg)
    grad = gradient_bound_check(prior, args.p, z_grid, cfg)
    brown = brown_integral_numeric(prior, args.p, args.r_max, cfg)
    report = {
        "command": "known-variance",
        "config": _gather_config(
            args, ("p", "a", "L", "z_max", "r_max", "format", "rel_tol")
        ),
        "prior": {"a": prior.a, "L": encode_l_family(prior.L)},
        "verdict": verdict.verdict,
        "boundary": verdict.boundary,
        "tauberian_ratio_final": taub.final_ratio,
        "gradient_limit_target": grad.target,
        "gradient_value_final": grad.final_value,
        "brown_partial_integrals": [[r, v] for r, v in brown.checkpoints],
        "brown_diverges": brown.diverges,
    }
    _emit(report, args)
    return 0


def _cmd_crosscheck(args) -> int:
    dims = ProblemDims(args.p, args.n)
    cfg = _quad_cfg(args)
    points = []
    if args.identity == "saigo4":
        w_values = [args.w] if args.w is not None else [1.0, 10.0, 1e3, 1e6]
        for w in w_values:
            a_route = phi_gb_unknown(-2.0, args.b, w, dims, cfg)
            b_route = phi_gb_identity_saigo4(args.b, w, dims, cfg)
            points.append({"at": w, "route_defining": a_route,
                           "route_identity": b_route,
                           "rel_dev": abs(a_route - b_route) / (1.0 + abs(a_route))})
    else:
        v_values = [args.v] if args.v is not None else [1.0, 10.0, 100.0]
        for v in v_values:
            a_route = psi_known(args.b, v, args.p, cfg)
            b_route = psi_known_via_identity(args.b, v, args.p, cfg)
            points.append({"at": v, "route_defining": a_route,
                           "route_identity": b_route,
                           "rel_dev": abs(a_route - b_route) / (1.0 + abs(a_route))})
    max_dev = max(pt["rel_dev"] for pt in points)
    report = {
        "command": "crosscheck",
        "config": _gather_config(
            args, ("p", "n", "identity", "b", "w", "v", "tol", "format", "rel_tol")
        ),
        "points": points,
        "max_rel_dev": max_dev,
        "tol": args.tol,
        "within_tol": max_dev <= args.tol,
    }
    _emit(report, args)
    return 0 if max_dev <= args.tol else 1


_COMMANDS = {
    "classify": _cmd_classify,
    "dominate": _cmd_dominate,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "sure-check": _cmd_sure_check,
    "asymptotics": _cmd_asymptotics,
    "known-variance": _cmd_known_variance,
    "crosscheck": _cmd_crosscheck,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (OSError, ValueError) as exc:
        print(f"sure-boundary: config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps errors to status 1
        print(f"sure-boundary: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
