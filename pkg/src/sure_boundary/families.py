"""Concrete shrinkage functions, including generalized-Bayes members.

Catalog (text encodings in parentheses):

* ``Zero`` (``zero``): phi = 0, the unshrunk estimator X.
* ``Linear`` (``linear:alpha=0.5``): phi(w) = (1-alpha) w, i.e. delta = alpha X.
* ``PositivePartJS`` (``jsplus:a=0.375``): phi(w) = min(w, a), the positive-part
  James-Stein multiplier.
* ``BoundaryPhi`` (``boundary:b=1.0``): phi(w) = max(0, c_pn - b beta_star /
  log(max(w, w_floor))), a function sitting exactly on the b-scaled critical
  tail.  The default w_floor is the zero crossing exp(b beta_star / c_pn)
  capped at e^2, so phi(0) = 0 holds; only the tail shape matters to the
  classification theory, the near-origin shape is free.
* ``GBUnknown`` (``gb:a=-2,b=1.0``): the generalized Bayes multiplier under the
  scale-mixture prior with mixing density lambda^a (log 1/lambda)^b on (0,1),

      phi_{a,b}(w) = w * N(w) / D(w),
      N(w) = int_0^1 lambda^{p/2+a+1} (log 1/lambda)^b (1+w lambda)^{-(p+n)/2-1} dlambda,
      D(w) = int_0^1 lambda^{p/2+a}   (log 1/lambda)^b (1+w lambda)^{-(p+n)/2-1} dlambda,

  requiring p/2 + a + 1 > 0.  Its limit is (p/2+a+1)/(n/2-a-1); at a = -2 the
  limit equals c_pn and (log w)(c_pn - phi(w)) -> b beta_star, which is the
  critical tail rate.

Two independent quadrature routes exist for the a = -2 member: the defining
ratio above and an integration-by-parts identity

    phi_{-2,b}(w) = c_pn - (2b/(n+2)) * R(w) + boundary term,
    R(w) = int lambda^{p/2-2} L^{b-1} (1+w lambda)^{-(p+n)/2} dlambda /
           int lambda^{p/2-2} L^{b}   (1+w lambda)^{-(p+n)/2-1} dlambda,

where L = log(1/lambda).  For b > 0 the boundary term vanishes; at b = 0 the
integrated-out term leaves (2/(n+2)) (1+w)^{-(p+n)/2} / D(w), which is kept so
the identity reproduces phi exactly for every b >= 0.  Their agreement is a
theorem, asserted in tests to 1e-8 relative.

Derivatives of the generalized Bayes member come from differentiating under
the integral sign (d/dw (1+w l)^{-m} = -m l (1+w l)^{-m-1}), giving a
quotient-rule combination of four integrals; a finite-difference cross-check
is part of the test suite.

``make_shrinkage`` compiles a spec into a vectorized ShrinkageFunction.  The
generalized Bayes member is tabulated once on a dense log-spaced grid and
interpolated with a cubic spline in log w (linear below the grid, constant
above), which keeps Monte Carlo evaluation cheap; the spline and its exact
derivative are used consistently so SURE identities hold for the compiled
function itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.interpolate import CubicSpline

from .core import EvaluationError, ProblemDims, ShrinkageFunction, constants
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    log_recip,
    tanh_sinh_unit,
)

__all__ = [
    "Zero",
    "Linear",
    "PositivePartJS",
    "BoundaryPhi",
    "GBUnknown",
    "PhiSpec",
    "TailProfile",
    "Ordering",
    "parse_phi_spec",
    "encode_phi_spec",
    "make_shrinkage",
    "phi_gb_unknown",
    "phi_gb_unknown_deriv",
    "phi_gb_identity_saigo4",
    "phi_gb_limit",
    "tail_profile",
    "psi_cross_inequality",
]


# ---------------------------------------------------------------------------
# specs and text encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Linear:
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("linear: alpha must lie in [0, 1]")


@dataclass(frozen=True)
class PositivePartJS:
    a: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise ValueError("jsplus: a must be > 0")


@dataclass(frozen=True)
class BoundaryPhi:
    b: float
    w_floor: float | None = None  # None: dims-aware default, see make_shrinkage

    def __post_init__(self) -> None:
        if not self.b > 0.0:
            raise ValueError("boundary: b must be > 0")
        if self.w_floor is not None and not self.w_floor > 1.0:
            raise ValueError("boundary: w_floor must be > 1")


@dataclass(frozen=True)
class GBUnknown:
    a: float
    b: float = 0.0

    def __post_init__(self) -> None:
        if not self.b >= 0.0:
            raise ValueError("gb: b must be >= 0")

    def validate_for(self, dims: ProblemDims) -> None:
        if not dims.p / 2 + self.a + 1 > 0:
            raise ValueError(
                f"gb: requires p/2 + a + 1 > 0, got p={dims.p}, a={self.a}"
            )


PhiSpec = Union[Zero, Linear, PositivePartJS, BoundaryPhi, GBUnknown]


def _fmt(x: float) -> str:
    return repr(float(x))


def encode_phi_spec(spec: PhiSpec) -> str:
    """Canonical text encoding; parse_phi_spec(encode_phi_spec(s)) == s."""
    if isinstance(spec, Zero):
        return "zero"
    if isinstance(spec, Linear):
        return f"linear:alpha={_fmt(spec.alpha)}"
    if isinstance(spec, PositivePartJS):
        return f"jsplus:a={_fmt(spec.a)}"
    if isinstance(spec, BoundaryPhi):
        if spec.w_floor is None:
            return f"boundary:b={_fmt(spec.b)}"
        return f"boundary:b={_fmt(spec.b)},w_floor={_fmt(spec.w_floor)}"
    if isinstance(spec, GBUnknown):
        return f"gb:a={_fmt(spec.a)},b={_fmt(spec.b)}"
    raise TypeError(f"not a PhiSpec: {spec!r}")


def parse_phi_spec(text: str) -> PhiSpec:
    """Parse the CLI encoding, e.g. ``zero``, ``jsplus:a=0.375``, ``gb:a=-2,b=1``."""
    head, _, rest = text.strip().partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"malformed phi spec parameter {item!r} in {text!r}")
            params[key.strip()] = float(value)
    try:
        if head == "zero":
            if params:
                raise ValueError("zero takes no parameters")
            return Zero()
        if head == "linear":
            return Linear(alpha=params.pop("alpha"))
        if head == "jsplus":
            return PositivePartJS(a=params.pop("a"))
        if head == "boundary":
            return BoundaryPhi(b=params.pop("b"), w_floor=params.pop("w_floor", None))
        if head == "gb":
            return GBUnknown(a=params.pop("a"), b=params.pop("b", 0.0))
    except KeyError as exc:
        raise ValueError(f"phi spec {text!r} is missing parameter {exc}") from None
    raise ValueError(f"unknown phi spec family {head!r}")


# ---------------------------------------------------------------------------
# tail profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailProfile:
    """Tail behaviour of a shrinkage function.

    phi_limit is lim phi(w) (math.inf when unbounded); b_hat is the fitted
    coefficient in phi(w) ~ c_pn - b_hat beta_star / log w, defined only when
    phi_limit is finite and close enough to c_pn for the fit to be meaningful;
    fit_quality is the max absolute residual of that fit over the fit window.
    """

    phi_limit: float
    b_hat: float | None = None
    fit_quality: float | None = None


# growth-detection and fit-window knobs for tail_profile
_INF_SLOPE = 0.15
_FIT_B_MAX = 6.0


def tail_profile(
    phi: ShrinkageFunction, dims: ProblemDims, w_grid: np.ndarray
) -> TailProfile:
    """Estimate phi_limit and the critical-tail coefficient b_hat from a grid.

    The grid must be ascending, span at least [1e3, 1e8] and hold >= 20
    points.  b_hat is the least-squares (constant-model) fit of
    (log w)(c_pn - phi(w)) ~ b beta_star over the top half of the grid in
    log w; the limit converges at O(1/log w) so early points would bias it.
    """
    w = np.asarray(w_grid, dtype=float)
    if w.ndim != 1 or len(w) < 20:
        raise ValueError("w_grid must be 1-d with at least 20 points")
    if np.any(np.diff(w) <= 0):
        raise ValueError("w_grid must be strictly ascending")
    if w[0] > 1e3 or w[-1] < 1e8:
        raise ValueError("w_grid must span at least [1e3, 1e8]")
    k = constants(dims)
    vals = np.asarray(phi.eval(w), dtype=float)
    if not np.all(np.isfinite(vals)):
        w_bad = float(w[~np.isfinite(vals)][0])
        raise EvaluationError(f"phi non-finite at w={w_bad}", w_bad)

    # unbounded growth: positive log-log slope across the top decade
    top = w >= w[-1] / 10.0
    if np.all(vals[top] > 0.0):
        slope = np.polyfit(np.log(w[top]), np.log(vals[top]), 1)[0]
    else:
        slope = 0.0
    if slope > _INF_SLOPE and vals[-1] > 2.0 * (1.0 + k.c_pn):
        return TailProfile(phi_limit=math.inf)

    phi_limit = float(vals[-1])
    # b_hat only makes sense when the limit is c_pn at a resolvable rate
    if abs(phi_limit - k.c_pn) > _FIT_B_MAX * k.beta_star / math.log(w[-1]):
        return TailProfile(phi_limit=phi_limit)

    log_w = np.log(w)
    fit = log_w >= 0.5 * (log_w[0] + log_w[-1])
    y = log_w[fit] * (k.c_pn - vals[fit])
    b_hat = float(np.mean(y) / k.beta_star)
    fit_quality = float(np.max(np.abs(y - b_hat * k.beta_star)))
    return TailProfile(phi_limit=phi_limit, b_hat=b_hat, fit_quality=fit_quality)


# ---------------------------------------------------------------------------
# generalized Bayes member: exact quadrature routes
# ---------------------------------------------------------------------------

def _gb_integral(
    q: float, b: float, w: float, m: float, cfg: QuadratureConfig
) -> float:
    """int_0^1 lambda^q (log 1/lambda)^b (1 + w lambda)^{-m} dlambda.

    Handles q > -1 at lambda -> 0 and, for -1 < b < 0, the integrable
    (1-lambda)^b singularity at lambda -> 1 via the stable complement form.
    """

    def f(lam: np.ndarray, lam_c: np.ndarray) -> np.ndarray:
        out = lam**q * np.power(1.0 + w * lam, -m)
        if b != 0.0:
            out = out * log_recip(lam, lam_c) ** b
        return out

    return tanh_sinh_unit(f, cfg, singular_exponent=q, log_power=max(b, 0.0))


def phi_gb_limit(a: float, dims: ProblemDims) -> float:
    """lim_w phi_{a,L}(w) = (p/2 + a + 1)/(n/2 - a - 1) for slowly varying L."""
    return (dims.p / 2 + a + 1) / (dims.n / 2 - a - 1)


def phi_gb_unknown(
    a: float,
    b: float,
    w: float,
    dims: ProblemDims,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """The generalized Bayes multiplier phi_{a,b}(w) = w N(w)/D(w) (exact route)."""
    GBUnknown(a=a, b=b).validate_for(dims)
    if w < 0:
        raise ValueError("w must be >= 0")
    if w == 0.0:
        return 0.0
    m = (dims.p + dims.n) / 2 + 1
    q = dims.p / 2 + a
    num = _gb_integral(q + 1.0, b, w, m, cfg)
    den = _gb_integral(q, b, w, m, cfg)
    return w * num / den


def phi_gb_unknown_deriv(
    a: float,
    b: float,
    w: float,
    dims: ProblemDims,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """d/dw of phi_{a,b} by differentiation under the integral sign."""
    GBUnknown(a=a, b=b).validate_for(dims)
    if not w > 0:
        raise ValueError("derivative route requires w > 0")
    m = (dims.p + dims.n) / 2 + 1
    q = dims.p / 2 + a
    num = _gb_integral(q + 1.0, b, w, m, cfg)
    den = _gb_integral(q, b, w, m, cfg)
    dnum = -m * _gb_integral(q + 2.0, b, w, m + 1.0, cfg)
    dden = -m * _gb_integral(q + 1.0, b, w, m + 1.0, cfg)
    return num / den + w * (dnum * den - num * dden) / den**2


def phi_gb_identity_saigo4(
    b: float,
    w: float,
    dims: ProblemDims,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """Independent integration-by-parts route to phi_{-2,b}(w).

    c_pn - (2b/(n+2)) R(w), minus the lambda = 1 boundary contribution
    (2/(n+2)) (1+w)^{-(p+n)/2} / D(w) which is nonzero only at b = 0.
    """
    if b < 0:
        raise ValueError("b must be >= 0")
    if not w > 0:
        raise ValueError("identity route requires w > 0")
    k = constants(dims)
    m0 = (dims.p + dims.n) / 2
    q = dims.p / 2 - 2.0
    den = _gb_integral(q, b, w, m0 + 1.0, cfg)
    out = k.c_pn
    if b > 0.0:
        num = _gb_integral(q, b - 1.0, w, m0, cfg)
        out -= (2.0 * b / (dims.n + 2)) * num / den
    else:
        out -= (2.0 / (dims.n + 2)) * (1.0 + w) ** (-m0) / den
    return out


class Ordering(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def psi_cross_inequality(
    b: float,
    b_ref: float,
    w: float,
    dims: ProblemDims,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> Ordering:
    """Order phi_{-2,b}(w) against phi_{-2,b_ref}(w).

    Reweighting the defining integrals by (log 1/lambda)^{b - b_ref} shifts
    posterior mass toward smaller lambda when b > b_ref, so the monotone
    comparison gives phi_{-2,b} <= phi_{-2,b_ref}; the ordering is reversed
    for b < b_ref and is an equality at b = b_ref.
    """
    lhs = phi_gb_unknown(-2.0, b, w, dims, cfg)
    rhs = phi_gb_unknown(-2.0, b_ref, w, dims, cfg)
    tol = 1e-10 * (1.0 + max(abs(lhs), abs(rhs)))
    if abs(lhs - rhs) <= tol:
        return Ordering.EQUAL
    return Ordering.LESS if lhs < rhs else Ordering.GREATER


# ---------------------------------------------------------------------------
# compiled (vectorized) shrinkage functions
# ---------------------------------------------------------------------------

def _scalar_or_array(w, out):
    return float(out) if np.ndim(w) == 0 else out


# tabulation window for the generalized Bayes spline, in log w
_GB_LOG_LO = math.log(1e-9)
_GB_LOG_HI = math.log(1e13)
_GB_STEP = 0.1


@lru_cache(maxsize=None)
def _gb_table(a: float, b: float, p: int, n: int, rel_tol: float):
    dims = ProblemDims(p, n)
    cfg = QuadratureConfig(rel_tol=rel_tol, abs_tol=1e-16)
    x = np.arange(_GB_LOG_LO, _GB_LOG_HI + _GB_STEP / 2, _GB_STEP)
    vals = np.array([phi_gb_unknown(a, b, math.exp(xi), dims, cfg) for xi in x])
    spline = CubicSpline(x, vals)
    return spline, spline.derivative(), float(x[0]), float(x[-1]), float(vals[0]), float(vals[-1])


def _make_gb(spec: GBUnknown, dims: ProblemDims, cfg: QuadratureConfig) -> ShrinkageFunction:
    spec.validate_for(dims)
    spline, dspline, x_lo, x_hi, v_lo, v_hi = _gb_table(
        float(spec.a), float(spec.b), dims.p, dims.n, cfg.rel_tol
    )
    w_lo = math.exp(x_lo)
    slope0 = v_lo / w_lo  # phi is asymptotically linear at the origin

    def ev(w):
        arr = np.asarray(w, dtype=float)
        x = np.log(np.maximum(arr, w_lo))
        out = spline(np.clip(x, x_lo, x_hi))
        out = np.where(x > x_hi, v_hi, out)
        out = np.where(arr < w_lo, slope0 * arr, out)
        return _scalar_or_array(w, out)

    def dv(w):
        arr = np.asarray(w, dtype=float)
        x = np.log(np.maximum(arr, w_lo))
        with np.errstate(divide="ignore"):
            out = dspline(np.clip(x, x_lo, x_hi)) / arr
        out = np.where(x > x_hi, 0.0, out)
        out = np.where(arr < w_lo, slope0, out)
        return _scalar_or_array(w, out)

    limit = phi_gb_limit(spec.a, dims)
    tail = TailProfile(
        phi_limit=limit, b_hat=spec.b if spec.a == -2.0 else None, fit_quality=None
    )
    return ShrinkageFunction(eval=ev, deriv=dv, label=encode_phi_spec(spec), tail=tail)


def resolve_w_floor(spec: BoundaryPhi, dims: ProblemDims) -> float:
    """Default floor: the zero crossing exp(b beta_star / c_pn), capped at e^2.

    Any floor at or below the crossing leaves phi = 0 near the origin, which
    is what keeps phi(0) = 0; a fixed floor independent of b would not.
    """
    if spec.w_floor is not None:
        return spec.w_floor
    k = constants(dims)
    return min(math.exp(2.0), math.exp(spec.b * k.beta_star / k.c_pn))


def make_shrinkage(
    spec: PhiSpec,
    dims: ProblemDims,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> ShrinkageFunction:
    """Compile a PhiSpec into a vectorized, pure ShrinkageFunction."""
    k = constants(dims)
    label = encode_phi_spec(spec)

    if isinstance(spec, Zero):
        return ShrinkageFunction(
            eval=lambda w: _scalar_or_array(w, np.zeros_like(np.asarray(w, dtype=float))),
            deriv=lambda w: _scalar_or_array(w, np.zeros_like(np.asarray(w, dtype=float))),
            label=label,
            tail=TailProfile(phi_limit=0.0),
        )

    if isinstance(spec, Linear):
        slope = 1.0 - spec.alpha
        return ShrinkageFunction(
            eval=lambda w: _scalar_or_array(w, slope * np.asarray(w, dtype=float)),
            deriv=lambda w: _scalar_or_array(
                w, np.full_like(np.asarray(w, dtype=float), slope)
            ),
            label=label,
            tail=TailProfile(phi_limit=math.inf if slope > 0.0 else 0.0),
        )

    if isinstance(spec, PositivePartJS):
        a = spec.a
        return ShrinkageFunction(
            eval=lambda w: _scalar_or_array(w, np.minimum(np.asarray(w, dtype=float), a)),
            deriv=lambda w: _scalar_or_array(
                w, np.where(np.asarray(w, dtype=float) < a, 1.0, 0.0)
            ),
            label=label,
            tail=TailProfile(phi_limit=a),
        )

    if isinstance(spec, BoundaryPhi):
        floor = resolve_w_floor(spec, dims)
        coeff = spec.b * k.beta_star

        def ev(w):
            arr = np.maximum(np.asarray(w, dtype=float), floor)
            return _scalar_or_array(w, np.maximum(0.0, k.c_pn - coeff / np.log(arr)))

        def dv(w):
            arr = np.asarray(w, dtype=float)
            lw = np.log(np.maximum(arr, floor))
            active = (arr > floor) & (k.c_pn - coeff / lw > 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = coeff / (arr * lw**2)
            return _scalar_or_array(w, np.where(active, slope, 0.0))

        return ShrinkageFunction(
            eval=ev,
            deriv=dv,
            label=label,
            tail=TailProfile(phi_limit=k.c_pn, b_hat=spec.b, fit_quality=None),
        )

    if isinstance(spec, GBUnknown):
        return _make_gb(spec, dims, cfg)

    raise TypeError(f"not a PhiSpec: {spec!r}")
