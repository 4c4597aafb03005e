"""Problem dimensions and the exact unbiased-risk (SURE) formulas.

Model and conventions
---------------------
Observations X ~ N_p(theta, sigma^2 I_p) and S ~ sigma^2 chi^2_n are
independent, with p >= 3 and n >= 3, and both theta and sigma^2 unknown.
Estimators of theta take the shrinkage form

    delta_phi(X, S) = (1 - phi(W)/W) X,      W = ||X||^2 / S,

and incur scaled quadratic loss ||d - theta||^2 / sigma^2.  For absolutely
continuous phi with finite component expectations, the statistic

    p + (n+2) D_phi(W)

is an unbiased estimate of the risk, where

    D_phi(w) = {phi(w) - 2 c_pn} phi(w) / w - d_n phi'(w) {1 + phi(w)},
    c_pn = (p-2)/(n+2),   d_n = 4/(n+2).

The unbiased estimate of the risk *difference* between delta_phi and
delta_{phi+g} is (n+2) Delta(w) with

    Delta(w; phi, g) = D_phi(w) - D_{phi+g}(w)
                     = g(w) {Delta1(w; phi) + Delta2(w; phi, g)},
    Delta1(w; phi)   = 2 (c_pn - phi(w))/w + d_n phi'(w),
    Delta2(w; phi,g) = -g(w)/w + d_n g'(w) + d_n (g'(w)/g(w)) {1 + phi(w)}.

Delta2 needs g(w) != 0; Delta itself does not, so ``delta`` is always computed
as the difference of two D_phi evaluations and never divides by g.

The sharp-boundary constant used throughout classification is

    beta_star = d_n (1 + c_pn) / 2 = 2 (p+n) / (n+2)^2.

Edge convention at w = 0: when phi(0) = 0 and phi' is right-continuous at 0,
the phi(w)^2/w term vanishes in the limit and D_phi(0) = -d_n phi'(0+).  That
continuous extension is a choice of this library (the formulas above are
stated for w > 0); inputs with phi(0) != 0 are rejected at w = 0.

All operations are pure functions of their arguments and accept either a
scalar w or an ndarray of w values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .families import TailProfile

__all__ = [
    "ProblemDims",
    "Constants",
    "ShrinkageFunction",
    "SurePoint",
    "EvaluationError",
    "ZeroPerturbationError",
    "constants",
    "d_phi",
    "sure_risk_estimate",
    "delta1",
    "delta2",
    "delta",
]

ArrayLike = Union[float, np.ndarray]


class EvaluationError(ValueError):
    """A shrinkage function (or its derivative) was non-finite at some w."""

    def __init__(self, message: str, w: float):
        super().__init__(message)
        self.w = w


class ZeroPerturbationError(ValueError):
    """Delta2 requested at a zero of g; the caller should use delta() instead."""


@dataclass(frozen=True)
class ProblemDims:
    """Mean dimension p and residual degrees of freedom n (both >= 3)."""

    p: int
    n: int

    def __post_init__(self) -> None:
        if int(self.p) != self.p or int(self.n) != self.n:
            raise ValueError("p and n must be integers")
        if self.p < 3 or self.n < 3:
            raise ValueError(f"require p >= 3 and n >= 3, got p={self.p}, n={self.n}")


@dataclass(frozen=True)
class Constants:
    """Derived constants c_pn = (p-2)/(n+2), d_n = 4/(n+2), beta_star."""

    c_pn: float
    d_n: float
    beta_star: float


@lru_cache(maxsize=None)
def constants(dims: ProblemDims) -> Constants:
    """Evaluate the closed forms; beta_star = d_n (1 + c_pn)/2 = 2(p+n)/(n+2)^2."""
    c = (dims.p - 2) / (dims.n + 2)
    d = 4.0 / (dims.n + 2)
    return Constants(c_pn=c, d_n=d, beta_star=0.5 * d * (1.0 + c))


@dataclass(frozen=True)
class ShrinkageFunction:
    """An evaluatable shrinkage multiplier phi with derivative and tail hints.

    ``eval`` and ``deriv`` must be pure and accept scalar or ndarray w >= 0.
    Instances are immutable and safe to share across threads.
    """

    eval: Callable[[ArrayLike], ArrayLike]
    deriv: Callable[[ArrayLike], ArrayLike]
    label: str
    tail: Optional["TailProfile"] = None

    def plus(self, g: "ShrinkageFunction", label: str | None = None) -> "ShrinkageFunction":
        """The pointwise sum phi + g (the competing estimator's multiplier)."""
        return ShrinkageFunction(
            eval=lambda w, _p=self.eval, _g=g.eval: _p(w) + _g(w),
            deriv=lambda w, _p=self.deriv, _g=g.deriv: _p(w) + _g(w),
            label=label or f"({self.label})+({g.label})",
            tail=None,
        )

    def with_tail(self, tail: "TailProfile") -> "ShrinkageFunction":
        return replace(self, tail=tail)


@dataclass(frozen=True)
class SurePoint:
    """Pointwise SURE decomposition: risk_estimate = p + (n+2) d_phi."""

    w: float
    d_phi: float
    risk_estimate: float


def _eval_pair(phi: ShrinkageFunction, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pv = np.asarray(phi.eval(w), dtype=float)
    dv = np.asarray(phi.deriv(w), dtype=float)
    for name, arr in (("phi", pv), ("phi'", dv)):
        bad = ~np.isfinite(arr)
        if np.any(bad):
            w_bad = float(np.asarray(w)[bad].flat[0])
            raise EvaluationError(f"{name} non-finite for '{phi.label}' at w={w_bad}", w_bad)
    return pv, dv


def _as_w_array(w: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("w must be >= 0")
    return arr, arr.ndim == 0


def d_phi(phi: ShrinkageFunction, w: ArrayLike, dims: ProblemDims) -> ArrayLike:
    """D_phi(w) = {phi - 2 c_pn} phi / w - d_n phi' {1 + phi}.

    At w = 0 the continuous extension -d_n phi'(0+) is used, valid only when
    phi(0) = 0 (raises EvaluationError otherwise).
    """
    k = constants(dims)
    arr, scalar = _as_w_array(w)
    pv, dv = _eval_pair(phi, arr)
    zero = arr == 0.0
    if np.any(zero):
        p0 = pv[zero] if pv.ndim else pv
        if np.any(np.atleast_1d(p0) != 0.0):
            raise EvaluationError(
                f"D_phi(0) undefined: phi(0) != 0 for '{phi.label}'", 0.0
            )
    with np.errstate(divide="ignore", invalid="ignore"):
        quad_term = (pv - 2.0 * k.c_pn) * pv / arr
    out = np.where(zero, 0.0, quad_term) - k.d_n * dv * (1.0 + pv)
    return float(out) if scalar else out


def sure_risk_estimate(phi: ShrinkageFunction, w: float, dims: ProblemDims) -> SurePoint:
    """Pointwise SURE value p + (n+2) D_phi(w) (may be negative pointwise)."""
    d = d_phi(phi, w, dims)
    return SurePoint(w=float(w), d_phi=float(d), risk_estimate=dims.p + (dims.n + 2) * float(d))


def delta1(phi: ShrinkageFunction, w: ArrayLike, dims: ProblemDims) -> ArrayLike:
    """Delta1(w; phi) = 2 (c_pn - phi(w))/w + d_n phi'(w), for w > 0."""
    k = constants(dims)
    arr, scalar = _as_w_array(w)
    if np.any(arr == 0.0):
        raise ValueError("delta1 requires w > 0")
    pv, dv = _eval_pair(phi, arr)
    out = 2.0 * (k.c_pn - pv) / arr + k.d_n * dv
    return float(out) if scalar else out


def delta2(
    phi: ShrinkageFunction, g: ShrinkageFunction, w: ArrayLike, dims: ProblemDims
) -> ArrayLike:
    """Delta2(w; phi, g) = -g/w + d_n g' + d_n (g'/g)(1 + phi), for w > 0, g(w) != 0."""
    k = constants(dims)
    arr, scalar = _as_w_array(w)
    if np.any(arr == 0.0):
        raise ValueError("delta2 requires w > 0")
    pv, _ = _eval_pair(phi, arr)
    gv, gd = _eval_pair(g, arr)
    if np.any(gv == 0.0):
        raise ZeroPerturbationError(
            "Delta2 is undefined where g(w) = 0; use delta() which is"
        )
    out = -gv / arr + k.d_n * gd + k.d_n * (gd / gv) * (1.0 + pv)
    return float(out) if scalar else out


def delta(
    phi: ShrinkageFunction, g: ShrinkageFunction, w: ArrayLike, dims: ProblemDims
) -> ArrayLike:
    """Delta(w; phi, g) = D_phi(w) - D_{phi+g}(w).

    Computed directly from two D_phi evaluations (never divides by g), so it
    is well defined at zeros of g; where g(w) != 0 it equals
    g(w) {Delta1 + Delta2}.
    """
    return d_phi(phi, w, dims) - d_phi(phi.plus(g), w, dims)
