"""Quasi-admissibility classification and constructive domination.

The critical tail is c_pn - beta_star / log w.  With margin m (default 0.05):

* quasi-inadmissible: some b > 1 + m has phi(w) <= c_pn - b beta_star / log w
  at every grid point from a threshold w_star onward (and then an explicit
  dominating perturbation exists);
* quasi-admissible: some b < 1 - m has phi(w) >= c_pn - b beta_star / log w
  likewise, or phi diverges (unbounded phi is quasi-admissible directly);
* otherwise indeterminate.  The margin is a deliberate dead zone: the theory
  is silent exactly at b = 1, and finite grids cannot resolve it.

Since the inequalities are monotone in b, testing at the edge witnesses
b = 1 -/+ margin is sufficient: if the quasi-admissible inequality fails at
b = 1 - margin it fails for every smaller b, and symmetrically.  A verdict
additionally requires the inequality to hold over at least the last two
decades of the grid, so a one-point tail can never decide.

The constructive dominator for a quasi-inadmissible phi (with witness b and
finite limit phi_star) is

    g(w) = k(w) {log(w + e)}^{-(1+nu)},
    nu   = min(1, (2 b beta_star - d_n (1 + phi_star)) / (2 d_n (3 + phi_star))),

with k a non-decreasing continuous ramp, zero up to w_sharp.  Here k is fixed
to the clamped linear ramp clip((w - w_sharp)/ramp_width, 0, 1) so that
certificates are reproducible.  w_sharp starts at the verified inequality
threshold and doubles until the risk-difference Delta(w) = D_phi - D_{phi+g}
is nonnegative at every grid point above w_sharp (and exactly zero below,
where g vanishes identically).  Existence is a theorem; the search is capped
because the theory provides no constructive bound.

Necessary-condition diagnostics: a perturbation g solving Delta >= 0
everywhere must satisfy g(0) >= 0, g >= 0, and positivity persistence (once
strictly positive, never zero again); ``lemma_gg_witness`` searches for an
explicit Delta < 0 witness when one of these is violated.  Risk finiteness of
a shrinkage function requires liminf |phi(t)|^{d_n} / t = 0, which
``cc0_diagnostic`` probes on a log grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ProblemDims, ShrinkageFunction, constants, delta
from .families import TailProfile, tail_profile

__all__ = [
    "QuasiClass",
    "DominatorSpec",
    "DominationCertificate",
    "AssumptionReport",
    "Cc0Report",
    "ConstructionError",
    "MARGIN_DEFAULT",
    "nu_from_witness",
    "check_assumptions",
    "classify",
    "construct_dominator",
    "dominator_g",
    "verify_domination",
    "lemma_gg_witness",
    "cc0_diagnostic",
    "default_w_grid",
]

MARGIN_DEFAULT = 0.05

QUASI_ADMISSIBLE = "QuasiAdmissible"
QUASI_INADMISSIBLE = "QuasiInadmissible"
INDETERMINATE = "Indeterminate"


class ConstructionError(RuntimeError):
    """Dominator construction failed within the configured search window."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class QuasiClass:
    """Classification verdict; b_witness / w_star present except when indeterminate."""

    variant: str
    b_witness: float | None = None
    w_star: float | None = None
    reason: str | None = None

    @classmethod
    def admissible(cls, b_witness: float, w_star: float) -> "QuasiClass":
        if not b_witness < 1.0:
            raise ValueError("quasi-admissible witness requires b < 1")
        if not w_star > 1.0:
            raise ValueError("w_star must exceed 1")
        return cls(QUASI_ADMISSIBLE, b_witness=b_witness, w_star=w_star)

    @classmethod
    def inadmissible(cls, b_witness: float, w_star: float) -> "QuasiClass":
        if not b_witness > 1.0:
            raise ValueError("quasi-inadmissible witness requires b > 1")
        if not w_star > 1.0:
            raise ValueError("w_star must exceed 1")
        return cls(QUASI_INADMISSIBLE, b_witness=b_witness, w_star=w_star)

    @classmethod
    def indeterminate(cls, reason: str) -> "QuasiClass":
        return cls(INDETERMINATE, reason=reason)


@dataclass(frozen=True)
class DominatorSpec:
    """Parameters of the constructed perturbation g (see module docstring)."""

    nu: float
    w_sharp: float
    ramp_width: float
    b: float
    w_star: float

    def __post_init__(self) -> None:
        if not 0.0 < self.nu <= 1.0:
            raise ValueError("nu must lie in (0, 1]")
        if not self.ramp_width > 0.0:
            raise ValueError("ramp_width must be positive")
        if not self.b > 1.0:
            raise ValueError("dominator requires witness b > 1")


@dataclass(frozen=True)
class DominationCertificate:
    """Grid evidence for Delta >= 0 above w_sharp and Delta = 0 below."""

    spec: DominatorSpec
    grid: tuple[tuple[float, float], ...]
    min_delta_above_sharp: float
    zero_below_sharp: bool
    verdict: bool

    @property
    def trivial(self) -> bool:
        """True when g vanished on the whole grid (vacuous certificate)."""
        return all(d == 0.0 for _, d in self.grid)


def dominator_g(spec: DominatorSpec) -> ShrinkageFunction:
    """The perturbation g(w) = k(w) {log(w+e)}^{-(1+nu)} as a ShrinkageFunction."""
    nu, w_sharp, width = spec.nu, spec.w_sharp, spec.ramp_width
    expo = 1.0 + nu

    def ev(w):
        arr = np.asarray(w, dtype=float)
        k = np.clip((arr - w_sharp) / width, 0.0, 1.0)
        out = k * np.log(arr + math.e) ** (-expo)
        return float(out) if np.ndim(w) == 0 else out

    def dv(w):
        arr = np.asarray(w, dtype=float)
        le = np.log(arr + math.e)
        k = np.clip((arr - w_sharp) / width, 0.0, 1.0)
        kp = np.where((arr > w_sharp) & (arr < w_sharp + width), 1.0 / width, 0.0)
        out = kp * le ** (-expo) - k * expo * le ** (-expo - 1.0) / (arr + math.e)
        return float(out) if np.ndim(w) == 0 else out

    return ShrinkageFunction(
        eval=ev,
        deriv=dv,
        label=f"dominator:nu={nu!r},w_sharp={w_sharp!r},ramp_width={width!r}",
        tail=TailProfile(phi_limit=0.0),
    )


def default_w_grid(
    lo: float = 1e-6, hi: float = 1e8, points: int = 600, include_zero: bool = True
) -> np.ndarray:
    grid = np.geomspace(lo, hi, points)
    if include_zero:
        grid = np.concatenate([[0.0], grid])
    return grid


# ---------------------------------------------------------------------------
# assumption diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    """Grid diagnostics for the regularity assumptions on phi.

    a1: phi(0) = 0 and phi >= 0; a2: at most max_extrema sign changes of
    phi'; a3: phi' finite everywhere sampled; a4: tail values of
    w phi'(w)/phi(w) inside [-eps, 1+eps] (ratio taken as 0 where phi = 0).
    Failures are report entries, never exceptions.
    """

    a1_ok: bool
    a2_ok: bool
    a2_sign_changes: int
    a3_ok: bool
    a4_ok: bool
    a4_ratio_range: tuple[float, float]

    @property
    def all_ok(self) -> bool:
        return self.a1_ok and self.a2_ok and self.a3_ok and self.a4_ok


def check_assumptions(
    phi: ShrinkageFunction,
    w_grid: np.ndarray | None = None,
    *,
    max_extrema: int = 12,
    eps: float = 0.05,
    tail_from: float = 1e3,
) -> AssumptionReport:
    grid = default_w_grid(points=400) if w_grid is None else np.asarray(w_grid, float)
    if len(grid) < 100 or grid.min() > 0.0 or grid.max() < 1e8:
        raise ValueError("assumption grid must span [0, 1e8] with >= 100 points")
    vals = np.asarray(phi.eval(grid), dtype=float)
    derivs = np.asarray(phi.deriv(grid), dtype=float)

    a1 = bool(vals[grid == 0.0].size and np.all(vals[grid == 0.0] == 0.0)) and bool(
        np.all(vals >= 0.0)
    )
    a3 = bool(np.all(np.isfinite(derivs)))

    # oscillation count: derivative values below the resolution floor are
    # numerical dust (e.g. spline noise where the true slope underflows),
    # not local extrema
    floor = 1e-12 * max(1.0, float(np.max(np.abs(derivs))) if derivs.size else 1.0)
    signs = np.sign(derivs)
    signs = signs[np.abs(derivs) > floor]
    changes = int(np.count_nonzero(np.diff(signs) != 0.0)) if signs.size else 0
    a2 = changes <= max_extrema

    tail = grid >= tail_from
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = grid[tail] * derivs[tail] / vals[tail]
    ratios = np.where(vals[tail] == 0.0, 0.0, ratios)  # phi == 0 convention
    if ratios.size:
        lo, hi = float(np.min(ratios)), float(np.max(ratios))
    else:
        lo = hi = 0.0
    a4 = bool(np.isfinite(lo) and np.isfinite(hi) and lo >= -eps and hi <= 1.0 + eps)

    return AssumptionReport(
        a1_ok=a1, a2_ok=a2, a2_sign_changes=changes, a3_ok=a3, a4_ok=a4,
        a4_ratio_range=(lo, hi),
    )


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _tail_threshold(grid: np.ndarray, ok: np.ndarray, min_span: float) -> float | None:
    """Smallest grid value from which ok holds through the end, spanning
    at least min_span multiplicatively; None if there is no such point."""
    if not ok[-1]:
        return None
    idx = len(ok)
    while idx > 0 and ok[idx - 1]:
        idx -= 1
    w_star = float(grid[idx])
    if grid[-1] / w_star < min_span:
        return None
    return w_star


def classify(
    phi: ShrinkageFunction,
    dims: ProblemDims,
    profile: TailProfile | None = None,
    margin: float = MARGIN_DEFAULT,
    w_grid: np.ndarray | None = None,
) -> QuasiClass:
    """Place phi on the quasi-admissible / quasi-inadmissible side of the
    critical tail, or report Indeterminate inside the margin dead zone.

    The grid must live strictly above w = 1 (the critical tail involves
    1/log w).  A verdict requires its inequality to hold over at least the
    last two decades of the grid.
    """
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must lie in (0, 1)")
    k = constants(dims)
    grid = np.geomspace(2.0, 1e8, 700) if w_grid is None else np.asarray(w_grid, float)
    if grid.min() <= 1.0:
        raise ValueError("classification grid must lie in (1, inf)")
    if profile is None:
        profile = phi.tail or tail_profile(phi, dims, np.geomspace(1e3, 1e8, 48))

    min_span = 100.0  # the deciding tail must cover >= two decades
    vals = np.asarray(phi.eval(grid), dtype=float)
    log_w = np.log(grid)

    if math.isinf(profile.phi_limit):
        # unbounded phi shrinks past every critical tail eventually
        b_adm = 1.0 - margin
        ok = vals >= k.c_pn - b_adm * k.beta_star / log_w
        w_star = _tail_threshold(grid, ok, min_span)
        if w_star is not None:
            return QuasiClass.admissible(b_adm, w_star)
        return QuasiClass.indeterminate(
            "phi unbounded but the admissible-side inequality did not "
            "stabilize on the grid"
        )

    b_inad = 1.0 + margin
    ok_inad = vals <= k.c_pn - b_inad * k.beta_star / log_w
    w_star = _tail_threshold(grid, ok_inad, min_span)
    if w_star is not None:
        return QuasiClass.inadmissible(b_inad, w_star)

    b_adm = 1.0 - margin
    ok_adm = vals >= k.c_pn - b_adm * k.beta_star / log_w
    w_star = _tail_threshold(grid, ok_adm, min_span)
    if w_star is not None:
        return QuasiClass.admissible(b_adm, w_star)

    return QuasiClass.indeterminate(
        f"neither tail inequality holds for b outside 1 +/- {margin} "
        f"over the final two decades of the grid"
    )


# ---------------------------------------------------------------------------
# constructive domination
# ---------------------------------------------------------------------------

def nu_from_witness(b: float, phi_star: float, dims: ProblemDims) -> float:
    """nu = min(1, (2 b beta_star - d_n(1+phi_star)) / (2 d_n (3+phi_star)))."""
    k = constants(dims)
    numer = 2.0 * b * k.beta_star - k.d_n * (1.0 + phi_star)
    if numer <= 0.0:
        raise ConstructionError(
            f"witness b={b} too small for phi_star={phi_star}: the exponent "
            "formula requires 2 b beta_star > d_n (1 + phi_star)"
        )
    return min(1.0, numer / (2.0 * k.d_n * (3.0 + phi_star)))


def construct_dominator(
    phi: ShrinkageFunction,
    dims: ProblemDims,
    b: float,
    profile: TailProfile | None = None,
    *,
    margin: float = MARGIN_DEFAULT,
    w_grid: np.ndarray | None = None,
    w_sharp_cap: float = 1e10,
) -> DominatorSpec:
    """Build a perturbation g whose risk-difference certificate verifies.

    Requires b > 1, a finite tail limit, and the quasi-inadmissible
    inequality to hold with this b on the grid tail.  w_sharp starts at the
    verified threshold and doubles until verify_domination passes
    (non-vacuously); the doubling is capped at w_sharp_cap.
    """
    if not b > 1.0:
        raise ValueError("construction requires a witness b > 1")
    k = constants(dims)
    if profile is None:
        profile = phi.tail or tail_profile(phi, dims, np.geomspace(1e3, 1e8, 48))
    if math.isinf(profile.phi_limit):
        raise ConstructionError("phi_star must be finite to construct a dominator")
    phi_star = profile.phi_limit

    grid = (
        default_w_grid(lo=1e-4, hi=1e8, points=1400) if w_grid is None
        else np.asarray(w_grid, float)
    )
    pos = grid[grid > 1.0]
    vals = np.asarray(phi.eval(pos), dtype=float)
    ok = vals <= k.c_pn - b * k.beta_star / np.log(pos)
    w_star = _tail_threshold(pos, ok, min_span=100.0)
    if w_star is None:
        raise ConstructionError(
            f"the quasi-inadmissible inequality with b={b} does not hold on "
            "the grid tail; classify() first"
        )

    nu = nu_from_witness(b, phi_star, dims)
    w_sharp = w_star
    last = None
    while w_sharp <= w_sharp_cap:
        spec = DominatorSpec(nu=nu, w_sharp=w_sharp, ramp_width=w_sharp, b=b, w_star=w_star)
        cert = verify_domination(phi, spec, dims, grid)
        if cert.verdict and not cert.trivial:
            return spec
        last = cert
        w_sharp *= 2.0
    diag = {}
    if last is not None:
        diag = {
            "min_delta_above_sharp": last.min_delta_above_sharp,
            "last_w_sharp": last.spec.w_sharp,
        }
    raise ConstructionError(
        f"no verifying w_sharp found up to cap {w_sharp_cap:g}", diagnostics=diag
    )


def verify_domination(
    phi: ShrinkageFunction,
    spec: DominatorSpec,
    dims: ProblemDims,
    w_grid: np.ndarray | None = None,
) -> DominationCertificate:
    """Evaluate Delta(w) = D_phi - D_{phi+g} on a grid and certify its sign.

    Below w_sharp g vanishes identically, so Delta must be exactly zero
    there (bit-exact, asserted); the verdict additionally needs
    min Delta >= 0 over the grid points above w_sharp.
    """
    grid = default_w_grid(points=800) if w_grid is None else np.asarray(w_grid, float)
    if len(grid) < 500 or grid.min() > 0.0 or grid.max() < 1e8:
        raise ValueError("verification grid must span [0, 1e8] with >= 500 points")
    g = dominator_g(spec)
    deltas = np.asarray(delta(phi, g, grid, dims), dtype=float)
    below = grid <= spec.w_sharp
    zero_below = bool(np.all(deltas[below] == 0.0))
    above = ~below
    if np.any(above):
        min_above = float(np.min(deltas[above]))
    else:
        min_above = 0.0
    verdict = zero_below and min_above >= 0.0
    return DominationCertificate(
        spec=spec,
        grid=tuple(zip(grid.tolist(), deltas.tolist())),
        min_delta_above_sharp=min_above,
        zero_below_sharp=zero_below,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# necessary-condition witnesses and growth diagnostics
# ---------------------------------------------------------------------------

def lemma_gg_witness(
    phi: ShrinkageFunction,
    g: ShrinkageFunction,
    dims: ProblemDims,
    search_grid: np.ndarray | None = None,
) -> Optional[float]:
    """Search for a w with Delta(w; phi, g) < 0 when g violates a necessary
    condition (g(0) >= 0, g >= 0, or positivity persistence).

    Returns the most violating grid point, or None either when g satisfies
    all three conditions on the grid (no search performed) or when the grid
    search finds no negative Delta; a None is "none found", never a proof.
    """
    grid = default_w_grid(lo=1e-6, hi=1e8, points=900) if search_grid is None else np.asarray(
        search_grid, float
    )
    gv = np.asarray(g.eval(grid), dtype=float)

    b1_violated = bool(gv[grid == 0.0].size and np.any(gv[grid == 0.0] < 0.0))
    b2_violated = bool(np.any(gv[grid > 0.0] < 0.0))
    pos_seen = np.maximum.accumulate(gv > 0.0)
    b3_violated = bool(np.any(pos_seen & (gv <= 0.0)))
    if not (b1_violated or b2_violated or b3_violated):
        return None

    pos = grid[grid > 0.0]
    deltas = np.asarray(delta(phi, g, pos, dims), dtype=float)
    i = int(np.argmin(deltas))
    if deltas[i] < 0.0:
        return float(pos[i])
    return None


@dataclass(frozen=True)
class Cc0Report:
    """Liminf proxy for |phi(t)|^{d_n} / t -> 0 (risk-finiteness necessity)."""

    min_proxy: float
    loglog_slope: float | None
    compliant: bool


def cc0_diagnostic(
    phi: ShrinkageFunction,
    dims: ProblemDims,
    w_grid: np.ndarray | None = None,
) -> Cc0Report:
    """Minimum of |phi(t)|^{d_n}/t over the top decade plus a log-log slope.

    Compliance requires either clear decay (negative slope) or a proxy that
    already sits at zero; a proxy bounded away from zero with slope >= 0 is
    flagged as violating the growth condition.
    """
    grid = np.geomspace(1e2, 1e12, 240) if w_grid is None else np.asarray(w_grid, float)
    if np.any(np.diff(grid) <= 0) or grid.min() <= 0:
        raise ValueError("cc0 grid must be positive ascending")
    k = constants(dims)
    vals = np.abs(np.asarray(phi.eval(grid), dtype=float))
    proxy = vals**k.d_n / grid
    top = grid >= grid[-1] / 10.0
    min_proxy = float(np.min(proxy[top]))
    if np.all(proxy[top] > 0.0):
        slope = float(np.polyfit(np.log(grid[top]), np.log(proxy[top]), 1)[0])
    else:
        slope = None
    compliant = (slope is not None and slope < -0.01) or min_proxy < 1e-6
    return Cc0Report(min_proxy=min_proxy, loglog_slope=slope, compliant=compliant)
