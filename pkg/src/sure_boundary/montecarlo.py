"""Reproducible risk simulation, SURE checks, and paired domination runs.

Sampling model: X ~ N_p(theta, sigma^2 v I_p) and S ~ sigma^2 v chi^2_n with
v = 1 (Normal) or v ~ inverse-gamma(df/2, df/2) shared by X and S within a
replication (StudentT).  The shared mixing draw is what makes the Student-t
case a spherically symmetric scale mixture of the Normal model rather than a
vector of independent t components.  Risks are under scaled quadratic loss
||d - theta||^2 / sigma^2, and theta is placed on the first axis: the loss
and the estimators depend on theta only through ||theta|| (orbit invariance),
so a norm fully specifies the experiment.

Determinism contract
--------------------
All variates are produced by inverse-CDF transforms of a counter-based
uniform stream (Philox keyed by the seed; one 64-bit word per uniform, fixed
consumption).  Replication r owns the contiguous uniform block
[r*(p+2), (r+1)*(p+2)): coordinates 0..p-1 drive the normal draws, p drives
S, and p+1 drives the mixing variable (reserved, and burned, under the
Normal model too, so the two models are coupled by common random numbers).
Hence (X_r, S_r) is a pure function of (seed, r): results are bit-identical
across runs, chunk sizes, and thread counts.  Threading, when enabled,
dispatches pure per-chunk evaluation only; partial sums are combined with
math.fsum in fixed chunk order, so the reduction is exact and
order-independent.

SURE checking: for the Normal model E[p + (n+2) D_phi(W)] equals the risk,
so the z-score (mean_loss - sure_mean)/sqrt(se_loss^2 + se_sure^2) should be
small; the report flags |z| > 4.  For Student-t the statistic is *not* an
unbiased risk estimate and the check refuses to run.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.special import gammaincinv, ndtri

from .boundary import DominatorSpec, dominator_g
from .core import ProblemDims, ShrinkageFunction, constants, d_phi

__all__ = [
    "Normal",
    "StudentT",
    "ModelSpec",
    "SimConfig",
    "RiskReport",
    "SureCheckReport",
    "PairedReport",
    "parse_model",
    "encode_model",
    "sample_model",
    "sample_all",
    "estimate_risk",
    "sure_unbiasedness_test",
    "domination_mc",
    "thread_cap_from_env",
]

THREADS_ENV_VAR = "SURE_BOUNDARY_THREADS"
_CHUNK = 1 << 17


@dataclass(frozen=True)
class Normal:
    pass


@dataclass(frozen=True)
class StudentT:
    df: float

    def __post_init__(self) -> None:
        if not self.df > 2.0:
            raise ValueError("StudentT requires df > 2")


ModelSpec = Union[Normal, StudentT]


def parse_model(text: str) -> ModelSpec:
    head, _, rest = text.strip().partition(":")
    if head == "normal" and not rest:
        return Normal()
    if head == "student-t":
        key, _, value = rest.partition("=")
        if key.strip() != "df" or not value:
            raise ValueError(f"student-t spec must look like 'student-t:df=5', got {text!r}")
        return StudentT(df=float(value))
    raise ValueError(f"unknown model {text!r}")


def encode_model(model: ModelSpec) -> str:
    if isinstance(model, Normal):
        return "normal"
    return f"student-t:df={repr(float(model.df))}"


@dataclass(frozen=True)
class SimConfig:
    """One simulation cell; every report is a pure function of this value."""

    dims: ProblemDims
    theta_norm: float = 0.0
    sigma: float = 1.0
    reps: int = 10**5
    seed: int = 0
    model: ModelSpec = Normal()

    def __post_init__(self) -> None:
        if self.theta_norm < 0.0:
            raise ValueError("theta_norm must be >= 0")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be > 0")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class RiskReport:
    mean_loss: float
    se_loss: float
    sure_mean: float
    se_sure: float
    reps: int


@dataclass(frozen=True)
class SureCheckReport:
    z: float
    mean_loss: float
    se_loss: float
    sure_mean: float
    se_sure: float
    reps: int
    flagged: bool  # |z| > 4


@dataclass(frozen=True)
class PairedReport:
    """Common-random-number comparison of delta_phi against delta_{phi+g}."""

    config: SimConfig
    mean_diff: float  # mean of loss(delta_phi) - loss(delta_{phi+g})
    se_diff: float
    se_unpaired: float  # what independent streams would have given
    reps: int


def thread_cap_from_env(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return default
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be >= 1")
    return cap


_U_MIN = 2.0**-53  # uniforms are k/2^53; clamp the single value 0.0 away


def _uniforms(config: SimConfig) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=config.seed))
    u = gen.random((config.reps, config.dims.p + 2))
    np.maximum(u, _U_MIN, out=u)
    return u


def _transform(config: SimConfig, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map a uniform block to (X, S) by inverse CDFs (fixed consumption)."""
    p, n = config.dims.p, config.dims.n
    if isinstance(config.model, StudentT):
        half_df = config.model.df / 2.0
        v = half_df / gammaincinv(half_df, u[:, p + 1])
    else:
        v = np.ones(len(u))
    scale = config.sigma * np.sqrt(v)
    x = scale[:, None] * ndtri(u[:, :p])
    x[:, 0] += config.theta_norm
    s = config.sigma**2 * v * 2.0 * gammaincinv(n / 2.0, u[:, p])
    return x, s


def sample_model(
    config: SimConfig, chunk_size: int = _CHUNK
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield (start_index, X, S) chunks; values depend only on (seed, index)."""
    u = _uniforms(config)
    for start in range(0, config.reps, chunk_size):
        block = u[start : start + chunk_size]
        x, s = _transform(config, block)
        yield start, x, s


def sample_all(config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """All replications at once: X of shape (reps, p) and S of shape (reps,)."""
    x, s = _transform(config, _uniforms(config))
    return x, s


def _loss(
    phi: ShrinkageFunction, x: np.ndarray, s: np.ndarray, config: SimConfig
) -> np.ndarray:
    w = np.einsum("ij,ij->i", x, x) / s
    shrink = 1.0 - np.asarray(phi.eval(w), dtype=float) / w
    resid = shrink[:, None] * x
    resid[:, 0] -= config.theta_norm
    return np.einsum("ij,ij->i", resid, resid) / config.sigma**2


def _sure(
    phi: ShrinkageFunction, x: np.ndarray, s: np.ndarray, dims: ProblemDims
) -> np.ndarray:
    w = np.einsum("ij,ij->i", x, x) / s
    return dims.p + (dims.n + 2) * np.asarray(d_phi(phi, w, dims), dtype=float)


def _map_chunks(
    config: SimConfig,
    per_chunk: Callable[[np.ndarray, np.ndarray], tuple[float, ...]],
    threads: int | None,
) -> list[tuple[float, ...]]:
    """Apply a pure per-chunk reducer; results are returned in chunk order
    regardless of the executor, keeping reports thread-count independent."""
    chunks = list(sample_model(config))
    workers = thread_cap_from_env(1) if threads is None else threads
    if workers <= 1 or len(chunks) <= 1:
        return [per_chunk(x, s) for _, x, s in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(per_chunk, x, s) for _, x, s in chunks]
        return [f.result() for f in futures]


def _moments(total: float, total_sq: float, count: int) -> tuple[float, float]:
    mean = total / count
    if count < 2:
        return mean, 0.0
    var = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    return mean, math.sqrt(var / count)


def estimate_risk(
    phi: ShrinkageFunction, config: SimConfig, threads: int | None = None
) -> RiskReport:
    """Monte Carlo risk of delta_phi together with the mean SURE statistic."""

    def per_chunk(x: np.ndarray, s: np.ndarray) -> tuple[float, ...]:
        loss = _loss(phi, x, s, config)
        sure = _sure(phi, x, s, config.dims)
        return (
            float(np.sum(loss)),
            float(np.sum(loss * loss)),
            float(np.sum(sure)),
            float(np.sum(sure * sure)),
        )

    parts = _map_chunks(config, per_chunk, threads)
    sums = [math.fsum(p[i] for p in parts) for i in range(4)]
    mean_loss, se_loss = _moments(sums[0], sums[1], config.reps)
    sure_mean, se_sure = _moments(sums[2], sums[3], config.reps)
    return RiskReport(
        mean_loss=mean_loss,
        se_loss=se_loss,
        sure_mean=sure_mean,
        se_sure=se_sure,
        reps=config.reps,
    )


def sure_unbiasedness_test(
    phi: ShrinkageFunction, config: SimConfig, threads: int | None = None
) -> SureCheckReport:
    """z-score of mean_loss against sure_mean; Normal model only."""
    if not isinstance(config.model, Normal):
        raise ValueError(
            "SURE is an unbiased risk estimate only under the Normal model; "
            "refusing to z-test a Student-t run"
        )
    r = estimate_risk(phi, config, threads)
    denom = math.hypot(r.se_loss, r.se_sure)
    z = (r.mean_loss - r.sure_mean) / denom if denom > 0.0 else 0.0
    return SureCheckReport(
        z=z,
        mean_loss=r.mean_loss,
        se_loss=r.se_loss,
        sure_mean=r.sure_mean,
        se_sure=r.se_sure,
        reps=r.reps,
        flagged=abs(z) > 4.0,
    )


def domination_mc(
    phi: ShrinkageFunction,
    spec: DominatorSpec,
    configs: Sequence[SimConfig],
    threads: int | None = None,
) -> list[PairedReport]:
    """Paired loss differences loss(delta_phi) - loss(delta_{phi+g}) per cell.

    The same (X, S) drive both estimators within a replication (common
    random numbers), which is what makes small risk gaps resolvable.
    """
    g = dominator_g(spec)
    phi_g = phi.plus(g)
    reports = []
    for config in configs:

        def per_chunk(x: np.ndarray, s: np.ndarray) -> tuple[float, ...]:
            base = _loss(phi, x, s, config)
            challenger = _loss(phi_g, x, s, config)
            diff = base - challenger
            return (
                float(np.sum(diff)),
                float(np.sum(diff * diff)),
                float(np.sum(base * base)),
                float(np.sum(base)),
                float(np.sum(challenger * challenger)),
                float(np.sum(challenger)),
            )

        parts = _map_chunks(config, per_chunk, threads)
        sums = [math.fsum(p[i] for p in parts) for i in range(6)]
        mean_diff, se_diff = _moments(sums[0], sums[1], config.reps)
        _, se_base = _moments(sums[3], sums[2], config.reps)
        _, se_chal = _moments(sums[5], sums[4], config.reps)
        reports.append(
            PairedReport(
                config=config,
                mean_diff=mean_diff,
                se_diff=se_diff,
                se_unpaired=math.hypot(se_base, se_chal),
                reps=config.reps,
            )
        )
    return reports
