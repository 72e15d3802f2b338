"""Moment diagnostics for the large-alpha limit dynamics.

As alpha grows the consensus point collapses onto the minimizer v*, and a
single particle follows::

    dY = -lam (Y - v*) dt + sigma * g(|Y - v*|) dB

with ``g(r) = r`` for standard CBO and ``g(r) = min(r, M)`` with truncation.
For the standard dynamics the p-th moment about v* evolves exactly as
``exp(rate_standard * t)``; with truncation it stays below
:func:`bound_truncated`.  The simulators here estimate those moments by Monte
Carlo so the two statements can be checked numerically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import InitLaw, _as_tuple
from .errors import ParameterError

__all__ = [
    "LimitParams",
    "MomentTrajectory",
    "simulate_limit_standard",
    "simulate_limit_truncated",
    "rate_standard",
    "bound_truncated",
    "threshold_exponent",
    "fit_rate",
    "write_csv",
]

STOP_RADIUS = 1e150


@dataclass(frozen=True)
class LimitParams:
    """Parameters for the one-particle limit simulators.

    ``start`` pins every trajectory to one initial point (a Dirac initial
    law) and overrides ``init``.  ``scheme`` selects how the linear drift is
    discretised: ``"exponential"`` multiplies by ``exp(-lam*dt)`` (exact for
    the drift, Euler-Maruyama for the noise), ``"euler"`` uses the plain
    explicit factor ``1 - lam*dt``.
    """

    lam: float
    sigma: float
    dim: int
    dt: float
    horizon: float
    samples: int
    trunc_m: float = math.inf
    init: Optional[InitLaw] = None
    start: Optional[tuple[float, ...]] = None
    minimizer: Optional[tuple[float, ...]] = None
    record_every: int = 1
    scheme: str = "exponential"

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")
        if not self.horizon >= self.dt:
            raise ParameterError("horizon must be >= dt")
        if int(self.samples) < 1:
            raise ParameterError("samples must be >= 1")
        if not self.lam > 0:
            raise ParameterError("lambda must be > 0")
        if not self.sigma >= 0:
            raise ParameterError("sigma must be >= 0")
        if not self.trunc_m > 0:
            raise ParameterError("M must be > 0 or inf")
        if self.scheme not in ("exponential", "euler"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")
        if self.init is None:
            object.__setattr__(self, "init", InitLaw.isotropic(self.dim))
        if self.init.dim != self.dim:
            raise ParameterError("init law has wrong dimension")
        if self.minimizer is None:
            object.__setattr__(self, "minimizer", (0.0,) * self.dim)
        else:
            object.__setattr__(self, "minimizer", _as_tuple(self.minimizer))
        if self.start is not None:
            object.__setattr__(self, "start", _as_tuple(self.start))
            if len(self.start) != self.dim:
                raise ParameterError("start point has wrong dimension")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True, eq=False)
class MomentTrajectory:
    """Empirical p-th moments about v* at the recorded times.

    ``stopped`` holds the fraction of trajectories frozen by the divergence
    guard at each recorded time.  ``diverged`` is set when the moment
    estimate itself overflowed; the series then ends at the last finite
    value.
    """

    times: np.ndarray
    moments: np.ndarray
    stderr: np.ndarray
    p: float
    stopped: np.ndarray = field(repr=False)
    diverged: bool = False

    def __len__(self):
        return len(self.times)


def _simulate(params: LimitParams, p: float, seed, truncated: bool) -> MomentTrajectory:
    rng = np.random.default_rng(seed)
    s, d = int(params.samples), params.dim
    vstar = np.asarray(params.minimizer)
    if params.start is not None:
        y = np.broadcast_to(np.asarray(params.start) - vstar, (s, d)).copy()
    else:
        y = params.init.sample(rng, s) - vstar

    if params.scheme == "exponential":
        decay = math.exp(-params.lam * params.dt)
    else:
        decay = 1.0 - params.lam * params.dt
    noise_scale = params.sigma * math.sqrt(params.dt)
    cap = params.trunc_m if truncated else math.inf

    active = np.ones(s, dtype=bool)
    times, moments, errs, stopped = [], [], [], []
    diverged = False

    def record(t, r):
        nonlocal diverged
        rp = r**p
        m = rp.mean()
        if not math.isfinite(m):
            diverged = True
            return False
        times.append(t)
        moments.append(m)
        errs.append(rp.std(ddof=1) / math.sqrt(s) if s > 1 else 0.0)
        stopped.append(1.0 - active.mean())
        return True

    r = np.sqrt(np.sum(y * y, axis=1))
    record(0.0, r)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, params.n_steps + 1):
            amp = np.minimum(r, cap)
            z = rng.standard_normal((s, d))
            y_new = decay * y + (noise_scale * amp)[:, None] * z
            if active.all():
                y = y_new
            else:
                y = np.where(active[:, None], y_new, y)
            r = np.sqrt(np.sum(y * y, axis=1))
            active &= r <= STOP_RADIUS
            if k % params.record_every == 0 or k == params.n_steps:
                if not record(k * params.dt, r):
                    break

    return MomentTrajectory(
        times=np.array(times),
        moments=np.array(moments),
        stderr=np.array(errs),
        p=float(p),
        stopped=np.array(stopped),
        diverged=diverged,
    )


def simulate_limit_standard(params: LimitParams, p: float, seed=None) -> MomentTrajectory:
    """Moments of the untruncated limit; ``params.trunc_m`` is ignored."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    return _simulate(params, p, seed, truncated=False)


def simulate_limit_truncated(params: LimitParams, p: float, seed=None) -> MomentTrajectory:
    """Moments of the limit with diffusion amplitude ``min(|Y - v*|, M)``."""
    if p < 2:
        raise ParameterError("p must be >= 2 for the truncated bound")
    if math.isinf(params.trunc_m):
        raise ParameterError("truncated simulation needs a finite M")
    return _simulate(params, p, seed, truncated=True)


def rate_standard(lam: float, sigma: float, dim: int, p: float) -> float:
    """Exponential rate of the p-th moment of the untruncated limit."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    return p * (-lam + sigma**2 * (p + dim - 2) / 2.0)


def bound_truncated(lam, sigma, trunc_m, dim, p, t, initial_moment) -> float:
    """Upper bound on the p-th moment of the truncated limit at time ``t``."""
    if p < 2:
        raise ParameterError("p must be >= 2")
    if math.isinf(trunc_m):
        raise ParameterError("bound requires a finite M")
    radius = (sigma * trunc_m) ** p * (dim + p - 2) ** (p / 2.0) / lam ** (p / 2.0)
    return math.exp(-lam * t) * initial_moment + radius


def threshold_exponent(lam: float, sigma: float, dim: int) -> float:
    """Moment order where the untruncated limit switches from decay to growth."""
    if sigma == 0:
        raise ParameterError("no finite threshold for sigma = 0")
    return 2.0 * lam / sigma**2 - dim + 2.0


def fit_rate(traj: MomentTrajectory, window=(0.1, 0.9)) -> float:
    """Least-squares slope of ``log(moment)`` against time.

    Only points inside ``window`` (fractions of the recorded span) enter the
    fit, which keeps the initial transient out.
    """
    t = traj.times
    if len(t) < 2:
        raise ValueError("need at least two recorded times")
    t0, t1 = t[0], t[-1]
    lo, hi = t0 + window[0] * (t1 - t0), t0 + window[1] * (t1 - t0)
    mask = (t >= lo) & (t <= hi) & (traj.moments > 0)
    if mask.sum() < 2:
        raise ValueError("fit window holds fewer than two positive moments")
    slope, _ = np.polyfit(t[mask], np.log(traj.moments[mask]), 1)
    return float(slope)


def write_csv(traj: MomentTrajectory, path) -> None:
    """Write columns ``t, moment, stderr``."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "moment", "stderr"])
            for row in zip(traj.times, traj.moments, traj.stderr):
                w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
