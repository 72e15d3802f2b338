"""Consensus-based optimization with truncated noise.

The particle update for one step of size ``dt`` is::

    V_i <- V_i - dt * lam * (V_i - P(v_alpha)) + sigma * (|V_i - v_alpha| ^ M) * B_i

where ``v_alpha`` is the Boltzmann-weighted mean of the ensemble, ``P`` the
radial projection onto the ball ``B_R(v_b)``, ``^ M`` the minimum with the
truncation level and ``B_i ~ N(0, dt I)``.  In anisotropic mode the scalar
amplitude becomes the diagonal ``min(|V_i - v_alpha|_j, M)``.

``M = inf`` and ``R = inf`` turn truncation and projection into identities,
which recovers standard CBO.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import backend as _backend
from .errors import NonFiniteObjectiveError, ParameterError
from .objectives import ObjectiveSpec

__all__ = [
    "NoiseMode",
    "InitLaw",
    "Ensemble",
    "CboParams",
    "ConsensusResult",
    "RunTrace",
    "RunOutcome",
    "consensus_point",
    "project_ball",
    "gaussian_increments",
    "noise_amplitudes",
    "step_isotropic",
    "step_anisotropic",
    "run",
]

INF = math.inf
DEFAULT_TOLERANCE = 0.1

# noise for at most this many floats is drawn at once in the fused loop
_CHUNK_FLOATS = 1 << 18


class NoiseMode(str, enum.Enum):
    ISOTROPIC = "isotropic"
    ANISOTROPIC = "anisotropic"


def _as_tuple(v) -> tuple[float, ...]:
    return tuple(float(x) for x in np.asarray(v, dtype=float).reshape(-1))


@dataclass(frozen=True)
class InitLaw:
    """I.i.d. Gaussian initial law ``N(mean, variance_per_coord * I)``."""

    mean: tuple[float, ...]
    variance_per_coord: float = 1.0
    kind: str = "gaussian_iid"

    def __post_init__(self):
        object.__setattr__(self, "mean", _as_tuple(self.mean))
        if len(self.mean) < 1:
            raise ParameterError("init mean must have at least one coordinate")
        if not self.variance_per_coord > 0:
            raise ParameterError("init variance_per_coord must be > 0")
        if self.kind != "gaussian_iid":
            raise ParameterError(f"unsupported init kind {self.kind!r}")

    @classmethod
    def isotropic(cls, dim: int, mean: float = 0.0, variance: float = 1.0) -> "InitLaw":
        return cls((mean,) * dim, variance)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        return np.asarray(self.mean) + math.sqrt(self.variance_per_coord) * z


@dataclass(frozen=True, eq=False)
class Ensemble:
    """``N`` particle positions in ``d`` dimensions (read-only copy)."""

    positions: np.ndarray

    def __post_init__(self):
        x = np.array(self.positions, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ParameterError(f"positions must be an N x d array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ParameterError("ensemble positions must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def mean(self) -> np.ndarray:
        return self.positions.mean(axis=0)


@dataclass(frozen=True)
class CboParams:
    """Full parameter set of the truncated-noise CBO scheme.

    ``lam`` is the drift rate (``lambda`` is reserved in Python).  Vectors are
    stored as tuples so that parameter sets compare and hash by value.
    """

    lam: float
    sigma: float
    alpha: float
    dt: float
    n_particles: int
    n_steps: int
    init: InitLaw
    trunc_m: float = INF
    proj_r: float = INF
    proj_center: Optional[tuple[float, ...]] = None
    noise_mode: NoiseMode = NoiseMode.ISOTROPIC

    def __post_init__(self):
        for name in ("lam", "sigma", "alpha", "dt", "trunc_m", "proj_r"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "noise_mode", NoiseMode(self.noise_mode))
        if self.proj_center is None:
            object.__setattr__(self, "proj_center", (0.0,) * self.init.dim)
        else:
            object.__setattr__(self, "proj_center", _as_tuple(self.proj_center))
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")
        if not self.lam > 0:
            raise ParameterError("lambda must be > 0")
        if not self.alpha > 0:
            raise ParameterError("alpha must be > 0")
        if not self.sigma >= 0:
            raise ParameterError("sigma must be >= 0")
        if not self.trunc_m > 0:
            raise ParameterError("M must be > 0 or inf")
        if not self.proj_r > 0:
            raise ParameterError("R must be > 0 or inf")
        if not self.lam * self.dt < 1:
            raise ParameterError(
                f"lambda*dt = {self.lam * self.dt:g} must be < 1 for a contractive drift"
            )
        if int(self.n_particles) < 1:
            raise ParameterError("N must be >= 1")
        if int(self.n_steps) < 0:
            raise ParameterError("K must be >= 0")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        if len(self.proj_center) != self.init.dim:
            raise ParameterError("projection center and init mean differ in dimension")

    @property
    def dim(self) -> int:
        return self.init.dim

    @property
    def anisotropic(self) -> bool:
        return self.noise_mode is NoiseMode.ANISOTROPIC

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.proj_center)

    def replace(self, **changes) -> "CboParams":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class ConsensusResult:
    point: np.ndarray
    argmin_index: int
    shifted_weights: np.ndarray


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Per-step consensus points and distance of the ensemble mean to v*."""

    consensus: np.ndarray
    distance: np.ndarray


@dataclass(frozen=True, eq=False)
class RunOutcome:
    final_mean: np.ndarray
    distance_to_minimizer: float
    success: bool
    tolerance: float = DEFAULT_TOLERANCE
    trace: Optional[RunTrace] = field(default=None, repr=False)
    # step at which the objective went non-finite (``on_nonfinite="fail"``)
    diverged_at: Optional[int] = None


def consensus_point(ensemble, values, alpha: float, backend=None) -> ConsensusResult:
    """Boltzmann-weighted mean of the particles.

    Weights are ``exp(-alpha * (f_i - min f))``, normalised to sum to one.
    Raises :class:`NonFiniteObjectiveError` if any value is NaN or infinite.
    """
    positions = getattr(ensemble, "positions", ensemble)
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != positions.shape[0]:
        raise ParameterError("need one objective value per particle")
    if not alpha > 0:
        raise ParameterError("alpha must be > 0")
    point, weights, j = _backend.get(backend).consensus(positions, values, float(alpha))
    return ConsensusResult(point=point, argmin_index=j, shifted_weights=weights)


def project_ball(v, center, radius: float) -> np.ndarray:
    """Radial projection of ``v`` onto the closed ball ``B_radius(center)``.

    The result satisfies ``norm(result - center) <= radius`` exactly in
    floating point, so projecting twice returns the same vector.
    """
    v = np.asarray(v, dtype=float)
    return _backend._kernels_py.project(v, np.asarray(center, dtype=float), float(radius))


def gaussian_increments(rng: np.random.Generator, n: int, d: int, dt: float) -> np.ndarray:
    """``n x d`` i.i.d. draws from ``N(0, dt)``."""
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    return math.sqrt(dt) * rng.standard_normal((n, d))


def noise_amplitudes(ensemble, point, trunc_m: float, anisotropic: bool = False) -> np.ndarray:
    """Truncated diffusion factors: ``N`` scalars, or ``N x d`` diagonals."""
    positions = getattr(ensemble, "positions", ensemble)
    return _backend._kernels_py.amplitudes(
        positions, np.asarray(point, dtype=float), float(trunc_m), anisotropic
    )


def _step(ensemble, values, params: CboParams, noise, aniso: bool, backend) -> Ensemble:
    kern = _backend.get(backend)
    positions = getattr(ensemble, "positions", ensemble)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != positions.shape:
        raise ParameterError(f"noise shape {noise.shape} != ensemble shape {positions.shape}")
    res = consensus_point(positions, values, params.alpha, backend=kern)
    target = project_ball(res.point, params.center, params.proj_r)
    new = kern.step(
        positions, target, res.point, noise,
        params.lam, params.dt, params.sigma, params.trunc_m, aniso,
    )
    return Ensemble(new)


def step_isotropic(ensemble, values, params: CboParams, noise, backend=None) -> Ensemble:
    """One step with scalar noise amplitude ``sigma * min(|V_i - v_alpha|_2, M)``."""
    return _step(ensemble, values, params, noise, False, backend)


def step_anisotropic(ensemble, values, params: CboParams, noise, backend=None) -> Ensemble:
    """One step with diagonal amplitudes ``sigma * min(|V_i - v_alpha|_j, M)``."""
    return _step(ensemble, values, params, noise, True, backend)


def _diverged(x, step: int, tolerance: float) -> RunOutcome:
    with np.errstate(all="ignore"):
        final_mean = np.asarray(x).mean(axis=0)
    return RunOutcome(
        final_mean=final_mean,
        distance_to_minimizer=math.inf,
        success=bool(math.inf <= tolerance),
        tolerance=float(tolerance),
        diverged_at=step,
    )


def run(
    params: CboParams,
    objective: ObjectiveSpec,
    seed=None,
    tolerance: float = DEFAULT_TOLERANCE,
    trace: bool = False,
    backend=None,
    on_nonfinite: str = "raise",
) -> RunOutcome:
    """Initialise from ``params.init`` and perform ``params.n_steps`` steps.

    ``seed`` is anything accepted by ``numpy.random.default_rng``.  The
    generator first draws the initial positions, then one ``N x d`` block of
    standard normals per step, so a fixed seed fixes the whole run.
    Registered objectives go through the fused kernel loop; user objectives
    are evaluated through ``objective.eval_batch`` once per step.

    A non-finite objective value raises :class:`NonFiniteObjectiveError`
    carrying the step index.  With ``on_nonfinite="fail"`` the run instead
    stops there and is reported as unsuccessful with infinite distance.
    """
    if on_nonfinite not in ("raise", "fail"):
        raise ParameterError(f"on_nonfinite must be 'raise' or 'fail', got {on_nonfinite!r}")
    if objective.dim != params.dim:
        raise ParameterError(
            f"objective dim {objective.dim} != parameter dim {params.dim}"
        )
    kern = _backend.get(backend)
    rng = np.random.default_rng(seed)
    n, d, k_total = params.n_particles, params.dim, params.n_steps
    x = params.init.sample(rng, n)
    sqdt = math.sqrt(params.dt)
    aniso = params.anisotropic
    points = np.empty((k_total, d)) if trace else None
    means = np.empty((k_total, d)) if trace else None

    if objective.code is not None:
        shift = objective.shift_vector
        chunk = max(1, _CHUNK_FLOATS // (n * d))
        done = 0
        while done < k_total:
            k = min(chunk, k_total - done)
            noise = sqdt * rng.standard_normal((k, n, d))
            x, pts, mns, bad = kern.advance(
                objective.code, x, shift, noise,
                params.lam, params.sigma, params.alpha, params.dt,
                params.trunc_m, params.proj_r, params.center, aniso,
            )
            if bad >= 0:
                if on_nonfinite == "raise":
                    raise NonFiniteObjectiveError(step=done + bad)
                return _diverged(x, done + bad, tolerance)
            if trace:
                points[done:done + k] = pts
                means[done:done + k] = mns
            done += k
    else:
        step = step_anisotropic if aniso else step_isotropic
        for t in range(k_total):
            values = objective.eval_batch(x)
            if not np.all(np.isfinite(values)):
                if on_nonfinite == "raise":
                    raise NonFiniteObjectiveError(step=t)
                return _diverged(x, t, tolerance)
            noise = gaussian_increments(rng, n, d, params.dt)
            if trace:
                points[t] = consensus_point(x, values, params.alpha, backend=kern).point
            x = step(x, values, params, noise, backend=kern).positions
            if trace:
                means[t] = x.mean(axis=0)

    final_mean = np.asarray(x).mean(axis=0)
    distance = float(np.linalg.norm(final_mean - objective.minimizer))
    run_trace = None
    if trace:
        run_trace = RunTrace(
            consensus=points,
            distance=np.linalg.norm(means - objective.minimizer, axis=1),
        )
    return RunOutcome(
        final_mean=final_mean,
        distance_to_minimizer=distance,
        success=bool(distance <= tolerance),
        tolerance=float(tolerance),
        trace=run_trace,
    )
