"""Benchmark objectives with known global minimizers.

Every objective is stored as a batch function mapping an ``(N, d)`` array of
positions to ``N`` values.  The integer ``code`` ties a registered objective to
its compiled twin in the kernel extension, so the fused stepping loop can
evaluate it without calling back into Python.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ObjectiveSpec",
    "OBJECTIVE_NAMES",
    "OBJECTIVE_CODES",
    "BATCH_FUNCTIONS",
    "make_objective",
    "eval_batch",
]

TWO_PI = 2.0 * np.pi


def ackley(y: np.ndarray) -> np.ndarray:
    d = y.shape[1]
    sq = np.sum(y * y, axis=1)
    cs = np.sum(np.cos(TWO_PI * y), axis=1)
    return -20.0 * np.exp(-0.2 * np.sqrt(sq / d)) - np.exp(cs / d) + 20.0 + np.e


def griewank(y: np.ndarray) -> np.ndarray:
    idx = np.arange(1, y.shape[1] + 1, dtype=float)
    return 1.0 + np.sum(y * y, axis=1) / 4000.0 - np.prod(np.cos(y / idx), axis=1)


def rastrigin(y: np.ndarray) -> np.ndarray:
    d = y.shape[1]
    return 10.0 * d + np.sum(y * y - 10.0 * np.cos(TWO_PI * y), axis=1)


def alpine(y: np.ndarray) -> np.ndarray:
    return 10.0 * np.sum(np.abs(y * np.sin(10.0 * y) - 0.1 * y), axis=1)


def salomon(y: np.ndarray) -> np.ndarray:
    r = np.sqrt(np.sum(y * y, axis=1))
    return 1.0 - np.cos(200.0 * np.pi * r) + 10.0 * r


def ackley_fig1(y: np.ndarray) -> np.ndarray:
    # no +20+e offset; the radial term is scaled by 0.2/sqrt(d) on the plain norm
    d = y.shape[1]
    r = np.sqrt(np.sum(y * y, axis=1))
    cs = np.sum(np.cos(TWO_PI * y), axis=1)
    return -20.0 * np.exp(-0.2 / np.sqrt(d) * r) - np.exp(cs / d)


def rastrigin_fig1(y: np.ndarray) -> np.ndarray:
    return np.sum(y * y + 2.5 * (1.0 - np.cos(TWO_PI * y)), axis=1)


BATCH_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "ackley": ackley,
    "griewank": griewank,
    "rastrigin": rastrigin,
    "alpine": alpine,
    "salomon": salomon,
    "ackley_fig1": ackley_fig1,
    "rastrigin_fig1": rastrigin_fig1,
}

# must stay in sync with the enum in _kernels.pyx
OBJECTIVE_CODES: dict[str, int] = {name: i for i, name in enumerate(BATCH_FUNCTIONS)}
OBJECTIVE_NAMES: tuple[str, ...] = tuple(BATCH_FUNCTIONS)


def _min_value(name: str) -> float:
    if name == "ackley_fig1":
        return -20.0 - np.e
    return 0.0


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """A named objective on R^d with known minimizer and minimum value.

    Parameters
    ----------
    name : str
        Identifier; registered names are listed in ``OBJECTIVE_NAMES``.
    dim : int
        Dimension d.
    minimizer : ndarray
        Global minimizer v*.
    min_value : float
        Value of the objective at ``minimizer``.
    batch : callable
        Maps an ``(N, d)`` array of *unshifted* coordinates to ``N`` values.
    shift : ndarray, optional
        Translation applied before ``batch``; ``None`` means the origin.
    code : int, optional
        Kernel id for registered objectives, ``None`` for user objectives.
    """

    name: str
    dim: int
    minimizer: np.ndarray
    min_value: float
    batch: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    shift: Optional[np.ndarray] = None
    code: Optional[int] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        minimizer = np.array(self.minimizer, dtype=float).reshape(-1)
        if minimizer.shape != (self.dim,):
            raise ValueError("minimizer has wrong dimension")
        minimizer.setflags(write=False)
        object.__setattr__(self, "minimizer", minimizer)
        if self.shift is not None:
            shift = np.array(self.shift, dtype=float).reshape(-1)
            if shift.shape != (self.dim,):
                raise ValueError("shift has wrong dimension")
            shift.setflags(write=False)
            object.__setattr__(self, "shift", shift)

    @property
    def shift_vector(self) -> np.ndarray:
        if self.shift is None:
            return np.zeros(self.dim)
        return np.asarray(self.shift)

    def eval_batch(self, positions) -> np.ndarray:
        x = np.asarray(positions, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(
                f"dimension mismatch: objective {self.name!r} has dim {self.dim}, "
                f"got positions of shape {x.shape}"
            )
        if self.shift is not None:
            x = x - self.shift
        return np.asarray(self.batch(x), dtype=float)

    def eval(self, v) -> float:
        v = np.asarray(v, dtype=float).reshape(1, -1)
        return float(self.eval_batch(v)[0])

    def __call__(self, v) -> float:
        return self.eval(v)


def make_objective(name: str, dim: int, shift=None) -> ObjectiveSpec:
    """Build one of the registered benchmark objectives.

    ``shift`` translates the landscape: the returned objective evaluates the
    base formula at ``v - shift`` and reports ``shift`` as its minimizer.
    """
    key = name.lower()
    if key not in BATCH_FUNCTIONS:
        raise ValueError(
            f"unknown objective {name!r}; valid names: {', '.join(OBJECTIVE_NAMES)}"
        )
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    minimizer = np.zeros(dim) if shift is None else np.asarray(shift, dtype=float)
    return ObjectiveSpec(
        name=key,
        dim=dim,
        minimizer=minimizer,
        min_value=_min_value(key),
        batch=BATCH_FUNCTIONS[key],
        shift=shift,
        code=OBJECTIVE_CODES[key],
    )


def eval_batch(spec: ObjectiveSpec, ensemble) -> np.ndarray:
    """Evaluate ``spec`` on every particle of ``ensemble`` (or a raw array)."""
    positions = getattr(ensemble, "positions", ensemble)
    return spec.eval_batch(positions)
