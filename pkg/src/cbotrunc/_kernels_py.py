"""Pure numpy implementation of the stepping kernels.

Same call signatures as the compiled ``_kernels`` extension; used when the
extension is missing or when ``CBO_BACKEND=python``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonFiniteObjectiveError
from .objectives import BATCH_FUNCTIONS

NAME = "python"

_BY_CODE = list(BATCH_FUNCTIONS.values())


def evaluate(code, x, shift):
    return _BY_CODE[code](x - shift)


def consensus(x, values, alpha):
    """Return ``(point, weights, argmin)`` for the Boltzmann-weighted mean.

    Weights are shifted by the smallest value so that ``exp`` never
    overflows and the best particle always has weight one before
    normalisation.  The point is written as an offset from the best particle
    and clamped to the coordinate-wise hull to absorb rounding.
    """
    if not np.all(np.isfinite(values)):
        raise NonFiniteObjectiveError()
    j = int(np.argmin(values))
    w = np.exp(-alpha * (values - values[j]))
    s = w.sum()
    anchor = x[j]
    point = anchor + (w @ (x - anchor)) / s
    np.clip(point, x.min(axis=0), x.max(axis=0), out=point)
    return point, w / s, j


def project(v, center, radius):
    if math.isinf(radius):
        return np.array(v, dtype=float)
    diff = v - center
    n = math.sqrt(diff @ diff)
    if n <= radius:
        return np.array(v, dtype=float)
    scale = radius / n
    eps = 2.0**-52
    while True:
        p = center + scale * diff
        q = p - center
        if math.sqrt(q @ q) <= radius:
            return p
        # geometric backoff; reaches scale 0 (p == center) in at most ~53 rounds
        scale *= 1.0 - eps
        eps *= 2.0


def amplitudes(x, point, trunc_m, aniso):
    diff = x - point
    if aniso:
        return np.minimum(np.abs(diff), trunc_m)
    return np.minimum(np.sqrt(np.sum(diff * diff, axis=1)), trunc_m)


def step(x, target, point, noise, lam, dt, sigma, trunc_m, aniso):
    amp = amplitudes(x, point, trunc_m, aniso)
    if not aniso:
        amp = amp[:, None]
    return x - dt * lam * (x - target) + sigma * amp * noise


def advance(code, x, shift, noise, lam, sigma, alpha, dt, trunc_m, radius, center, aniso):
    """Run ``noise.shape[0]`` steps on a registered objective.

    Returns ``(x, points, means, bad)`` where ``bad`` is the chunk-local index
    of the first step whose objective values were not finite, or -1.
    """
    k = noise.shape[0]
    d = x.shape[1]
    points = np.empty((k, d))
    means = np.empty((k, d))
    f = _BY_CODE[code]
    for t in range(k):
        values = f(x - shift)
        if not np.all(np.isfinite(values)):
            return x, points, means, t
        point, _, _ = consensus(x, values, alpha)
        target = project(point, center, radius)
        points[t] = point
        x = step(x, target, point, noise[t], lam, dt, sigma, trunc_m, aniso)
        means[t] = x.mean(axis=0)
    return x, points, means, -1
