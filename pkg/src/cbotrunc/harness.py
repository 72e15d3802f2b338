"""Success-rate experiments, parameter sweeps and report files.

Configs are flat YAML (or JSON) mappings; see ``CONFIG_KEYS`` and the README
for the schema.  A ``preset`` key pulls in one of the protocols in
``PRESETS`` and explicit keys override it.

Seeding: repetition ``r`` of any experiment uses
``SeedSequence([root_seed, r])``.  The seed does not depend on the sweep
cell, so every cell sees the same random streams.  That makes results
independent of scheduling, worker count and the order of the sweep axes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union

import numpy as np
import yaml

from .core import CboParams, InitLaw, NoiseMode, run
from .errors import NonFiniteObjectiveError, ParameterError
from .objectives import OBJECTIVE_NAMES, make_objective

__all__ = [
    "ConfigError",
    "ExperimentError",
    "ExperimentConfig",
    "SuccessEstimate",
    "SweepResult",
    "PRESETS",
    "TABLES",
    "load_config",
    "config_from_dict",
    "wilson_interval",
    "success_rate",
    "run_sweep",
    "run_table",
    "run_phase",
    "emit_report",
    "load_report",
    "worker_count",
]

INF = math.inf
Z95 = 1.959963984540054


class ConfigError(ValueError):
    """Invalid experiment configuration; the message starts with the key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ExperimentError(RuntimeError):
    """A run inside an experiment failed."""

    def __init__(self, run_index: int, cause: BaseException):
        self.run_index = run_index
        self.cause = cause
        super().__init__(f"run {run_index} failed: {cause}")


_ISO = dict(lam=1.0, sigma=0.3, alpha=1e5, dt=0.02, K=200, dim=15,
            init_mean=0.0, init_var=1.0, noise="isotropic", repetitions=1000)
_FIG1 = dict(dim=4, N=100, lam=1.0, alpha=1e5, dt=0.01, K=5000, sigma=1.0,
             init_mean=1.0, init_var=2000.0, noise="isotropic", repetitions=100,
             on_nonfinite="fail",
             sweep={"sigma": [0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
                    "M": [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, INF]})

PRESETS: dict[str, dict[str, Any]] = {
    "isotropic-table2": dict(_ISO),
    "isotropic-table3": dict(_ISO),
    "anisotropic-table4": dict(lam=1.0, sigma=5.0, alpha=1e5, dt=0.02, K=1000, dim=20,
                               init_mean=0.0, init_var=100.0, noise="anisotropic",
                               repetitions=1000),
    "anisotropic-table5": dict(lam=1.0, sigma=1.0, alpha=1e5, dt=0.02, K=200, dim=15,
                               init_mean=0.0, init_var=1.0, noise="anisotropic",
                               repetitions=1000),
    "fig1a": dict(_FIG1, objective="ackley_fig1"),
    "fig1b": dict(_FIG1, objective="rastrigin_fig1"),
}
PRESETS["isotropic"] = PRESETS["isotropic-table2"]
PRESETS["anisotropic"] = PRESETS["anisotropic-table4"]

# table name -> (preset, axes); axes are swept in the listed order
TABLES: dict[str, tuple[str, dict[str, list]]] = {
    "table2": ("isotropic-table2", {
        "objective": ["ackley", "griewank", "salomon"],
        "K": [200],
        "M": [1.0, INF],
        "N": [150, 300, 600, 900, 1200],
    }),
    "table3": ("isotropic-table3", {
        "objective": ["rastrigin", "alpine"],
        "K": [200, 500],
        "M": [1.0, INF],
        "N": [300, 600, 900, 1200, 1500],
    }),
    "table4": ("anisotropic-table4", {
        "objective": ["rastrigin", "ackley", "griewank", "salomon"],
        "K": [1000],
        "M": [1.0, INF],
        "N": [75, 150, 300, 600, 900],
    }),
    "table5": ("anisotropic-table5", {
        "objective": ["alpine"],
        "K": [200, 500, 1000],
        "M": [1.0, INF],
        "N": [300, 600, 900, 1200, 1500],
    }),
}

_ALIASES = {
    "n": "N", "n_particles": "N", "m": "M", "trunc_m": "M", "k": "K", "n_steps": "K",
    "lambda": "lam", "reps": "repetitions", "root_seed": "seed", "d": "dim",
    "noise_mode": "noise", "proj_r": "R", "r": "R", "proj_center": "v_b",
}
CONFIG_KEYS = (
    "objective", "dim", "shift", "preset", "N", "M", "K", "sigma", "lam", "alpha",
    "dt", "R", "v_b", "noise", "init_mean", "init_var", "repetitions", "tolerance",
    "seed", "on_nonfinite", "sweep",
)
SWEEP_AXES = ("objective", "sigma", "M", "N", "K")
_SWEEP_FLAT = {"sweep_sigma": "sigma", "sweep_m": "M", "sweep_n": "N", "sweep_k": "K",
               "sweep_objective": "objective"}


# maps CboParams validation messages back to the config key at fault
_PARAM_PREFIXES = (("lambda*dt", "dt"), ("lambda", "lambda"), ("sigma", "sigma"),
                   ("alpha", "alpha"), ("dt", "dt"), ("M ", "M"), ("R ", "R"),
                   ("N ", "N"), ("K ", "K"))


def _canon(key: str) -> str:
    if key in CONFIG_KEYS:
        return key
    return _ALIASES.get(key.lower(), key)


def _float(key, value, allow_inf=False) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity", ".inf"):
        value = INF
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if math.isnan(out) or (math.isinf(out) and not allow_inf):
        raise ConfigError(key, f"expected a finite number, got {value!r}")
    return out


def _int(key, value) -> int:
    number = _float(key, value)
    if isinstance(value, bool) or not number.is_integer():
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(number)


def _axis_value(axis: str, value):
    if axis == "objective":
        if str(value).lower() not in OBJECTIVE_NAMES:
            raise ConfigError("sweep.objective", f"unknown objective {value!r}")
        return str(value).lower()
    if axis in ("N", "K"):
        return _int(f"sweep.{axis}", value)
    return _float(f"sweep.{axis}", value, allow_inf=(axis == "M"))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment: objective, optimizer parameters and protocol."""

    objective: str
    dim: int
    cbo: CboParams
    shift: Optional[tuple[float, ...]] = None
    repetitions: int = 1000
    tolerance: float = 0.1
    root_seed: int = 0
    sweep: Optional[tuple[tuple[str, tuple], ...]] = None
    on_nonfinite: str = "raise"
    preset: Optional[str] = None

    def objective_spec(self):
        return make_objective(self.objective, self.dim, self.shift)

    def with_axis_values(self, **values) -> "ExperimentConfig":
        """Copy with swept quantities (sigma, M, N, K, objective) replaced."""
        cbo_changes = {}
        if "sigma" in values:
            cbo_changes["sigma"] = values["sigma"]
        if "M" in values:
            cbo_changes["trunc_m"] = values["M"]
        if "N" in values:
            cbo_changes["n_particles"] = values["N"]
        if "K" in values:
            cbo_changes["n_steps"] = values["K"]
        out = replace(self, cbo=replace(self.cbo, **cbo_changes), sweep=None)
        if "objective" in values:
            out = replace(out, objective=values["objective"])
        return out

    def to_dict(self) -> dict:
        """Flat, fully expanded mapping (loadable by :func:`config_from_dict`)."""
        c = self.cbo
        d = {
            "objective": self.objective,
            "dim": self.dim,
            "shift": list(self.shift) if self.shift is not None else None,
            "N": c.n_particles,
            "M": c.trunc_m,
            "K": c.n_steps,
            "sigma": c.sigma,
            "lam": c.lam,
            "alpha": c.alpha,
            "dt": c.dt,
            "R": c.proj_r,
            "v_b": list(c.proj_center),
            "noise": c.noise_mode.value,
            "init_mean": list(c.init.mean),
            "init_var": c.init.variance_per_coord,
            "repetitions": self.repetitions,
            "tolerance": self.tolerance,
            "seed": self.root_seed,
            "on_nonfinite": self.on_nonfinite,
        }
        if self.sweep is not None:
            d["sweep"] = {name: list(vals) for name, vals in self.sweep}
        return d

    def config_hash(self) -> str:
        blob = json.dumps(_encode(self.to_dict()), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping, expand its preset and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")
    given: dict[str, Any] = {}
    sweep: dict[str, list] = {}
    for key, value in raw.items():
        k = str(key)
        if k.lower() in _SWEEP_FLAT:
            sweep[_SWEEP_FLAT[k.lower()]] = value
            continue
        ck = _canon(k)
        if ck not in CONFIG_KEYS:
            raise ConfigError(k, "unknown key")
        given[ck] = value

    merged: dict[str, Any] = {}
    preset = given.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    merged.update({k: v for k, v in given.items() if k != "preset"})
    if "sweep" in merged and merged["sweep"] is not None:
        base_sweep = merged.pop("sweep")
        if not isinstance(base_sweep, dict):
            raise ConfigError("sweep", "expected a mapping of axis -> list")
        sweep = {**{_canon(str(a)): v for a, v in base_sweep.items()}, **sweep}
    merged.pop("sweep", None)

    if "objective" not in merged:
        raise ConfigError("objective", "required")
    objective = str(merged["objective"]).lower()
    if objective not in OBJECTIVE_NAMES:
        raise ConfigError("objective", f"unknown objective {merged['objective']!r}; "
                                       f"valid names: {', '.join(OBJECTIVE_NAMES)}")
    if "dim" not in merged:
        raise ConfigError("dim", "required")
    dim = _int("dim", merged["dim"])
    if dim < 1:
        raise ConfigError("dim", "must be >= 1")
    for key in ("N", "sigma", "lam", "alpha", "dt", "K"):
        if key not in merged:
            raise ConfigError(key, "required")

    def vector(key, default):
        v = merged.get(key, default)
        if v is None:
            return None
        if isinstance(v, (int, float, str)):
            return (_float(key, v),) * dim
        try:
            vals = tuple(_float(key, x) for x in v)
        except TypeError:
            raise ConfigError(key, f"expected a number or list, got {v!r}") from None
        if len(vals) != dim:
            raise ConfigError(key, f"expected {dim} entries, got {len(vals)}")
        return vals

    shift = vector("shift", None)
    noise = str(merged.get("noise", "isotropic")).lower()
    if noise not in ("isotropic", "anisotropic"):
        raise ConfigError("noise", f"expected isotropic or anisotropic, got {noise!r}")
    on_nonfinite = str(merged.get("on_nonfinite", "raise"))
    if on_nonfinite not in ("raise", "fail"):
        raise ConfigError("on_nonfinite", "expected 'raise' or 'fail'")

    try:
        init = InitLaw(vector("init_mean", 0.0), _float("init_var", merged.get("init_var", 1.0)))
    except ParameterError as exc:
        raise ConfigError("init_var", str(exc)) from None
    fields = dict(
        lam=_float("lam", merged["lam"]),
        sigma=_float("sigma", merged["sigma"]),
        alpha=_float("alpha", merged["alpha"]),
        dt=_float("dt", merged["dt"]),
        n_particles=_int("N", merged["N"]),
        n_steps=_int("K", merged["K"]),
        init=init,
        trunc_m=_float("M", merged.get("M", INF), allow_inf=True),
        proj_r=_float("R", merged.get("R", INF), allow_inf=True),
        proj_center=vector("v_b", 0.0),
        noise_mode=NoiseMode(noise),
    )
    try:
        cbo = CboParams(**fields)
    except ParameterError as exc:
        msg = str(exc)
        bad = next((key for prefix, key in _PARAM_PREFIXES if msg.startswith(prefix)), "cbo")
        raise ConfigError(bad, msg) from None

    reps = _int("repetitions", merged.get("repetitions", 1000))
    if reps < 1:
        raise ConfigError("repetitions", "must be >= 1")
    tol = _float("tolerance", merged.get("tolerance", 0.1), allow_inf=True)
    if not tol > 0:
        raise ConfigError("tolerance", "must be > 0")
    seed = _int("seed", merged.get("seed", 0))
    if seed < 0:
        raise ConfigError("seed", "must be >= 0")

    sweep_axes = None
    if sweep:
        axes = []
        for axis, values in sweep.items():
            if axis not in SWEEP_AXES:
                raise ConfigError(f"sweep.{axis}", f"unknown axis; choose from {SWEEP_AXES}")
            if isinstance(values, (str, int, float)):
                values = [values]
            values = list(values)
            if not values:
                raise ConfigError(f"sweep.{axis}", "must be a nonempty list")
            axes.append((axis, tuple(_axis_value(axis, v) for v in values)))
        sweep_axes = tuple(axes)

    return ExperimentConfig(
        objective=objective,
        dim=dim,
        cbo=cbo,
        shift=shift,
        repetitions=reps,
        tolerance=tol,
        root_seed=seed,
        sweep=sweep_axes,
        on_nonfinite=on_nonfinite,
        preset=preset,
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML/JSON experiment config."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    if raw is None:
        raw = {}
    return config_from_dict(raw)


@dataclass(frozen=True)
class SuccessEstimate:
    rate: float
    runs: int
    successes: int
    wilson_ci_95: tuple[float, float]

    @classmethod
    def from_counts(cls, successes: int, runs: int) -> "SuccessEstimate":
        return cls(successes / runs, runs, successes, wilson_interval(successes, runs))

    def to_dict(self) -> dict:
        return {"rate": self.rate, "runs": self.runs, "successes": self.successes,
                "ci_lo": self.wilson_ci_95[0], "ci_hi": self.wilson_ci_95[1]}

    @classmethod
    def from_dict(cls, d: dict) -> "SuccessEstimate":
        return cls(d["rate"], d["runs"], d["successes"], (d["ci_lo"], d["ci_hi"]))


@dataclass(frozen=True)
class SweepResult:
    """Success estimates on the product grid of ``axes`` (row-major cells).

    A cell is ``None`` when its runs raised; the message is kept under
    ``metadata["errors"]`` keyed by the flat cell index.
    """

    axes: tuple[tuple[str, tuple], ...]
    cells: tuple[Optional[SuccessEstimate], ...]
    metadata: dict = field(default_factory=dict)
    wall_time: Optional[float] = field(default=None, compare=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for _, v in self.axes)

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.axes)

    def coordinates(self):
        return itertools.product(*(v for _, v in self.axes))

    def rates(self) -> np.ndarray:
        r = [np.nan if c is None else c.rate for c in self.cells]
        return np.array(r, dtype=float).reshape(self.shape)

    def cell(self, **coords) -> Optional[SuccessEstimate]:
        for values, c in zip(self.coordinates(), self.cells):
            if all(values[self.axis_names.index(k)] == v for k, v in coords.items()):
                return c
        raise KeyError(coords)


def wilson_interval(successes: int, runs: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if runs <= 0:
        raise ValueError("runs must be positive")
    p = successes / runs
    denom = 1.0 + z * z / runs
    centre = (p + z * z / (2 * runs)) / denom
    half = z * math.sqrt(p * (1 - p) / runs + z * z / (4 * runs * runs)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # rounding can leave the interval a hair inside p at the edges
    return min(lo, p), max(hi, p)


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("CBO_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, int(env)) if int(env) > 0 else n
        except ValueError:
            pass
    return max(1, n)


def _seed(root_seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([root_seed, rep])


def _one_run(config: ExperimentConfig, objective, rep: int, backend):
    try:
        out = run(config.cbo, objective, _seed(config.root_seed, rep),
                  tolerance=config.tolerance, backend=backend,
                  on_nonfinite=config.on_nonfinite)
    except NonFiniteObjectiveError as exc:
        return NonFiniteObjectiveError(step=exc.step, run_index=rep)
    except Exception as exc:  # reported per run, never swallowed
        return ExperimentError(rep, exc)
    return out.success


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def success_rate(config: ExperimentConfig, workers: Optional[int] = None,
                 backend=None) -> SuccessEstimate:
    """Run ``config.repetitions`` independent runs and count successes."""
    objective = config.objective_spec()
    tasks = [(config, objective, rep, backend) for rep in range(config.repetitions)]
    results = _map(_one_run, tasks, worker_count(workers))
    for r in results:
        if isinstance(r, BaseException):
            raise r
    return SuccessEstimate.from_counts(sum(bool(r) for r in results), len(results))


def run_sweep(config: ExperimentConfig, workers: Optional[int] = None,
              backend=None, axes=None) -> SweepResult:
    """Evaluate :func:`success_rate` on every cell of the sweep grid."""
    axes = tuple(axes) if axes is not None else config.sweep
    if not axes:
        raise ConfigError("sweep", "config has no sweep axes")
    t0 = time.perf_counter()
    names = [a for a, _ in axes]
    coords = list(itertools.product(*(v for _, v in axes)))
    cell_cfgs = [config.with_axis_values(**dict(zip(names, c))) for c in coords]
    errors: dict[str, str] = {}
    objectives = []
    for i, cfg in enumerate(cell_cfgs):
        try:
            objectives.append(cfg.objective_spec())
        except ValueError as exc:
            objectives.append(None)
            errors[str(i)] = str(exc)

    tasks = [(cfg, obj, rep, backend)
             for cfg, obj in zip(cell_cfgs, objectives) if obj is not None
             for rep in range(cfg.repetitions)]
    results = iter(_map(_one_run, tasks, worker_count(workers)))

    cells: list[Optional[SuccessEstimate]] = []
    for i, (cfg, obj) in enumerate(zip(cell_cfgs, objectives)):
        if obj is None:
            cells.append(None)
            continue
        outcome = [next(results) for _ in range(cfg.repetitions)]
        failure = next((r for r in outcome if isinstance(r, BaseException)), None)
        if failure is not None:
            errors[str(i)] = str(failure)
            cells.append(None)
        else:
            cells.append(SuccessEstimate.from_counts(sum(outcome), len(outcome)))

    metadata = {
        "config_hash": config.config_hash(),
        "seed": config.root_seed,
        "config": config.to_dict(),
    }
    if errors:
        metadata["errors"] = errors
    return SweepResult(
        axes=tuple((n, tuple(v)) for n, v in axes),
        cells=tuple(cells),
        metadata=metadata,
        wall_time=time.perf_counter() - t0,
    )


def run_table(name: str, repetitions: Optional[int] = None, root_seed: int = 0,
              workers: Optional[int] = None, backend=None) -> SweepResult:
    """Recompute one of the success-rate tables as a sweep."""
    if name not in TABLES:
        raise ConfigError("preset", f"unknown table {name!r}; choose from {sorted(TABLES)}")
    preset, axes = TABLES[name]
    first = axes["objective"][0]
    raw = {"preset": preset, "objective": first, "N": axes["N"][0], "seed": root_seed}
    if repetitions is not None:
        raw["repetitions"] = repetitions
    config = config_from_dict(raw)
    return run_sweep(config, workers=workers, backend=backend,
                     axes=[(k, tuple(v)) for k, v in axes.items()])


def run_phase(name: str, repetitions: Optional[int] = None, root_seed: int = 0,
              workers: Optional[int] = None, backend=None, sweep=None) -> SweepResult:
    """Compute a sigma x M phase diagram from ``fig1a`` / ``fig1b``."""
    if name not in ("fig1a", "fig1b"):
        raise ConfigError("preset", f"unknown phase preset {name!r}; choose fig1a or fig1b")
    raw: dict[str, Any] = {"preset": name, "seed": root_seed}
    if repetitions is not None:
        raw["repetitions"] = repetitions
    if sweep is not None:
        raw["sweep"] = sweep
    return run_sweep(config_from_dict(raw), workers=workers, backend=backend)


def _encode(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return _encode(obj.item())
    return obj


def _decode(obj):
    if obj == "inf":
        return INF
    if obj == "-inf":
        return -INF
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if v == INF else repr(v)
    return str(v)


def _csv_text(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["rate", "runs", "ci_lo", "ci_hi"]
    if isinstance(result, SuccessEstimate):
        w.writerow(cols)
        w.writerow([_fmt(result.rate), result.runs,
                    _fmt(result.wilson_ci_95[0]), _fmt(result.wilson_ci_95[1])])
        return buf.getvalue()
    w.writerow(list(result.axis_names) + cols)
    for values, c in zip(result.coordinates(), result.cells):
        stats = ["", "", "", ""] if c is None else [
            _fmt(c.rate), c.runs, _fmt(c.wilson_ci_95[0]), _fmt(c.wilson_ci_95[1])]
        w.writerow([_fmt(v) for v in values] + stats)
    return buf.getvalue()


def _json_obj(result, include_timing: bool) -> dict:
    if isinstance(result, SuccessEstimate):
        return {"kind": "estimate", **result.to_dict()}
    obj = {
        "kind": "sweep",
        "axes": [{"name": n, "values": list(v)} for n, v in result.axes],
        "cells": [None if c is None else c.to_dict() for c in result.cells],
        "metadata": result.metadata,
    }
    if include_timing and result.wall_time is not None:
        obj["wall_time"] = result.wall_time
    return obj


def report_text(result: Union[SweepResult, SuccessEstimate], fmt: str = "csv",
                include_timing: bool = False) -> str:
    if fmt == "csv":
        return _csv_text(result)
    if fmt == "json":
        return json.dumps(_encode(_json_obj(result, include_timing)), indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; choose csv or json")


def emit_report(result: Union[SweepResult, SuccessEstimate], fmt: str, path,
                include_timing: bool = False) -> None:
    """Write ``result`` as CSV or JSON.

    Output bytes depend only on the result, so a fixed config and seed give
    identical files.  Wall time is left out unless ``include_timing``.
    """
    text = report_text(result, fmt, include_timing)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def parse_report(text: str) -> Union[SweepResult, SuccessEstimate]:
    obj = _decode(json.loads(text))
    if obj.get("kind") == "estimate":
        return SuccessEstimate.from_dict(obj)
    axes = tuple((a["name"], tuple(a["values"])) for a in obj["axes"])
    cells = tuple(None if c is None else SuccessEstimate.from_dict(c) for c in obj["cells"])
    return SweepResult(axes, cells, obj.get("metadata", {}), obj.get("wall_time"))


def load_report(path) -> Union[SweepResult, SuccessEstimate]:
    """Read a JSON report written by :func:`emit_report`."""
    with open(path) as fh:
        return parse_report(fh.read())
