import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cbotrunc.core import (
    CboParams,
    Ensemble,
    InitLaw,
    consensus_point,
    gaussian_increments,
    noise_amplitudes,
    project_ball,
    run,
    step_anisotropic,
    step_isotropic,
)
from cbotrunc.errors import NonFiniteObjectiveError, ParameterError
from cbotrunc.objectives import ObjectiveSpec, make_objective

from oracles import consensus_loop

PROPS = settings(max_examples=150, deadline=None)

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@st.composite
def ensembles(draw, max_n=12, max_d=5):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, max_d))
    x = draw(arrays(np.float64, (n, d), elements=coord))
    f = draw(arrays(np.float64, (n,), elements=st.floats(-1e3, 1e3)))
    return x, f


def params(dim, **kw):
    base = dict(lam=1.0, sigma=0.5, alpha=10.0, dt=0.1, n_particles=1, n_steps=1,
                init=InitLaw.isotropic(dim))
    base.update(kw)
    return CboParams(**base)


# consensus point -----------------------------------------------------------

def test_consensus_identical_positions():
    p = np.array([1.5, -2.0, 0.25])
    x = np.tile(p, (7, 1))
    res = consensus_point(x, np.arange(7.0), alpha=3.0)
    np.testing.assert_array_equal(res.point, p)


def test_consensus_two_equal_values():
    res = consensus_point(np.array([[0.0], [1.0]]), [0.0, 0.0], alpha=123.0)
    assert res.point[0] == pytest.approx(0.5, abs=1e-15)


def test_consensus_three_points_against_mpmath_value(backend):
    res = consensus_point(np.array([[0.0], [1.0], [2.0]]), [0.0, 1.0, 2.0], 1.0, backend=backend)
    # (e^-1 + 2 e^-2) / (1 + e^-1 + e^-2), evaluated with mpmath at 40 digits
    assert res.point[0] == pytest.approx(0.4247896173955585684690038, rel=1e-14)
    assert res.argmin_index == 0
    assert res.shifted_weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_consensus_matches_loop_oracle(backend):
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, 3))
    f = rng.uniform(0, 2, size=40)
    res = consensus_point(x, f, 2.5, backend=backend)
    np.testing.assert_allclose(res.point, consensus_loop(x.tolist(), f.tolist(), 2.5), rtol=1e-12)


def test_consensus_rejects_nonfinite(backend):
    x = np.zeros((3, 2))
    for bad in (np.nan, np.inf, -np.inf):
        with pytest.raises(NonFiniteObjectiveError, match="objective produced non-finite value"):
            consensus_point(x, [0.0, bad, 1.0], 1.0, backend=backend)


def test_consensus_huge_alpha_does_not_underflow(backend):
    x = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    res = consensus_point(x, [7.0, 5.0, 9.0], 1e5, backend=backend)
    np.testing.assert_array_equal(res.point, x[1])


@PROPS
@given(ensembles(), st.floats(1e-3, 1e3))
def test_consensus_convex_hull_and_weights(ens, alpha):
    x, f = ens
    for be in ("python",) + (("compiled",) if _has_compiled() else ()):
        res = consensus_point(x, f, alpha, backend=be)
        assert np.all(res.point >= x.min(axis=0))
        assert np.all(res.point <= x.max(axis=0))
        w = res.shifted_weights
        assert np.all((w >= 0) & (w <= 1))
        assert abs(w.sum() - 1.0) <= 1e-12


@PROPS
@given(ensembles(), st.floats(1e-3, 1e3),
       st.integers(-2**20, 2**20), st.lists(st.integers(-2**20, 2**20), min_size=12, max_size=12))
def test_consensus_offset_invariance_bit_exact(ens, alpha, c8, f8):
    # dyadic values keep f + c exact in floating point, so the shift by the
    # minimum yields identical exponents and therefore identical output bits
    x, _ = ens
    f = np.array(f8[: x.shape[0]], dtype=float) / 8.0
    c = c8 / 8.0
    for be in ("python",) + (("compiled",) if _has_compiled() else ()):
        a = consensus_point(x, f, alpha, backend=be)
        b = consensus_point(x, f + c, alpha, backend=be)
        np.testing.assert_array_equal(a.point, b.point)
        np.testing.assert_array_equal(a.shifted_weights, b.shifted_weights)


@PROPS
@given(ensembles(), st.floats(1e-3, 1e3), st.floats(-1e3, 1e3))
def test_consensus_offset_invariance_general(ens, alpha, c):
    x, f = ens
    a = consensus_point(x, f, alpha)
    b = consensus_point(x, f + c, alpha)
    # f + c rounds, which perturbs each exponent by at most alpha * ulp(|f| + |c|)
    tol = 1e-9 * (1 + alpha) * (np.abs(x).max() + 1)
    np.testing.assert_allclose(a.point, b.point, atol=tol)


@PROPS
@given(ensembles(max_n=20), st.data())
def test_laplace_limit(ens, data):
    x, _ = ens
    n = x.shape[0]
    best = data.draw(st.integers(0, n - 1))
    # well separated values: every other particle is at least 1e-3 worse
    gaps = data.draw(arrays(np.float64, (n,), elements=st.floats(1e-3, 10.0)))
    f = gaps.copy()
    f[best] = 0.0
    res = consensus_point(x, f, 1e6)
    assert np.linalg.norm(res.point - x[best]) < 1e-6
    assert res.argmin_index == best


def _has_compiled():
    from cbotrunc import backend
    return "compiled" in backend.available()


# projection ----------------------------------------------------------------

def test_project_inside_is_identity():
    v = np.array([0.3, -0.4])
    np.testing.assert_array_equal(project_ball(v, np.zeros(2), 1.0), v)


def test_project_outside_example():
    np.testing.assert_allclose(project_ball([3.0, 4.0], [0.0, 0.0], 1.0), [0.6, 0.8], rtol=1e-15)


def test_project_infinite_radius():
    v = np.array([1e6, -3e7, 2.0])
    np.testing.assert_array_equal(project_ball(v, np.ones(3), math.inf), v)


def test_project_far_center_small_radius(backend):
    # center ulp dwarfs the radius: the result must still land inside quickly
    from cbotrunc import backend as cbo_backend
    kern = cbo_backend.get(backend)
    c = np.array([1e3, -7e2, 3.3e2])
    v = c + np.array([0.37, -1.1, 2.9])
    for r in (1e-6, 1e-9, 1e-13):
        p = kern.project(v, c, r)
        assert np.linalg.norm(p - c) <= r
        np.testing.assert_array_equal(kern.project(p, c, r), p)


@PROPS
@given(st.integers(1, 6).flatmap(lambda d: st.tuples(
    arrays(np.float64, (d,), elements=st.floats(-1e6, 1e6)),
    arrays(np.float64, (d,), elements=st.floats(-1e3, 1e3)))),
    st.floats(1e-6, 1e4))
def test_projection_idempotent_and_inside(vc, radius):
    v, c = vc
    p = project_ball(v, c, radius)
    assert np.linalg.norm(p - c) <= radius
    np.testing.assert_array_equal(project_ball(p, c, radius), p)


# noise ---------------------------------------------------------------------

def test_increments_standard_moments():
    x = gaussian_increments(np.random.default_rng(1), 1000, 1000, 1.0)
    m = x.size
    assert abs(x.mean()) <= 5 / math.sqrt(m)
    assert abs(x.var() - 1.0) <= 5 * math.sqrt(2 / m)


def test_increments_scale_with_sqrt_dt():
    x = gaussian_increments(np.random.default_rng(2), 1000, 1000, 0.04)
    m = x.size
    # sample std of N(0, 0.04) has standard error ~ 0.2 / sqrt(2m)
    assert abs(x.std() - 0.2) <= 5 * 0.2 / math.sqrt(2 * m)


def test_increments_deterministic():
    a = gaussian_increments(np.random.default_rng(9), 13, 4, 0.3)
    b = gaussian_increments(np.random.default_rng(9), 13, 4, 0.3)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ParameterError):
        gaussian_increments(np.random.default_rng(9), 2, 2, 0.0)


# steppers ------------------------------------------------------------------

def test_isotropic_hand_example(backend):
    p = params(1, lam=1.0, dt=0.5, sigma=0.0)
    new = step_isotropic(Ensemble([[0.0], [1.0]]), [0.0, 0.0], p, np.zeros((2, 1)), backend=backend)
    np.testing.assert_allclose(new.positions[:, 0], [0.25, 0.75], rtol=0, atol=1e-15)


def test_consensus_state_unchanged_without_noise(backend):
    x = np.tile([0.7, -1.1, 2.0], (5, 1))
    p = params(3, sigma=0.0)
    f = np.arange(5.0)
    noise = np.random.default_rng(0).normal(size=x.shape)
    for step in (step_isotropic, step_anisotropic):
        np.testing.assert_array_equal(step(x, f, p, noise, backend=backend).positions, x)


def test_anisotropic_diagonal_factors():
    x = np.array([[3.0, 0.5]])
    amp = noise_amplitudes(x, np.zeros(2), 1.0, anisotropic=True)
    np.testing.assert_array_equal(amp, [[1.0, 0.5]])


def test_anisotropic_untruncated_matches_plain_diagonal_scaling(backend):
    rng = np.random.default_rng(4)
    x = rng.normal(size=(9, 3))
    f = rng.uniform(size=9)
    noise = rng.normal(size=(9, 3)) * 0.1
    p = params(3, alpha=2.0, sigma=0.7, dt=0.05, noise_mode="anisotropic")
    v = consensus_point(x, f, 2.0).point
    expected = x - 0.05 * 1.0 * (x - v) + 0.7 * np.abs(x - v) * noise
    got = step_anisotropic(x, f, p, noise, backend=backend).positions
    np.testing.assert_allclose(got, expected, rtol=1e-13, atol=1e-14)


def test_projection_enters_drift(backend):
    x = np.array([[4.0, 0.0], [6.0, 0.0]])
    p = params(2, sigma=0.0, dt=0.5, alpha=1.0, proj_r=1.0)
    new = step_isotropic(x, [0.0, 0.0], p, np.zeros_like(x), backend=backend)
    # consensus (5, 0) is clamped to (1, 0)
    np.testing.assert_allclose(new.positions, [[2.5, 0.0], [3.5, 0.0]], atol=1e-14)


@PROPS
@given(arrays(np.float64, (1, 3), elements=st.floats(-5, 5)),
       st.floats(0.01, 5), st.floats(0.01, 0.9), st.floats(0, 10),
       arrays(np.float64, (1, 3), elements=st.floats(-10, 10)))
def test_single_particle_stationary(x, m, dt, sigma, noise):
    p = params(3, trunc_m=m, dt=dt, sigma=sigma, proj_r=10.0)
    for be in ("python",) + (("compiled",) if _has_compiled() else ()):
        for step in (step_isotropic, step_anisotropic):
            np.testing.assert_array_equal(step(x, [1.0], p, noise, backend=be).positions, x)


@PROPS
@given(ensembles(max_n=10, max_d=4), st.floats(1e-3, 10))
def test_truncation_bound(ens, m):
    x, f = ens
    point = consensus_point(x, f, 1.0).point
    assert np.all(noise_amplitudes(x, point, m) <= m)
    assert np.all(noise_amplitudes(x, point, m, anisotropic=True) <= m)
    # the stepper applies exactly these factors: with unit noise and sigma=1 the
    # displacement beyond the drift is the amplitude itself
    p = params(x.shape[1], sigma=1.0, trunc_m=m, alpha=1.0)
    ones = np.ones_like(x)
    drift = x - p.dt * p.lam * (x - point)
    iso = step_isotropic(x, f, p, ones).positions - drift
    assert np.all(iso <= m * (1 + 1e-9) + 1e-9 * np.abs(x).max())


# run -----------------------------------------------------------------------

def test_run_zero_steps_returns_initial_mean(backend):
    p = params(4, n_particles=25, n_steps=0, init=InitLaw((1.0, 2.0, 3.0, 4.0), 0.5))
    out = run(p, make_objective("ackley", 4), seed=17, backend=backend)
    x0 = np.array([1.0, 2.0, 3.0, 4.0]) + math.sqrt(0.5) * np.random.default_rng(17).standard_normal((25, 4))
    np.testing.assert_array_equal(out.final_mean, x0.mean(axis=0))


def test_run_deterministic_contraction_on_quadratic():
    quad = ObjectiveSpec("quadratic", 2, np.zeros(2), 0.0, lambda y: np.sum(y * y, axis=1))
    p = params(2, sigma=0.0, alpha=10.0, dt=0.05, n_particles=20, n_steps=300,
               init=InitLaw((0.0, 0.0), 0.05**2))
    out = run(p, quad, seed=3, trace=True)
    assert out.success

    # independent recursion: same initial sample, softmax-weighted mean drift
    x = math.sqrt(0.05**2) * np.random.default_rng(3).standard_normal((20, 2))
    norms = []
    for _ in range(300):
        f = np.sum(x * x, axis=1)
        w = np.exp(-10.0 * (f - f.min()))
        v = (w / w.sum()) @ x
        x = x - 0.05 * (x - v)
        norms.append(np.linalg.norm(x.mean(axis=0)))
    np.testing.assert_allclose(out.final_mean, x.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(out.trace.distance, norms, atol=1e-12)
    assert np.all(np.diff(norms) <= 1e-15)


def test_run_is_bit_reproducible(backend):
    p = params(5, n_particles=30, n_steps=40, alpha=1e5, sigma=0.3, dt=0.02, trunc_m=1.0)
    spec = make_objective("rastrigin", 5)
    a = run(p, spec, seed=123, trace=True, backend=backend)
    b = run(p, spec, seed=123, trace=True, backend=backend)
    np.testing.assert_array_equal(a.final_mean, b.final_mean)
    np.testing.assert_array_equal(a.trace.consensus, b.trace.consensus)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["isotropic", "anisotropic"]))
def test_run_determinism_property(seed, mode):
    p = params(3, n_particles=8, n_steps=5, alpha=50.0, noise_mode=mode, trunc_m=1.0)
    spec = make_objective("ackley", 3)
    a = run(p, spec, seed=seed)
    b = run(p, spec, seed=seed)
    np.testing.assert_array_equal(a.final_mean, b.final_mean)
    assert a.success == b.success


def test_fused_and_generic_paths_share_noise(backend):
    # a user objective with the same formula goes through the per-step path
    spec = make_objective("griewank", 3)
    user = ObjectiveSpec("g", 3, np.zeros(3), 0.0, spec.batch)
    p = params(3, n_particles=15, n_steps=25, alpha=20.0, sigma=0.4, trunc_m=0.8)
    a = run(p, spec, seed=5, trace=True, backend=backend)
    b = run(p, user, seed=5, trace=True, backend=backend)
    np.testing.assert_allclose(a.final_mean, b.final_mean, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(a.trace.consensus, b.trace.consensus, rtol=1e-10, atol=1e-12)


def test_run_nonfinite_reports_step(backend):
    def blowup(y):
        out = np.sum(y * y, axis=1)
        blowup.calls += 1
        if blowup.calls > 3:
            out[0] = np.nan
        return out
    blowup.calls = 0
    spec = ObjectiveSpec("blowup", 2, np.zeros(2), 0.0, blowup)
    p = params(2, n_particles=4, n_steps=10)
    with pytest.raises(NonFiniteObjectiveError) as exc:
        run(p, spec, seed=0, backend=backend)
    assert exc.value.step == 3
    blowup.calls = 0
    out = run(p, spec, seed=0, backend=backend, on_nonfinite="fail")
    assert not out.success and out.diverged_at == 3 and out.distance_to_minimizer == math.inf


def test_run_fused_nonfinite_reports_step(backend):
    # standard CBO with huge noise overflows to inf and then NaN
    p = params(4, n_particles=20, n_steps=3000, sigma=40.0, dt=0.01, alpha=1e5,
               init=InitLaw.isotropic(4, 1.0, 2000.0))
    spec = make_objective("ackley_fig1", 4)
    with pytest.raises(NonFiniteObjectiveError) as exc:
        run(p, spec, seed=0, backend=backend)
    assert 0 < exc.value.step < 3000
    out = run(p, spec, seed=0, backend=backend, on_nonfinite="fail")
    assert out.diverged_at == exc.value.step


def test_success_flag_tracks_tolerance():
    p = params(2, n_particles=10, n_steps=5)
    spec = make_objective("ackley", 2)
    out = run(p, spec, seed=1, tolerance=math.inf)
    assert out.success
    tight = run(p, spec, seed=1, tolerance=1e-300)
    assert tight.success == (tight.distance_to_minimizer <= 1e-300)


@pytest.mark.parametrize("kw", [
    dict(dt=0.0), dict(lam=0.0), dict(alpha=-1.0), dict(sigma=-0.1),
    dict(trunc_m=0.0), dict(proj_r=-1.0), dict(lam=60.0, dt=0.02), dict(n_particles=0),
])
def test_param_validation(kw):
    with pytest.raises(ParameterError):
        params(2, **kw)


def test_ensemble_rejects_nonfinite():
    with pytest.raises(ParameterError):
        Ensemble([[0.0, np.nan]])
    e = Ensemble(np.zeros((3, 2)))
    assert (e.n_particles, e.dim) == (3, 2)
    with pytest.raises(ValueError):
        e.positions[0, 0] = 1.0
