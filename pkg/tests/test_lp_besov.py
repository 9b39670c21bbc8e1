import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from znl.lp_besov import (
    besov_norm,
    eta0,
    eta_lambda,
    holder_norm,
    lateral_norm_L1inf,
    lp_project,
    smooth_step,
    sobolev_norm,
)
from znl.spectral import TorusGrid

# regression constants measured once on the fixed window family and frozen;
# they bound estimator behavior, not any analytic constant
MULTIPLIER_BOUND = 1.0
BESOV_HOLDER_BOUND = 3.0
GBM_TAIL_99PCT_BOUND = {2.0: 60.0, 8 / 3: 40.0}


def test_window_plateau_and_support():
    r = np.linspace(0, 3, 2001)
    vals = eta0(r)
    assert np.all(vals[r <= 1.25] == 1.0)
    assert np.all(vals[r >= 1.6] == 0.0)
    assert np.all((0.0 <= vals) & (vals <= 1.0))


def test_window_partition_of_unity():
    # dyadic annuli telescope: sum of eta_lambda over 2^Z equals 1 away from 0
    r = np.linspace(0.3, 200.0, 5000)
    total = sum(eta_lambda(r, 2.0**j) for j in range(-5, 12))
    assert np.allclose(total, 1.0, atol=1e-12)


def test_smooth_step_endpoints():
    assert smooth_step(np.array([-1.0]))[0] == 0.0
    assert smooth_step(np.array([2.0]))[0] == 1.0
    mid = smooth_step(np.array([0.5]))[0]
    assert 0.0 < mid < 1.0


def test_lp_project_constants():
    g = TorusGrid(d=1, n=64, L=2 * np.pi)
    const = np.full(g.shape, 3.0 + 0j)
    assert np.allclose(lp_project(const, 4.0, grid=g), 0, atol=1e-12)
    assert np.allclose(lp_project(const, 1.0, grid=g, low_block=True), const, atol=1e-12)


def test_lp_project_pure_mode():
    g = TorusGrid(d=1, n=64, L=2 * np.pi)
    x = g.coords(centered=False)[0]
    f = np.exp(1j * 8 * x)
    assert np.allclose(lp_project(f, 8.0, grid=g), f, atol=1e-12)
    assert np.allclose(lp_project(f, 2.0, grid=g), 0, atol=1e-12)


def test_lp_project_above_nyquist_zero():
    g = TorusGrid(d=1, n=16, L=2 * np.pi)
    f = np.ones(g.shape, complex)
    out = lp_project(f, 64.0, grid=g)
    assert np.allclose(out, 0)


def test_besov_trivial_cases():
    assert besov_norm(np.zeros(128), 0.3, 2.0, dx=0.01).value == 0.0
    est = besov_norm(np.full(128, 2.5), 0.3, np.inf, dx=0.01)
    assert est.value == pytest.approx(2.5, rel=1e-10)


def test_besov_brownian_regularity_surrogate():
    # Brownian paths live just below Hoelder 1/2: the s = 0.55 estimate blows
    # up relative to s = 0.45 as resolution grows
    rng = np.random.default_rng(8)
    n = 2**16
    dt = 1.0 / n
    b = np.concatenate([[0], np.cumsum(rng.standard_normal(n - 1)) * np.sqrt(dt)])
    low = besov_norm(b, 0.45, np.inf, dx=dt).value
    high = besov_norm(b, 0.55, np.inf, dx=dt).value
    assert np.isfinite(low) and low > 0
    assert high > 2 * low


def test_holder_trivial_and_sqrt():
    n = 1001
    t = np.linspace(0, 1, n)
    assert holder_norm(t, 1.0, dt=t[1] - t[0]) == pytest.approx(1.0, rel=1e-9)
    assert holder_norm(np.full(n, 4.2), 0.5, dt=1e-3) == 0.0
    # sup of |sqrt(t) - sqrt(s)|/|t-s|^(1/2) is attained at s = 0
    val = holder_norm(np.sqrt(t), 0.5, dt=t[1] - t[0])
    assert val == pytest.approx(1.0, rel=1e-9)
    # brute-force pair oracle on a coarse subsample
    sub = np.sqrt(t[::50])
    ts = t[::50]
    brute = max(
        abs(sub[i] - sub[j]) / abs(ts[i] - ts[j]) ** 0.5
        for i in range(len(sub))
        for j in range(i + 1, len(sub))
    )
    assert holder_norm(sub, 0.5, times=ts) == pytest.approx(brute, rel=1e-12)


def test_holder_needs_two_samples():
    with pytest.raises(ValueError):
        holder_norm(np.array([1.0]), 0.5, dt=1.0)


def test_sobolev_single_mode():
    g = TorusGrid(d=1, n=64, L=2 * np.pi)
    x = g.coords(centered=False)[0]
    f = np.exp(1j * 5 * x)
    expected = (1 + 25) ** 0.25 * np.sqrt(2 * np.pi)  # (1+|xi|^2)^{s/2} * ||f||_2
    assert sobolev_norm(f, 0.5, g) == pytest.approx(expected, rel=1e-10)


def test_sobolev_gaussian_analytic():
    # ||e^{-x^2/2}||_{H^1}^2 = integral (1+xi^2) e^{-xi^2} dxi / ... = 1.5 sqrt(pi)
    g = TorusGrid(d=1, n=256, L=40.0)
    x = g.coords()[0]
    f = np.exp(-(x**2) / 2).astype(complex)
    assert sobolev_norm(f, 1.0, g) == pytest.approx(np.sqrt(1.5 * np.sqrt(np.pi)), rel=1e-6)


def test_lateral_norm_separable():
    g = TorusGrid(d=2, n=64, L=10.0)
    x = g.coords()
    prof = np.exp(-(x[0] ** 2))
    f = prof * np.ones_like(x[1])
    expect = np.sqrt(np.pi)  # integral of |e^{-r^2}| dr
    assert lateral_norm_L1inf(f, 0, g) == pytest.approx(expect, rel=1e-3)


def test_reconstruction_partition():
    g = TorusGrid(d=2, n=64, L=2 * np.pi)
    rng = np.random.default_rng(12)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    # band-limit below the dyadic truncation
    f = lp_project(f, 4.0, grid=g) + lp_project(f, 1.0, grid=g, low_block=True)
    acc = lp_project(f, 1.0, grid=g, low_block=True)
    lam = 2.0
    while lam <= g.nyquist / 4:
        acc = acc + lp_project(f, lam, grid=g)
        lam *= 2
    num = np.linalg.norm(acc - f)
    assert num < 1e-10 * np.linalg.norm(f)


def test_multiplier_boundedness_regression():
    g = TorusGrid(d=1, n=256, L=10.0)
    rng = np.random.default_rng(11)
    for _ in range(10):
        f = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        for lam in [1, 2, 4, 8, 16, 32]:
            piece = lp_project(f, float(lam), grid=g)
            for p in (1, 2, np.inf):
                assert np.linalg.norm(piece, p) <= MULTIPLIER_BOUND * np.linalg.norm(f, p)


def test_besov_holder_comparison_regression():
    rng = np.random.default_rng(13)
    n = 1024
    dt = 1.0 / n
    for _ in range(5):
        b = np.concatenate([[0], np.cumsum(rng.standard_normal(n - 1)) * np.sqrt(dt)])
        h = holder_norm(b, 0.4, dt=dt)
        est = besov_norm(b, 0.4, np.inf, dx=dt)
        assert est.value <= BESOV_HOLDER_BOUND * h
        # per-scale version of the same comparison
        for lam, val in est.per_scale.items():
            if lam > 1:
                assert val <= BESOV_HOLDER_BOUND * h


@pytest.mark.slow
@pytest.mark.parametrize("p", [2.0, 8 / 3])
def test_gbm_tail_besov_bounded_regression(p):
    # sampled critical-index Besov norms of the decay factor stay below a
    # frozen 99th-percentile bound across the whole strength range
    from znl.experiments import derive_rng, gbm_sample_paths

    s = 1.0 / p
    tg = np.linspace(0, 10, 4097)
    dtg = tg[1] - tg[0]
    for c in [1, 2, 4, 8, 16, 32, 64]:
        r = derive_rng(99, int(c))
        paths = gbm_sample_paths(float(c), tg, 500, r)
        vals = [besov_norm(paths[i], s, p, dx=dtg).value for i in range(500)]
        assert np.percentile(vals, 99) < GBM_TAIL_99PCT_BOUND[p], c


@given(scale=st.floats(0.1, 10), seed=st.integers(0, 100))
@settings(max_examples=30, deadline=None)
def test_besov_homogeneity_property(scale, seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(256)
    a = besov_norm(f, 0.3, 2.0, dx=0.01).value
    b = besov_norm(scale * f, 0.3, 2.0, dx=0.01).value
    assert b == pytest.approx(scale * a, rel=1e-9)
