import numpy as np
import pytest

from znl.noise import BrownianPathSet, CoeffPreset, NoiseSpec, sample_brownian
from znl.solver import (
    DetectorConfig,
    NoiseContext,
    SolverConfig,
    Stepper,
    ZakharovState,
    energy_zakharov,
    mass,
    refined_rescale,
    refined_rescale_inverse,
    rescale_backward,
    rescale_forward,
    run_simulation,
    transform_equivalence_check,
)
from znl.spectral import TorusGrid, l2_norm

NOISE_OFF = NoiseSpec(mode="off")


def _gaussian(grid: TorusGrid, amp=1.0, width=1.0):
    r2 = np.zeros(grid.shape)
    for ax in range(grid.d):
        dxa = grid.coords(centered=False)[ax] - grid.L / 2.0
        r2 = r2 + dxa**2
    return (amp * np.exp(-r2 / (2 * width**2))).astype(np.complex128)


def _run_det(grid, dt, t_max, x0, y0, scheme="strang"):
    cfg = SolverConfig(dt=dt, t_max=t_max, scheme=scheme, noise=NOISE_OFF)
    n_steps = int(round(t_max / dt))
    ctx = NoiseContext(NOISE_OFF, grid, 0.0, n_steps, dt, seed=0)
    stepper = Stepper(grid, cfg, ctx)
    state = ZakharovState(grid, x0.copy(), y0.copy(), 0.0, "ito")
    for n in range(n_steps):
        state = stepper.step(state, n)
    return state


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_max=0.01)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_max=1.0, scheme="euler")
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_max=1.0, alpha=2.0)
    with pytest.raises(ValueError):
        ZakharovState(TorusGrid(d=1, n=8, L=1.0), np.zeros(8), np.zeros(8), 0.0, "bogus")


def test_zero_data_stays_zero():
    grid = TorusGrid(d=2, n=16, L=10.0)
    z = np.zeros(grid.shape, dtype=np.complex128)
    state = _run_det(grid, 0.01, 0.1, z, z)
    assert np.all(state.schro == 0) and np.all(state.wave == 0)


def test_plane_wave_exact():
    # a single Fourier mode with zero wave field solves the free flow exactly
    grid = TorusGrid(d=1, n=64, L=2 * np.pi)
    x = grid.coords(centered=False)[0]
    k = 3.0
    x0 = np.exp(1j * k * x)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    t = 0.5
    state = _run_det(grid, 0.01, t, x0, y0)
    exact = np.exp(1j * (k * x - k**2 * t))
    assert np.max(np.abs(state.schro - exact)) < 1e-11
    assert np.max(np.abs(state.wave)) < 1e-12


def test_mass_exact_deterministic():
    grid = TorusGrid(d=2, n=32, L=20.0)
    x0 = _gaussian(grid, amp=2.0)
    y0 = -np.abs(x0) ** 2 + 0j
    s0 = ZakharovState(grid, x0, y0, 0.0, "ito")
    m0 = mass(s0)
    state = _run_det(grid, 1e-3, 1.0, x0, y0)
    assert abs(mass(state) - m0) / m0 < 1e-12


def test_energy_drift_halves_quadratically():
    grid = TorusGrid(d=1, n=128, L=20.0)
    x0 = _gaussian(grid, amp=1.5)
    y0 = -np.abs(x0) ** 2 + 0j
    e0 = energy_zakharov(ZakharovState(grid, x0, y0, 0.0, "ito"))
    drifts = []
    for dt in (2e-3, 1e-3):
        state = _run_det(grid, dt, 1.0, x0, y0)
        drifts.append(abs(energy_zakharov(state) - e0))
    assert drifts[0] / drifts[1] > 3.0


def test_self_convergence_second_order():
    grid = TorusGrid(d=1, n=64, L=15.0)
    x0 = _gaussian(grid, amp=1.2)
    y0 = -np.abs(x0) ** 2 + 0j
    ref = _run_det(grid, 1e-4, 0.2, x0, y0)
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        state = _run_det(grid, dt, 0.2, x0, y0)
        errs.append(l2_norm(state.schro - ref.schro, grid))
    r1 = errs[0] / errs[1]
    r2 = errs[1] / errs[2]
    assert r1 > 3.2 and r2 > 3.2


def test_lie_first_order_strang_better():
    grid = TorusGrid(d=1, n=64, L=15.0)
    x0 = _gaussian(grid, amp=1.2)
    y0 = -np.abs(x0) ** 2 + 0j
    ref = _run_det(grid, 1e-4, 0.2, x0, y0)
    lie = _run_det(grid, 2e-3, 0.2, x0, y0, scheme="lie")
    strang = _run_det(grid, 2e-3, 0.2, x0, y0, scheme="strang")
    e_lie = l2_norm(lie.schro - ref.schro, grid)
    e_str = l2_norm(strang.schro - ref.schro, grid)
    assert e_str < 0.2 * e_lie


def test_soliton_profile_short():
    # sqrt(2) sech profile with wave = -|X|^2 is a steady phase rotation
    grid = TorusGrid(d=1, n=512, L=40.0)
    x = grid.coords(centered=False)[0] - 20.0
    x0 = (np.sqrt(2.0) / np.cosh(x)).astype(np.complex128)
    y0 = (-np.abs(x0) ** 2).astype(np.complex128)
    t = 1.0
    state = _run_det(grid, 1e-3, t, x0, y0)
    exact = np.exp(1j * t) * x0
    assert np.max(np.abs(state.schro - exact)) < 1e-4
    assert np.max(np.abs(state.wave - y0)) < 1e-4


def _cons_spec():
    return NoiseSpec(
        mode="conservative",
        phi1=(CoeffPreset(kind="fourier-mode", params={"k": (1,), "amp": 0.3}),),
    )


def _noncons_spec(c=1.0):
    return NoiseSpec(
        mode="nonconservative",
        phi1=(CoeffPreset(kind="constant-imag", params={"c": c}),),
    )


def test_mass_conserved_with_real_noise():
    # per-step factor exp(i phi dW) has unit modulus for real phi
    grid = TorusGrid(d=1, n=64, L=10.0)
    spec = _cons_spec()
    cfg = SolverConfig(dt=1e-3, t_max=1.0, noise=spec)
    x0 = _gaussian(grid, amp=1.0)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    rec = run_simulation(grid, cfg, x0, y0, seed=11, detectors=DetectorConfig(record_every=100))
    assert rec.outcome == "completed"
    m = np.asarray(rec.mass)
    assert np.max(np.abs(m - m[0])) / m[0] < 1e-8


def test_modulus_preserved_by_conservative_rescale():
    # |u| = |X| pointwise when W1 is purely imaginary times real coefficients
    grid = TorusGrid(d=1, n=32, L=10.0)
    spec = _cons_spec()
    ctx = NoiseContext(spec, grid, 0.0, 10, 0.1, seed=4)
    x = _gaussian(grid)
    st = ZakharovState(grid, x, np.zeros_like(x), 0.7, "ito")
    u = rescale_forward(st, ctx, 7)
    assert np.allclose(np.abs(u.schro), np.abs(st.schro), atol=1e-14)


@pytest.mark.parametrize("spec_fn", [_cons_spec, _noncons_spec])
def test_rescale_round_trip(spec_fn):
    spec = spec_fn()
    grid = TorusGrid(d=1, n=32, L=10.0)
    ctx = NoiseContext(spec, grid, 0.0, 20, 0.05, seed=8)
    x = _gaussian(grid, amp=2.0) * np.exp(1j * 0.3)
    y = 0.5 * _gaussian(grid, width=2.0)
    st = ZakharovState(grid, x, y, 0.5, "ito")
    back = rescale_backward(rescale_forward(st, ctx, 10), ctx, 10)
    assert np.max(np.abs(back.schro - st.schro)) < 1e-13
    assert np.max(np.abs(back.wave - st.wave)) < 1e-13
    with pytest.raises(ValueError):
        rescale_backward(st, ctx, 10)
    with pytest.raises(ValueError):
        rescale_forward(rescale_forward(st, ctx, 10), ctx, 10)


def test_refined_rescale_identity_and_round_trip():
    grid = TorusGrid(d=1, n=32, L=10.0)
    spec = NoiseSpec(
        mode="conservative",
        phi1=(CoeffPreset(kind="fourier-mode", params={"k": (1,), "amp": 0.3}),),
        phi2=(CoeffPreset(kind="fourier-mode", params={"k": (2,), "amp": 0.2}),),
    )
    dt = 0.1
    ctx = NoiseContext(spec, grid, 0.0, 10, dt, seed=5)
    times = dt * np.arange(11)
    rng = np.random.default_rng(0)
    u_snaps = [rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape) for _ in times]
    v_snaps = [rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape) for _ in times]

    # sigma = 0: W1(0) = 0 and T_0 = 0, so rebasing changes nothing
    t0, u0, v0 = refined_rescale(times, u_snaps, v_snaps, 0.0, ctx, grid)
    assert np.allclose(t0, times)
    assert all(np.allclose(a, b) for a, b in zip(u0, u_snaps))
    assert all(np.allclose(a, b) for a, b in zip(v0, v_snaps))

    sigma = 0.5
    ts, us, vs = refined_rescale(times, u_snaps, v_snaps, sigma, ctx, grid)
    assert ts[0] == pytest.approx(0.0)
    assert len(us) == 6
    tb, ub, vb = refined_rescale_inverse(ts, us, vs, sigma, ctx, grid)
    assert np.allclose(tb, times[5:])
    for a, b in zip(ub, u_snaps[5:]):
        assert np.max(np.abs(a - b)) < 1e-12
    for a, b in zip(vb, v_snaps[5:]):
        assert np.max(np.abs(a - b)) < 1e-12

    with pytest.raises(ValueError):
        refined_rescale(times, u_snaps, v_snaps, 0.123, ctx, grid)


def test_zero_paths_reduce_to_deterministic():
    # a conservative noise realization with all increments zero must step
    # identically to the noise-free integrator
    grid = TorusGrid(d=1, n=64, L=10.0)
    spec = NoiseSpec(
        mode="conservative",
        phi1=(CoeffPreset(kind="fourier-mode", params={"k": (1,), "amp": 0.5}),),
        phi2=(CoeffPreset(kind="fourier-mode", params={"k": (2,), "amp": 0.5}),),
    )
    dt, n_steps = 0.01, 50
    fine = 0.5 * dt * np.arange(2 * n_steps + 1)
    zero_paths = BrownianPathSet(
        time_grid=fine,
        dw1=np.zeros((1, 2 * n_steps)),
        dw2=np.zeros((1, 2 * n_steps)),
        seed=0,
    )
    cfg = SolverConfig(dt=dt, t_max=dt * n_steps, noise=spec)
    ctx = NoiseContext(spec, grid, 0.0, n_steps, dt, seed=0, paths=zero_paths)
    stepper = Stepper(grid, cfg, ctx)
    x0 = _gaussian(grid, amp=1.3)
    y0 = -np.abs(x0) ** 2 + 0j
    st = ZakharovState(grid, x0.copy(), y0.copy(), 0.0, "ito")
    for n in range(n_steps):
        st = stepper.step(st, n)
    det = _run_det(grid, dt, dt * n_steps, x0, y0)
    assert np.max(np.abs(st.schro - det.schro)) < 1e-12
    assert np.max(np.abs(st.wave - det.wave)) < 1e-12

    # the rescaled route also reduces to the same deterministic map
    st2 = ZakharovState(grid, x0.copy(), y0.copy(), 0.0, "rescaled_conservative")
    for n in range(n_steps):
        st2 = stepper.step(st2, n)
    assert np.max(np.abs(st2.schro - det.schro)) < 1e-12


def test_injected_paths_shape_check():
    grid = TorusGrid(d=1, n=16, L=5.0)
    spec = _noncons_spec()
    bad = BrownianPathSet(
        time_grid=np.linspace(0, 1, 4), dw1=np.zeros((1, 3)), dw2=np.zeros((0, 3)), seed=0
    )
    with pytest.raises(ValueError):
        NoiseContext(spec, grid, 0.0, 10, 0.1, seed=0, paths=bad)


def _coarsen(paths: BrownianPathSet, m: int, dt_coarse: float, n_coarse: int) -> BrownianPathSet:
    dw1 = paths.dw1.reshape(paths.dw1.shape[0], 2 * n_coarse, m).sum(axis=2)
    dw2 = paths.dw2.reshape(paths.dw2.shape[0], 2 * n_coarse, m).sum(axis=2) if paths.dw2.size else np.zeros((paths.dw2.shape[0], 2 * n_coarse))
    grid_t = 0.5 * dt_coarse * np.arange(2 * n_coarse + 1)
    return BrownianPathSet(time_grid=grid_t, dw1=dw1, dw2=dw2, seed=paths.seed)


def test_strong_convergence_coupled_paths():
    # pathwise error against a coupled fine reference shrinks at least like
    # sqrt(dt) (measured rate is higher for this multiplicative noise)
    grid = TorusGrid(d=1, n=32, L=10.0)
    spec = _noncons_spec(c=0.8)
    t_max = 0.5
    dt_ref = t_max / 512
    n_ref = 512
    x0 = _gaussian(grid, amp=1.0)
    y0 = -np.abs(x0) ** 2 + 0j

    errs = []
    for seed in (101, 202, 303):
        fine_times = 0.5 * dt_ref * np.arange(2 * n_ref + 1)
        base = sample_brownian(spec, fine_times, seed=seed)

        def integrate(n_steps):
            dt = t_max / n_steps
            paths = _coarsen(base, n_ref // n_steps, dt, n_steps)
            cfg = SolverConfig(dt=dt, t_max=t_max, noise=spec)
            ctx = NoiseContext(spec, grid, 0.0, n_steps, dt, seed=seed, paths=paths)
            stepper = Stepper(grid, cfg, ctx)
            st = ZakharovState(grid, x0.copy(), y0.copy(), 0.0, "rescaled_nonconservative")
            for n in range(n_steps):
                st = stepper.step(st, n)
            return st

        ref = integrate(512)
        e = [l2_norm(integrate(ns).schro - ref.schro, grid) for ns in (16, 64)]
        errs.append(e)
    errs = np.asarray(errs)
    ratios = errs[:, 0] / errs[:, 1]
    # dt shrank by 4: order >= 1/2 demands a mean ratio of at least 2
    assert np.mean(ratios) > 2.0


def test_transform_equivalence_shrinks():
    grid = TorusGrid(d=1, n=64, L=10.0)
    spec = _cons_spec()
    x0 = _gaussian(grid, amp=1.0)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    d_coarse = transform_equivalence_check(
        grid, SolverConfig(dt=2**-7, t_max=0.25, noise=spec), x0, y0, seed=3
    )
    d_fine = transform_equivalence_check(
        grid, SolverConfig(dt=2**-9, t_max=0.25, noise=spec), x0, y0, seed=3
    )
    assert d_coarse < 5e-3
    assert d_coarse / d_fine > 3.0
    with pytest.raises(ValueError):
        transform_equivalence_check(
            grid, SolverConfig(dt=0.1, t_max=0.2, noise=NOISE_OFF), x0, y0, seed=0
        )


def test_run_simulation_reproducible():
    grid = TorusGrid(d=1, n=32, L=10.0)
    spec = _noncons_spec()
    cfg = SolverConfig(dt=0.01, t_max=0.5, noise=spec)
    x0 = _gaussian(grid)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    det = DetectorConfig(record_every=10, scatter_window=0.2, scatter_samples=3)
    a = run_simulation(grid, cfg, x0, y0, seed=42, formulation="rescaled_nonconservative", detectors=det)
    b = run_simulation(grid, cfg, x0, y0, seed=42, formulation="rescaled_nonconservative", detectors=det)
    assert a.mass == b.mass and a.energy == b.energy and a.h_value == b.h_value
    assert len(a.pullback_schro) == 3
    for pa, pb in zip(a.pullback_schro, b.pullback_schro):
        assert np.array_equal(pa, pb)
    c = run_simulation(grid, cfg, x0, y0, seed=43, formulation="rescaled_nonconservative", detectors=det)
    assert a.h_value != c.h_value


def test_blowup_recorded_not_raised():
    # data whose density overflows drives the fields non-finite; the record
    # flags the failure and keeps the time instead of raising
    grid = TorusGrid(d=2, n=32, L=10.0)
    x0 = _gaussian(grid, amp=1e200, width=0.5)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    cfg = SolverConfig(dt=0.05, t_max=1.0, noise=NOISE_OFF)
    with np.errstate(over="ignore", invalid="ignore"):
        rec = run_simulation(grid, cfg, x0, y0, seed=0)
    assert rec.outcome == "blowup_numerical"
    assert rec.failure_time is not None and 0 < rec.failure_time <= 1.0


def test_boundary_contamination_recorded():
    # a traveling packet reaches the box edge and trips the monitor
    grid = TorusGrid(d=1, n=128, L=20.0)
    x = grid.coords(centered=False)[0] - 10.0
    x0 = (np.exp(-(x**2) / 2.0) * np.exp(4j * x)).astype(np.complex128)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    cfg = SolverConfig(dt=0.01, t_max=3.0, noise=NOISE_OFF)
    det = DetectorConfig(monitor_boundary=True, boundary_frac_limit=0.05, record_every=5)
    rec = run_simulation(grid, cfg, x0, y0, seed=0, detectors=det)
    assert rec.outcome == "boundary_contamination"
    assert rec.failure_time is not None


def test_detector_defaults_resolved():
    det = DetectorConfig().resolved(4)
    assert det.s_norm == pytest.approx(0.5)
    assert det.l_norm == pytest.approx(0.0)
    assert det.budget_p == pytest.approx(4.0)
    det2 = DetectorConfig().resolved(2)
    assert det2.s_norm == pytest.approx(-0.5)
    assert det2.budget_p == pytest.approx(6.0)


def test_record_budget_monotone():
    grid = TorusGrid(d=1, n=32, L=10.0)
    cfg = SolverConfig(dt=0.01, t_max=0.3, noise=NOISE_OFF)
    x0 = _gaussian(grid)
    y0 = np.zeros(grid.shape, dtype=np.complex128)
    rec = run_simulation(grid, cfg, x0, y0, seed=0, detectors=DetectorConfig(record_every=5))
    b = np.asarray(rec.budget)
    assert np.all(np.diff(b) > 0)
    assert rec.times[-1] == pytest.approx(0.3)
