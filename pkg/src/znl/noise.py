"""Driving noise: Brownian families, multiplicative/additive noise fields,
drift corrections, geometric Brownian motions and their extensions.

The multiplicative component is W1(t,x) = sum_k i phi1_k(x) beta1_k(t) and the
additive wave component is W2(t,x) = sum_k phi2_k(x) beta2_k(t), truncated at
a finite K. Coefficients come from closed-form presets (constant, single
Fourier mode, Gaussian bump) or raw grid samples.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .lp_besov import lateral_norm_L1inf, sobolev_norm
from .spectral import TorusGrid, gradient, laplacian


@dataclass(frozen=True)
class CoeffPreset:
    """Closed-form spatial coefficient, sampled on demand.

    kinds:
      constant       params: value (real or complex scalar)
      constant-imag  params: c (real); the coefficient is 1j*c
      fourier-mode   params: k (int per axis), amp; amp*sin(2 pi k.x / L)
      bump           params: center (per axis), width, amp; Gaussian
      samples        params: values (grid-shaped array)
    """

    kind: str
    params: dict

    def sample(self, grid: TorusGrid) -> np.ndarray:
        if self.kind == "constant":
            return np.full(grid.shape, complex(self.params["value"]), dtype=np.complex128)
        if self.kind == "constant-imag":
            return np.full(grid.shape, 1j * float(self.params["c"]), dtype=np.complex128)
        if self.kind == "fourier-mode":
            ks = self.params["k"]
            if np.isscalar(ks):
                ks = [ks] * grid.d
            amp = float(self.params.get("amp", 1.0))
            phase = np.zeros(grid.shape)
            for ax, k in enumerate(ks):
                phase = phase + 2.0 * np.pi * k * grid.coords(centered=False)[ax] / grid.L
            return (amp * np.sin(phase)).astype(np.complex128)
        if self.kind == "bump":
            center = self.params.get("center")
            if center is None:
                center = [grid.L / 2.0] * grid.d
            if np.isscalar(center):
                center = [center] * grid.d
            width = float(self.params.get("width", grid.L / 8.0))
            amp = float(self.params.get("amp", 1.0))
            r2 = np.zeros(grid.shape)
            for ax in range(grid.d):
                dxa = grid.coords(centered=False)[ax] - center[ax]
                # periodic distance
                dxa = (dxa + grid.L / 2.0) % grid.L - grid.L / 2.0
                r2 = r2 + dxa**2
            return (amp * np.exp(-r2 / (2.0 * width**2))).astype(np.complex128)
        if self.kind == "samples":
            vals = np.asarray(self.params["values"], dtype=np.complex128)
            if vals.shape != grid.shape:
                raise ValueError("sampled coefficient shape does not match grid")
            return vals
        raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @property
    def is_constant(self) -> bool:
        return self.kind in ("constant", "constant-imag")

    def constant_value(self) -> complex:
        if self.kind == "constant":
            return complex(self.params["value"])
        if self.kind == "constant-imag":
            return 1j * float(self.params["c"])
        raise ValueError(f"{self.kind!r} coefficient is not spatially constant")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model: mode, truncation K, and the coefficient families."""

    mode: str  # conservative | nonconservative | off
    phi1: tuple[CoeffPreset, ...] = ()
    phi2: tuple[CoeffPreset, ...] = ()

    def __post_init__(self):
        if self.mode not in ("conservative", "nonconservative", "off"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.mode == "off" and (self.phi1 or self.phi2):
            raise ValueError("mode 'off' admits no coefficients")
        if self.mode == "conservative":
            for p in self.phi1:
                if p.is_constant and abs(p.constant_value().imag) > 0:
                    raise ValueError("conservative mode requires real-valued phi1")
                if p.kind == "constant-imag":
                    raise ValueError("conservative mode requires real-valued phi1")
                if p.kind == "samples" and np.any(np.abs(np.asarray(p.params["values"]).imag) > 0):
                    raise ValueError("conservative mode requires real-valued phi1")
        if self.mode == "nonconservative":
            if self.phi2:
                raise ValueError("nonconservative mode requires W2 == 0")
            if not all(p.is_constant for p in self.phi1):
                raise ValueError("nonconservative mode requires spatially constant phi1")
            if self.phi1 and not any(abs(p.constant_value().imag) > 0 for p in self.phi1):
                raise ValueError("nonconservative mode requires sum (Im phi1_k)^2 > 0")

    @property
    def K1(self) -> int:
        return len(self.phi1)

    @property
    def K2(self) -> int:
        return len(self.phi2)

    @property
    def c_vec(self) -> np.ndarray:
        """c_k = Im phi1_k for spatially constant coefficients."""
        return np.array([p.constant_value().imag for p in self.phi1 if p.is_constant])

    @property
    def c_norm(self) -> float:
        return float(np.sqrt(np.sum(self.c_vec**2)))

    def phi1_fields(self, grid: TorusGrid) -> list[np.ndarray]:
        return [p.sample(grid) for p in self.phi1]

    def phi2_fields(self, grid: TorusGrid) -> list[np.ndarray]:
        return [p.sample(grid).real for p in self.phi2]


@dataclass
class BrownianPathSet:
    """Exact Gaussian increments per coefficient index on a fixed time grid."""

    time_grid: np.ndarray  # (N+1,), strictly increasing
    dw1: np.ndarray  # (K1, N)
    dw2: np.ndarray  # (K2, N)
    seed: int

    @property
    def n_steps(self) -> int:
        return self.time_grid.shape[0] - 1 if self.time_grid.size else 0

    @property
    def dt_steps(self) -> np.ndarray:
        return np.diff(self.time_grid)

    def beta1(self) -> np.ndarray:
        """beta1_k(t_n), shape (K1, N+1), beta(t_0) = 0."""
        out = np.zeros((self.dw1.shape[0], self.time_grid.shape[0]))
        if self.dw1.size:
            np.cumsum(self.dw1, axis=1, out=out[:, 1:])
        return out

    def beta2(self) -> np.ndarray:
        out = np.zeros((self.dw2.shape[0], self.time_grid.shape[0]))
        if self.dw2.size:
            np.cumsum(self.dw2, axis=1, out=out[:, 1:])
        return out


@dataclass
class GbmPath:
    """Sampled geometric Brownian motion h(t) > 0 with its generating data."""

    time_grid: np.ndarray
    values: np.ndarray
    c_norm: float


def sample_brownian(spec: NoiseSpec, time_grid: Sequence[float], seed: int) -> BrownianPathSet:
    """N(0, dt) increments for each coefficient, deterministic in the seed."""
    t = np.asarray(time_grid, dtype=np.float64)
    if t.size and np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = max(t.size - 1, 0)
    sd = np.sqrt(np.diff(t)) if n else np.zeros(0)
    dw1 = rng.standard_normal((spec.K1, n)) * sd
    dw2 = rng.standard_normal((spec.K2, n)) * sd
    return BrownianPathSet(time_grid=t, dw1=dw1, dw2=dw2, seed=seed)


def gbm_from_coeffs(c_vec: np.ndarray, paths: BrownianPathSet) -> GbmPath:
    """h(t) = exp(-2 sum_k c_k beta_k(t) - 2 ||c||^2 t), updated multiplicatively."""
    c_vec = np.asarray(c_vec, dtype=np.float64)
    if c_vec.shape[0] != paths.dw1.shape[0]:
        raise ValueError("c_vec length does not match path set truncation K")
    c2 = float(np.sum(c_vec**2))
    if paths.n_steps == 0:
        return GbmPath(paths.time_grid, np.ones(paths.time_grid.shape), np.sqrt(c2))
    dw_sum = c_vec @ paths.dw1
    h = _kernels.gbm_path(dw_sum, c2, paths.dt_steps)
    return GbmPath(time_grid=paths.time_grid, values=h, c_norm=float(np.sqrt(c2)))


def extend_gbm(
    g_times: np.ndarray,
    g_values: np.ndarray,
    c: float,
    t0: float,
    t_out: np.ndarray,
) -> np.ndarray:
    """Whole-line extension of the GBM generated by the scaled Brownian path g.

    Piecewise: exp(-2 g(t) - 2 c^2 t) for t >= t0, a linear ramp
    exp(-2 g(t0) - 2 c^2 t0) * (c^2 (t - t0) + 1) on [t0 - 1/c^2, t0),
    and 0 before. g is linearly interpolated between its samples.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if t0 < 0:
        raise ValueError("t0 must be nonnegative")
    t_out = np.asarray(t_out, dtype=np.float64)
    out = np.zeros_like(t_out)
    g0 = float(np.interp(t0, g_times, g_values))
    anchor = np.exp(-2.0 * g0 - 2.0 * c**2 * t0)
    ramp = (t_out >= t0 - 1.0 / c**2) & (t_out < t0)
    out[ramp] = anchor * (c**2 * (t_out[ramp] - t0) + 1.0)
    tail = t_out >= t0
    gt = np.interp(t_out[tail], g_times, g_values)
    out[tail] = np.exp(-2.0 * gt - 2.0 * c**2 * t_out[tail])
    return out


def mu(spec: NoiseSpec, grid: TorusGrid) -> np.ndarray:
    """Drift correction mu = 1/2 sum_k |phi1_k|^2 (real spatial field)."""
    acc = np.zeros(grid.shape)
    for f in spec.phi1_fields(grid):
        acc = acc + np.abs(f) ** 2
    return 0.5 * acc


def mu_hat(spec: NoiseSpec) -> complex:
    """mu_hat = 1/2 (sum |phi1_k|^2 - sum (phi1_k)^2) for constant coefficients.

    Re(mu_hat) = sum (Im phi1_k)^2.
    """
    acc = 0.0 + 0.0j
    for p in spec.phi1:
        v = p.constant_value()
        acc += abs(v) ** 2 - v**2
    return 0.5 * acc


def w1_field(spec: NoiseSpec, grid: TorusGrid, beta1_t: np.ndarray) -> np.ndarray:
    """W1(t, x) = sum_k i phi1_k(x) beta1_k(t) for the given beta values."""
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for f, b in zip(spec.phi1_fields(grid), beta1_t):
        acc = acc + 1j * f * b
    return acc


def coeff_b(
    spec: NoiseSpec, grid: TorusGrid, beta1_t: np.ndarray
) -> list[np.ndarray]:
    """Transport coefficient b = 2 grad W1 = 2i sum_k grad(phi1_k) beta1_k(t)."""
    out = [np.zeros(grid.shape, dtype=np.complex128) for _ in range(grid.d)]
    for p, b in zip(spec.phi1, beta1_t):
        if p.is_constant:
            continue
        for ax, g in enumerate(gradient(p.sample(grid), grid)):
            out[ax] = out[ax] + 2j * g * b
    return out


def coeff_c(
    spec: NoiseSpec,
    grid: TorusGrid,
    beta1_t: np.ndarray,
    sign_variant: str = "minus",
) -> np.ndarray:
    """Zeroth-order coefficient c = -|grad W1|^2 + Delta W1.

    With real phi1 this is -sum_j (sum_k d_j phi1_k beta_k)^2
    + i sum_k Delta(phi1_k) beta_k. ``sign_variant='plus'`` flips the sign of
    the quadratic part (the transform-equivalence test discriminates; 'minus'
    is the empirically consistent choice).
    """
    quad = np.zeros(grid.shape)
    lap = np.zeros(grid.shape, dtype=np.complex128)
    grads = [np.zeros(grid.shape, dtype=np.complex128) for _ in range(grid.d)]
    for p, b in zip(spec.phi1, beta1_t):
        if p.is_constant:
            continue
        f = p.sample(grid)
        for ax, g in enumerate(gradient(f, grid)):
            grads[ax] = grads[ax] + g * b
        lap = lap + laplacian(f, grid) * b
    for g in grads:
        quad = quad + np.abs(g) ** 2
    sign = -1.0 if sign_variant == "minus" else 1.0
    return sign * quad + 1j * lap


def wave_convolution(spec: NoiseSpec, grid: TorusGrid, paths: BrownianPathSet) -> np.ndarray:
    """Stochastic wave convolution T_t(W2) on the path grid, mode-wise exact.

    Left-point rule with the exact one-step semigroup recursion
    T_{n+1} = e^{i dt |grad|} (T_n - i dW2_n); returns shape (N+1, *grid.shape).
    T == 0 identically when there are no wave coefficients.
    """
    nt = paths.time_grid.shape[0]
    out = np.zeros((nt,) + grid.shape, dtype=np.complex128)
    if spec.K2 == 0 or nt <= 1:
        return out
    fields = spec.phi2_fields(grid)
    kabs = grid.kabs
    t_hat = np.zeros(grid.shape, dtype=np.complex128)
    dts = paths.dt_steps
    for n in range(nt - 1):
        dw = np.zeros(grid.shape)
        for f, inc in zip(fields, paths.dw2[:, n]):
            dw = dw + f * inc
        t_hat = np.exp(1j * dts[n] * kabs) * (t_hat - 1j * np.fft.fftn(dw))
        out[n + 1] = np.fft.ifftn(t_hat)
    return out


@dataclass
class HypothesisReport:
    sum1: float
    lateral_sum: float
    sum2: float
    budget: float
    pass_: bool


def check_hypothesis_H(
    spec: NoiseSpec, d: int, s: float, grid: TorusGrid, budget: float = 1e6
) -> HypothesisReport:
    """Truncated summability sums for the coefficient hypothesis.

    sum1 = sum_k ||phi1_k||^2_{H^{d/2+2+(s-1)_+}},
    lateral = sum_l sum_k integral of the transverse sup of |grad phi1_k|,
    sum2 = sum_k ||phi2_k||^2_{H^{d/2+s-1}}. pass iff all below the budget.
    """
    exp1 = d / 2.0 + 2.0 + max(s - 1.0, 0.0)
    exp2 = d / 2.0 + s - 1.0
    sum1 = 0.0
    lateral = 0.0
    for f in spec.phi1_fields(grid):
        sum1 += sobolev_norm(f, exp1, grid) ** 2
        grads = gradient(f, grid)
        gmag = np.sqrt(sum(np.abs(g) ** 2 for g in grads))
        for ax in range(grid.d):
            lateral += lateral_norm_L1inf(gmag, ax, grid)
    sum2 = 0.0
    for f in spec.phi2_fields(grid):
        sum2 += sobolev_norm(f, exp2, grid) ** 2
    ok = all(np.isfinite(v) and v < budget for v in (sum1, lateral, sum2))
    return HypothesisReport(sum1=sum1, lateral_sum=lateral, sum2=sum2, budget=budget, pass_=ok)


NOISE_OFF = NoiseSpec(mode="off")
