"""Periodic torus discretization and Fourier-multiplier operator algebra.

All fields live on a uniform d-dimensional torus [0, L)^d with n points per
dimension. Fourier variables are angular frequencies xi in (2*pi/L) * Z^d,
truncated symmetrically.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO

import numpy as np

_MAGIC = b"ZNLF"
_VERSION = 1


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid, n points per dimension on a box of side L."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError("n per dimension must be a power of two >= 8")
        if self.L <= 0:
            raise ValueError("box size must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def dV(self) -> float:
        return self.dx**self.d

    @property
    def volume(self) -> float:
        return self.L**self.d

    @property
    def npoints(self) -> int:
        return self.n**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def nyquist(self) -> float:
        """Largest resolvable |xi_i| along one axis."""
        return np.pi * self.n / self.L

    @cached_property
    def xi1(self) -> np.ndarray:
        """1-D angular frequency axis (FFT layout)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def xi(self) -> list[np.ndarray]:
        """Per-axis frequency arrays broadcastable to the grid shape."""
        out = []
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.n
            out.append(self.xi1.reshape(shape))
        return out

    @cached_property
    def k2(self) -> np.ndarray:
        """|xi|^2 on the full lattice."""
        acc = np.zeros(self.shape)
        for x in self.xi:
            acc = acc + x**2
        return acc

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def x1(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def coords(self, centered: bool = True) -> list[np.ndarray]:
        """Physical coordinates per axis, broadcastable; centered at L/2."""
        out = []
        base = self.x1 - (self.L / 2 if centered else 0.0)
        for ax in range(self.d):
            shape = [1] * self.d
            shape[ax] = self.n
            out.append(base.reshape(shape))
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: zero any mode with |xi_i| above 2/3 of Nyquist."""
        cut = (2.0 / 3.0) * self.nyquist
        mask = np.ones(self.shape, dtype=bool)
        for x in self.xi:
            mask &= np.abs(x) <= cut + 1e-12
        return mask


def fftn(values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(values)


def ifftn(coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(coeffs)


def apply_multiplier(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Inverse transform of symbol(xi) * fft(values)."""
    if np.any(np.isnan(symbol)):
        raise ValueError("multiplier symbol contains NaN")
    return np.fft.ifftn(symbol * np.fft.fftn(values))


def dealias(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Zero all modes outside the 2/3 cube."""
    return np.fft.ifftn(np.fft.fftn(values) * grid.dealias_mask)


def gradient(values: np.ndarray, grid: TorusGrid) -> list[np.ndarray]:
    """Spectral gradient, one complex field per axis."""
    fhat = np.fft.fftn(values)
    return [np.fft.ifftn(1j * grid.xi[ax] * fhat) for ax in range(grid.d)]


def laplacian(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.ifftn(-grid.k2 * np.fft.fftn(values))


def l2_norm(values: np.ndarray, grid: TorusGrid) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.dV))


def lp_norm(values: np.ndarray, p: float, grid: TorusGrid) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(values)))
    return float((np.sum(np.abs(values) ** p) * grid.dV) ** (1.0 / p))


class SpectralField:
    """Complex field with a lazily cached Fourier transform.

    Mutate through ``values``/``set_values``; the coefficient cache is
    invalidated on write and rebuilt on access.
    """

    def __init__(self, grid: TorusGrid, values: np.ndarray | None = None):
        self.grid = grid
        if values is None:
            values = np.zeros(grid.shape, dtype=np.complex128)
        else:
            values = np.asarray(values, dtype=np.complex128)
            if values.shape != grid.shape:
                raise ValueError(f"field shape {values.shape} != grid shape {grid.shape}")
        self._values = values
        self._coeffs: np.ndarray | None = None

    @property
    def values(self) -> np.ndarray:
        return self._values

    def set_values(self, values: np.ndarray) -> None:
        self._values = np.asarray(values, dtype=np.complex128)
        self._coeffs = None

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = np.fft.fftn(self._values)
        return self._coeffs

    def apply(self, symbol: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, np.fft.ifftn(symbol * self.coeffs))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self._values.copy())


def write_field(fh: BinaryIO, values: np.ndarray, grid: TorusGrid, time: float, name: str) -> None:
    """Flat little-endian container: header (d, n, L, time, name) + re/im f64."""
    data = np.ascontiguousarray(values, dtype="<c16")
    raw_name = name.encode("utf-8")
    fh.write(_MAGIC)
    fh.write(struct.pack("<IIIdd", _VERSION, grid.d, grid.n, grid.L, time))
    fh.write(struct.pack("<H", len(raw_name)))
    fh.write(raw_name)
    fh.write(data.tobytes())


def read_field(fh: BinaryIO) -> tuple[np.ndarray, TorusGrid, float, str]:
    magic = fh.read(4)
    if magic != _MAGIC:
        raise ValueError("not a znl field container")
    version, d, n, L, time = struct.unpack("<IIIdd", fh.read(28))
    if version != _VERSION:
        raise ValueError(f"unsupported container version {version}")
    (name_len,) = struct.unpack("<H", fh.read(2))
    name = fh.read(name_len).decode("utf-8")
    count = n**d
    data = np.frombuffer(fh.read(16 * count), dtype="<c16").reshape((n,) * d)
    return data.copy(), TorusGrid(d, n, L), time, name
