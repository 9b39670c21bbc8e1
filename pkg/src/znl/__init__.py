"""Pseudospectral simulator and property-test laboratory for a stochastic
Zakharov-type Schroedinger-wave system on the torus."""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
