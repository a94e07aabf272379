"""Periodic square grids and complex fields with Fourier-spectral derivatives."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError


@dataclass(frozen=True)
class Grid2D:
    """Domain [-L, L)² sampled by N points per side.

    Arrays are indexed ``[i2, i1]`` (x2 along axis 0, x1 along axis 1), so a
    C-order ravel runs with x1 fastest.
    """

    N: int
    L: float

    def __post_init__(self):
        if self.N < 64 or self.N & (self.N - 1):
            raise ConfigError("invalid-grid", f"N = {self.N} must be a power of two >= 64")
        if self.L < 8:
            raise ConfigError("invalid-grid", f"L = {self.L} must be >= 8")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def cell(self) -> float:
        return self.dx**2

    @functools.cached_property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @functools.cached_property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    @functools.cached_property
    def mesh(self):
        x1, x2 = np.meshgrid(self.x, self.x, indexing="xy")
        return x1, x2

    @functools.cached_property
    def k2(self) -> np.ndarray:
        k1, k2 = np.meshgrid(self.k, self.k, indexing="xy")
        return k1**2 + k2**2

    @functools.cached_property
    def ik(self):
        # first-derivative multipliers; the Nyquist mode is dropped so that the
        # derivative stays real and skew-symmetric
        kd = self.k.copy()
        kd[self.N // 2] = 0.0
        k1, k2 = np.meshgrid(kd, kd, indexing="xy")
        return 1j * k1, 1j * k2

    def fft(self, f):
        return sfft.fft2(f)

    def ifft(self, f):
        return sfft.ifft2(f)

    def integrate(self, f) -> float:
        return float(np.real(np.sum(f)) * self.cell)

    def inner(self, f, g) -> complex:
        """∫ conj(f) g."""
        return complex(np.vdot(f, g) * self.cell)

    def gradient(self, f):
        fh = self.fft(f)
        ik1, ik2 = self.ik
        return self.ifft(ik1 * fh), self.ifft(ik2 * fh)

    def laplacian(self, f):
        return self.ifft(-self.k2 * self.fft(f))


@dataclass
class ComplexField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.N, self.grid.N):
            raise ConfigError("grid-mismatch", f"values shape {self.values.shape} vs N = {self.grid.N}")

    def mass(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell)

    def normalized(self) -> "ComplexField":
        return ComplexField(self.grid, self.values / np.sqrt(self.mass()))

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def __mul__(self, c):
        return ComplexField(self.grid, self.values * c)

    __rmul__ = __mul__


def gaussian_field(grid: Grid2D, center=(0.0, 0.0), width: float = 1.0) -> ComplexField:
    """Unit-mass gaussian exp(-|x - c|²/(2 width²))."""
    x1, x2 = grid.mesh
    g = np.exp(-((x1 - center[0]) ** 2 + (x2 - center[1]) ** 2) / (2 * width**2))
    return ComplexField(grid, g.astype(np.complex128)).normalized()


def random_start(grid: Grid2D, rng: np.random.Generator, width: float = 1.0) -> ComplexField:
    """Gaussian bump at a random offset within |x| <= L/4, times a random linear phase."""
    rad = 0.25 * grid.L * np.sqrt(rng.uniform())
    ang = rng.uniform(0, 2 * np.pi)
    c = (rad * np.cos(ang), rad * np.sin(ang))
    kvec = rng.normal(scale=1.0, size=2)
    x1, x2 = grid.mesh
    f = gaussian_field(grid, c, width).values * np.exp(1j * (kvec[0] * x1 + kvec[1] * x2))
    return ComplexField(grid, f).normalized()


def fourier_resample(values: np.ndarray, grid: Grid2D, x1_targets, x2_targets) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``values`` on the tensor grid
    ``x1_targets`` × ``x2_targets`` (result indexed [i2, i1]).

    Separable: two small dense DFT-evaluation matrices instead of a 2-D
    non-uniform transform.  The Nyquist mode is split symmetrically.
    """
    N = grid.N
    coef = sfft.fft2(values) / N**2
    m = np.fft.fftfreq(N, d=1.0 / N)  # integer mode numbers

    def eval_matrix(t):
        s = (np.asarray(t, float) + grid.L) / (2 * grid.L) * 2 * np.pi  # phase in [0, 2π)
        E = np.exp(1j * np.outer(s, m))
        E[:, N // 2] = np.cos(s * (N // 2))
        return E

    E1 = eval_matrix(x1_targets)
    E2 = eval_matrix(x2_targets)
    return E2 @ coef @ E1.T
