"""Linearised operators about w on a periodic grid.

    𝓛 = -Δ + 1 - w²        (kernel spanned by w)
    𝓝 = -Δ + 1 - 3w²       (kernel spanned by ∂₁w, ∂₂w)

Operators act on real fields; the Laplacian is spectral.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles
from scipy.sparse.linalg import LinearOperator, eigsh, lobpcg

from .errors import ConfigError, NumericalError
from .grid import Grid2D
from .townes import RadialProfile, w_on_grid

COUPLING = {"L": 1.0, "N": 3.0}


@dataclass
class GridOperator:
    """v ↦ -Δv + v - c w² v on ``grid``."""

    tag: str
    grid: Grid2D
    w: np.ndarray
    d1w: np.ndarray
    d2w: np.ndarray

    @property
    def c(self) -> float:
        return COUPLING[self.tag]

    @property
    def potential(self) -> np.ndarray:
        return 1.0 - self.c * self.w**2

    def __call__(self, v: np.ndarray) -> np.ndarray:
        g = self.grid
        out = g.ifft(g.k2 * g.fft(v))
        if np.isrealobj(v):
            out = out.real
        return out + self.potential * v

    def smoothing(self, v: np.ndarray) -> np.ndarray:
        """(1 - Δ)⁻¹ v."""
        g = self.grid
        out = g.ifft(g.fft(v) / (1.0 + g.k2))
        return out.real if np.isrealobj(v) else out

    def as_linear_operator(self) -> LinearOperator:
        n = self.grid.N

        def mv(x):
            x = np.asarray(x)
            if x.ndim == 2:
                return np.column_stack([mv(col) for col in x.T])
            return self(x.reshape(n, n)).ravel()

        return LinearOperator((n * n, n * n), matvec=mv, matmat=mv, dtype=float)

    def reference_modes(self):
        if self.tag == "L":
            return [self.w]
        return [self.d1w, self.d2w]


def build_operator(tag: str, profile: RadialProfile, grid: Grid2D) -> GridOperator:
    if tag not in COUPLING:
        raise ConfigError("invalid-operator", f"operator tag must be L or N, got {tag!r}")
    if grid.dx > 0.25:
        raise ConfigError("under-resolved", f"dx = {grid.dx:.3g} exceeds 0.25")
    x1, x2 = grid.mesh
    # K0 tail: the leading-order law leaves an O(w/r²) equation residual
    w, d1, d2 = w_on_grid(profile, x1, x2, tail="bessel")
    return GridOperator(tag, grid, w, d1, d2)


@dataclass
class SpectrumReport:
    tag: str
    eigenvalues: np.ndarray
    vectors: np.ndarray  # shape (k, N, N)
    overlap_w: np.ndarray
    overlap_d1w: np.ndarray
    overlap_d2w: np.ndarray
    residuals: np.ndarray
    rho_estimate: float = float("nan")

    def rows(self):
        return [(i, float(self.eigenvalues[i]), float(self.overlap_w[i]),
                 float(self.overlap_d1w[i]), float(self.overlap_d2w[i]))
                for i in range(len(self.eigenvalues))]

    def kernel_indices(self, thresh: float = 1e-6):
        return np.flatnonzero(np.abs(self.eigenvalues) < thresh)


def _overlap(g: Grid2D, v, ref) -> float:
    num = abs(g.integrate(v * ref))
    den = np.sqrt(g.integrate(v * v) * g.integrate(ref * ref))
    return float(min(num / den, 1.0))


def low_spectrum(op: GridOperator, k: int = 4, tol: float = 1e-8, seed: int = 0,
                 max_iter: int = 2000) -> SpectrumReport:
    """k smallest eigenpairs by preconditioned LOBPCG.

    The preconditioner (1 - Δ)⁻¹ turns the operator into identity plus a
    compact part, so the bound states converge in a few hundred sweeps.
    """
    if not 1 <= k <= 10:
        raise ConfigError("invalid-k", f"k must lie in [1, 10], got {k}")
    g = op.grid
    n = g.N
    A = op.as_linear_operator()

    def pc(x):
        x = np.asarray(x)
        if x.ndim == 2:
            return np.column_stack([op.smoothing(c.reshape(n, n)).ravel() for c in x.T])
        return op.smoothing(x.reshape(n, n)).ravel()

    M = LinearOperator(A.shape, matvec=pc, matmat=pc, dtype=float)
    rng = np.random.default_rng(seed)
    x1, x2 = g.mesh
    env = np.exp(-0.5 * (x1**2 + x2**2))
    m = k + 2  # guard vectors speed up the last wanted pair
    X = np.empty((n * n, m))
    starts = [op.w, op.d1w, op.d2w]
    for j in range(m):
        base = starts[j] if j < len(starts) else env * rng.standard_normal((n, n))
        X[:, j] = base.ravel() + 1e-3 * (env * rng.standard_normal((n, n))).ravel()
    vals, vecs = lobpcg(A, X, M=M, largest=False, tol=tol * 1e-2, maxiter=max_iter)
    order = np.argsort(vals)[:k]
    vals, vecs = vals[order], vecs[:, order]
    res = np.empty(k)
    cell = g.cell
    for j in range(k):
        v = vecs[:, j] / np.sqrt(np.sum(vecs[:, j] ** 2) * cell)
        vecs[:, j] = v
        r = A.matvec(v) - vals[j] * v
        res[j] = np.sqrt(np.sum(r * r) * cell)
    bad = res >= tol * np.abs(vals) + tol
    if np.any(bad):
        raise NumericalError("eigensolver-stall",
                             f"residuals {res[bad]} exceed tolerance {tol:.1e}")
    V = vecs.T.reshape(k, n, n)
    ow = np.array([_overlap(g, v, op.w) for v in V])
    o1 = np.array([_overlap(g, v, op.d1w) for v in V])
    o2 = np.array([_overlap(g, v, op.d2w) for v in V])
    return SpectrumReport(op.tag, vals, V, ow, o1, o2, res)


def kernel_angle(report: SpectrumReport, op: GridOperator, indices) -> float:
    """Largest principal angle between the eigenvectors at ``indices`` and the reference kernel."""
    E = np.column_stack([report.vectors[i].ravel() for i in indices])
    R = np.column_stack([m.ravel() for m in op.reference_modes()])
    return float(np.max(subspace_angles(E, R)))


def rotate90(f: np.ndarray) -> np.ndarray:
    """f(R⁻¹x) for a quarter turn R on the grid; exact on nodes up to the unmatched edge row."""
    # x1 -> x2, x2 -> -x1: node (i2, i1) maps to (i1, N - i2) modulo N
    return np.roll(np.rot90(f, k=1), 1, axis=0)


def coercivity_rho(profile: RadialProfile, grid: Grid2D, tol: float = 1e-8) -> float:
    """min ⟨𝓛v, v⟩ / ‖v‖²_{H¹} over v ⟂ w.

    With B = 1 - Δ, 𝓛 = B - w², so the quotient is 1 - κ where κ is the top
    eigenvalue of the compact operator P B^{-1/2} w² B^{-1/2} P, P projecting
    out B^{-1/2} w.
    """
    op = build_operator("L", profile, grid)
    g = grid
    n = g.N
    sq = 1.0 / np.sqrt(1.0 + g.k2)

    def bhalf(f):
        return g.ifft(g.fft(f) * sq).real

    c = bhalf(op.w)
    c /= np.linalg.norm(c)
    w2 = op.w**2

    def mv(x):
        f = np.asarray(x).reshape(n, n)
        f = f - np.sum(c * f) * c
        f = bhalf(w2 * bhalf(f))
        f = f - np.sum(c * f) * c
        return f.ravel()

    K = LinearOperator((n * n, n * n), matvec=mv, dtype=float)
    v0 = (np.exp(-0.5 * (g.mesh[0] ** 2 + g.mesh[1] ** 2)) * (1 + g.mesh[0])).ravel()
    kappa = eigsh(K, k=1, which="LA", v0=v0, tol=tol * 1e-2, return_eigenvectors=False)[0]
    rho = 1.0 - float(kappa)
    if rho < -tol:
        raise NumericalError("coercivity-violated", f"rho = {rho:.3e}")
    return rho
