"""Frame operator algebra and unit norm tight frames.

For p=2 the potential at v equals v^T A v with A the frame operator
sum_i u_i u_i^T, so the polarization is the top eigenvalue of A. It is at
least n/d (trace n over d coordinates), with equality exactly for isotropic
sets: A = (n/d) I. Isotropic sets are also the global minimizers of the
frame potential sum_{i,j} <u_i, u_j>^2 at value n^2/d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Configuration
from .rng import unit_vectors

ISOTROPY_TOL = 1e-9


def frame_matrix(vectors: np.ndarray) -> np.ndarray:
    """sum_i u_i (x) u_i accumulated in index order; exactly symmetric."""
    d = vectors.shape[1]
    a = np.zeros((d, d))
    for u in vectors:
        a += np.outer(u, u)
    return a


@dataclass(frozen=True)
class FrameOperator:
    """d x d symmetric PSD matrix sum_i u_i (x) u_i with trace n."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.shape != (self.dim, self.dim):
            raise ValueError("frame operator must be d x d")
        if float(np.max(np.abs(a - a.T))) > 1e-14:
            raise ValueError("frame operator must be symmetric within 1e-14")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


def frame_operator(config: Configuration) -> FrameOperator:
    a = frame_matrix(config.vectors)
    op = FrameOperator(config.dim, a)
    if abs(op.trace - config.n) > 1e-10:
        raise ValueError(f"frame operator trace {op.trace} deviates from n={config.n}")
    return op


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps rotate away every off-diagonal pair until the off-diagonal
    Frobenius norm drops below ``tol``; quadratic convergence makes this
    reliable at the d <= 64 sizes used here. Returns (eigenvalues,
    eigenvector columns), unsorted.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    d = a.shape[0]
    v = np.eye(d)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(a * a) - np.sum(np.diag(a) ** 2))))
        if off <= tol:
            break
        for i in range(d - 1):
            for j in range(i + 1, d):
                apq = a[i, j]
                if abs(apq) <= tol / max(1, d * d):
                    continue
                tau = (a[j, j] - a[i, i]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                row_i = a[i, :].copy()
                row_j = a[j, :].copy()
                a[i, :] = c * row_i - s * row_j
                a[j, :] = s * row_i + c * row_j
                col_i = a[:, i].copy()
                col_j = a[:, j].copy()
                a[:, i] = c * col_i - s * col_j
                a[:, j] = s * col_i + c * col_j
                vc_i = v[:, i].copy()
                vc_j = v[:, j].copy()
                v[:, i] = c * vc_i - s * vc_j
                v[:, j] = s * vc_i + c * vc_j
    else:
        raise RuntimeError("Jacobi sweep limit reached without convergence")
    return np.diag(a).copy(), v


def polarization_p2(config: Configuration) -> tuple[float, np.ndarray]:
    """Exact p=2 polarization: (top eigenvalue of the frame operator,
    unit eigenvector witness). Always >= n/d; equality iff isotropic."""
    op = frame_operator(config)
    eigenvalues, eigenvectors = jacobi_eigh(op.entries)
    idx = int(np.argmax(eigenvalues))
    witness = eigenvectors[:, idx].copy()
    witness /= np.linalg.norm(witness)
    for x in witness:
        if abs(x) > 1e-12:
            if x < 0:
                witness = -witness
            break
    return float(eigenvalues[idx]), witness


def frame_potential(config: Configuration) -> float:
    """sum over ordered pairs (i, j), including i=j, of <u_i, u_j>^2."""
    gram = config.vectors @ config.vectors.T
    return float(np.sum(gram * gram))


def isotropy_residual(config: Configuration) -> float:
    """Max-norm of A - (n/d) I."""
    a = frame_matrix(config.vectors)
    target = config.n / config.dim
    return float(np.max(np.abs(a - target * np.eye(config.dim))))


@dataclass(frozen=True)
class IsotropyReport:
    residual: float
    is_isotropic: bool
    planar_moment: complex | None = None
    disc_moments: tuple[complex, complex, complex] | None = None

    def to_dict(self) -> dict:
        data = {"residual": self.residual, "is_isotropic": self.is_isotropic}
        if self.planar_moment is not None:
            data["planar_moment"] = [self.planar_moment.real, self.planar_moment.imag]
        if self.disc_moments is not None:
            data["disc_moments"] = [[m.real, m.imag] for m in self.disc_moments]
        return data


def low_dim_isotropy_check(config: Configuration, tol: float = ISOTROPY_TOL) -> IsotropyReport:
    """Isotropy residual plus the complex-moment reformulations.

    d=2: with u_i = z_i on the unit circle, isotropy is equivalent to
    sum z_i^2 = 0. d=3: with z_i the projection onto the first two
    coordinates and w_i the third coordinate (the signed square root of
    1 - |z_i|^2), isotropy is equivalent to sum |z_i|^2 = 2n/3,
    sum z_i^2 = 0 and sum z_i w_i = 0.
    """
    residual = isotropy_residual(config)
    is_isotropic = residual <= tol
    planar = None
    disc = None
    if config.dim == 2:
        z = config.vectors[:, 0] + 1j * config.vectors[:, 1]
        planar = complex(np.sum(z * z))
    elif config.dim == 3:
        z = config.vectors[:, 0] + 1j * config.vectors[:, 1]
        w = config.vectors[:, 2]
        disc = (
            complex(np.sum(z * np.conj(z)) - 2.0 * config.n / 3.0),
            complex(np.sum(z * z)),
            complex(np.sum(z * w)),
        )
    return IsotropyReport(residual, bool(is_isotropic), planar, disc)


def _isotropy_excess_and_grad(vectors: np.ndarray, target: float):
    """(||A - c I||_F^2, Riemannian gradient rows 4 P_tan (A - c I) u_k).

    Minimizing this excess is projected gradient descent on the frame
    potential: with unit rows, FP = ||A||_F^2 and the two objectives differ
    by the constant 2 c tr(A) - c^2 d.
    """
    a = frame_matrix(vectors)
    dev = a - target * np.eye(vectors.shape[1])
    excess = float(np.sum(dev * dev))
    grad = 4.0 * (vectors @ dev)
    radial = np.sum(grad * vectors, axis=1)
    grad = grad - radial[:, None] * vectors
    return excess, grad


def synthesize_untf(
    n: int,
    d: int,
    seed: int,
    residual_tol: float = 1e-8,
    max_restarts: int = 20,
    max_steps: int = 20_000,
) -> Configuration:
    """Unit norm tight frame of n vectors in R^d by projected gradient
    descent on the frame potential, from seeded random starts.

    Backtracking halves the step from 0.1; a restart is triggered when the
    excess stops improving while the residual target is unmet. Deterministic
    for fixed (n, d, seed).
    """
    if not (n >= d >= 1):
        raise ValueError("tight frames require n >= d >= 1")
    target = n / d
    for restart in range(max_restarts):
        vectors = unit_vectors(seed, n, d, restart)
        excess, grad = _isotropy_excess_and_grad(vectors, target)
        stall = 0
        for _ in range(max_steps):
            # Frobenius norm over-estimates the max-norm residual.
            if math.sqrt(excess) <= residual_tol:
                a = frame_matrix(vectors)
                if float(np.max(np.abs(a - target * np.eye(d)))) <= residual_tol:
                    return Configuration(d, vectors)
            step = 0.1
            gnorm2 = float(np.sum(grad * grad))
            if gnorm2 < 1e-300:
                break
            improved = False
            for _ in range(30):
                trial = vectors - step * grad
                trial /= np.linalg.norm(trial, axis=1)[:, None]
                trial_excess, trial_grad = _isotropy_excess_and_grad(trial, target)
                if trial_excess < excess:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            if excess - trial_excess < 1e-14 * max(excess, 1e-30):
                stall += 1
                if stall > 50:
                    break
            else:
                stall = 0
            vectors, excess, grad = trial, trial_excess, trial_grad
        a = frame_matrix(vectors)
        if float(np.max(np.abs(a - target * np.eye(d)))) <= residual_tol:
            return Configuration(d, vectors)
    raise RuntimeError(
        f"tight-frame synthesis failed for n={n}, d={d} after {max_restarts} restarts"
    )
