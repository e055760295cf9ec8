"""Maximal signed vector sums.

max over sign patterns of |sum_i eps_i u_i| equals the l1-polarization of
the configuration: any signed sum z satisfies |z|^2 = sum eps_i <u_i, z>
<= sum |<u_i, z>|, and conversely every smooth critical direction of the
l1-potential is a normalized signed sum. A sign pattern where every
eps_k <u_k, z> >= 1 cannot be improved by single flips (each flip changes
|z|^2 by 4 (1 - eps_k <u_k, z>)), which certifies a local maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Configuration, MaxCertificate, certified_max
from .rng import rng_for, unit_vectors

ENUM_BUDGET = 30
_BLOCK_BITS = 14

BANG_MARGIN_TOL = 1e-10
_FLIP_TOL = 1e-12


@dataclass(frozen=True)
class SignSumResult:
    """Best sign pattern found, its norm, and the Bang margin
    min_k eps_k <u_k, z> at the returned pattern."""

    signs: tuple[int, ...]
    norm: float
    status: str  # "exact" | "bang_certified"
    bang_margin: float

    def to_dict(self) -> dict:
        return {
            "signs": list(self.signs),
            "norm": self.norm,
            "status": self.status,
            "bang_margin": self.bang_margin,
        }


def signed_sum_norm(config: Configuration, signs) -> float:
    eps = np.asarray(signs, dtype=np.float64)
    if eps.shape != (config.n,):
        raise ValueError("sign pattern length must equal n")
    return float(np.linalg.norm(eps @ config.vectors))


def _result_from_signs(config: Configuration, eps: np.ndarray, status: str) -> SignSumResult:
    z = eps @ config.vectors
    margin = float(np.min(eps * (config.vectors @ z)))
    return SignSumResult(
        signs=tuple(int(s) for s in eps),
        norm=float(np.linalg.norm(z)),
        status=status,
        bang_margin=margin,
    )


def max_sign_sum_exact(config: Configuration) -> SignSumResult:
    """Enumerate all sign patterns with eps_1 = +1 (norm symmetry) and
    return the maximizer; ties pick the lexicographically smallest pattern
    (+1 ordered before -1). Enumeration runs in fixed-size vectorized
    blocks in pattern order, so the tie-break is deterministic."""
    n = config.n
    if n > ENUM_BUDGET:
        raise ValueError(f"exact enumeration limited to n <= {ENUM_BUDGET}, got {n}")
    vectors = config.vectors
    if n == 1:
        return _result_from_signs(config, np.ones(1), "exact")
    m = n - 1
    total = 1 << m
    block = 1 << min(m, _BLOCK_BITS)
    # Bit j of the pattern index flips eps_{j+2}, most significant bit first,
    # so ascending index order is lexicographic order on the sign tuple.
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint64)
    best_sq = -1.0
    best_index = 0
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.uint64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        signs = np.empty((idx.shape[0], n))
        signs[:, 0] = 1.0
        signs[:, 1:] = 1.0 - 2.0 * bits
        z = signs @ vectors
        sq = np.add.reduce(z * z, axis=1)
        j = int(np.argmax(sq))
        if float(sq[j]) > best_sq:
            best_sq = float(sq[j])
            best_index = start + j
    bits = (np.uint64(best_index) >> shifts) & np.uint64(1)
    eps = np.concatenate([[1.0], 1.0 - 2.0 * bits.astype(np.float64)])
    return _result_from_signs(config, eps, "exact")


def max_sign_sum_local(config: Configuration, seed: int, starts: int = 32) -> SignSumResult:
    """Multi-start hill climb: flip the sign with the smallest margin
    eps_k <u_k, z> while any margin is below 1 - 1e-12. Every flip strictly
    increases |z|^2, so the walk terminates at a certified local maximum
    with bang_margin >= 1 - 1e-10. The norm is always at least sqrt(n)."""
    n = config.n
    vectors = config.vectors
    gram = vectors @ vectors.T
    best: SignSumResult | None = None
    for start in range(starts):
        gen = rng_for(seed, start)
        eps = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        margins = eps * (gram @ eps)
        flips = 0
        max_flips = 1000 * n + 1000
        while True:
            k = int(np.argmin(margins))
            if margins[k] >= 1.0 - _FLIP_TOL:
                break
            flips += 1
            if flips > max_flips:
                raise RuntimeError("sign flip walk failed to terminate")
            old = eps[k]
            eps[k] = -old
            if flips % 64 == 0:
                # Periodic exact recompute keeps incremental drift bounded.
                margins = eps * (gram @ eps)
            else:
                margins = margins - 2.0 * old * eps * gram[k]
                margins[k] = eps[k] * float(gram[k] @ eps)
        candidate = _result_from_signs(config, eps, "bang_certified")
        if best is None or candidate.norm > best.norm:
            best = candidate
    assert best is not None
    return best


@dataclass(frozen=True)
class CrosscheckReport:
    sign_norm: float
    enclosure: MaxCertificate
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "sign_norm": self.sign_norm,
            "enclosure": self.enclosure.to_dict(),
            "consistent": self.consistent,
        }


def l1_crosscheck(config: Configuration, delta: float, workers: int | None = None) -> CrosscheckReport:
    """Exact sign-sum norm against the certified l1-potential enclosure;
    the two quantities are equal, so the norm must land inside."""
    exact = max_sign_sum_exact(config)
    enclosure = certified_max(config, 1.0, delta, workers=workers)
    consistent = enclosure.lower - 1e-9 <= exact.norm <= enclosure.upper + 1e-9
    return CrosscheckReport(exact.norm, enclosure, bool(consistent))


def regular_simplex(h: int) -> np.ndarray:
    """h+1 unit vectors in R^h with pairwise inner product -1/h, summing to 0."""
    if h < 1:
        raise ValueError("simplex dimension must be >= 1")
    m = h + 1
    centered = np.eye(m) - np.full((m, m), 1.0 / m)
    # Orthonormal basis of the sum-zero hyperplane (Helmert rows).
    basis = np.zeros((h, m))
    for j in range(1, m):
        basis[j - 1, :j] = 1.0
        basis[j - 1, j] = -j
        basis[j - 1] /= math.sqrt(j * (j + 1.0))
    vertices = centered @ basis.T
    vertices /= np.linalg.norm(vertices, axis=1)[:, None]
    return vertices


def simplex_union_onb(d: int, h: int | None = None) -> Configuration:
    """d+1 vectors in R^d: a regular simplex spanning an even-dimensional
    coordinate subspace, padded with an orthonormal basis of its complement.

    Any even h in [2, d] gives an exact maximal signed sum of sqrt(d+2):
    the simplex part contributes h+2 (best odd split of h+1 vertices) and
    each orthogonal basis vector adds 1. Defaults to the largest even h;
    d=1 has no even-dimensional realization, so the antipodal pair is used.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return Configuration(1, np.array([[1.0], [-1.0]]))
    if h is None:
        h = d if d % 2 == 0 else d - 1
    if h < 2 or h > d or h % 2:
        raise ValueError(f"h must be even with 2 <= h <= d, got {h}")
    vectors = np.zeros((d + 1, d))
    vectors[: h + 1, :h] = regular_simplex(h)
    for j in range(d - h):
        vectors[h + 1 + j, h + j] = 1.0
    return Configuration(d, vectors)


@dataclass(frozen=True)
class HarnessReport:
    """Randomized evidence for the sharp lower bound sqrt(d+2) on maximal
    signed sums of d+1 unit vectors."""

    d: int
    trials: int
    min_over_trials: float
    violations: int
    sharp_value: float
    construction_values: dict[int, float]
    construction_attains: bool

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "trials": self.trials,
            "min_over_trials": self.min_over_trials,
            "violations": self.violations,
            "sharp_value": self.sharp_value,
            "construction_values": {str(k): v for k, v in self.construction_values.items()},
            "construction_attains": self.construction_attains,
        }


def min_signsum_harness(d: int, trials: int, seed: int) -> HarnessReport:
    """Sample ``trials`` random (d+1)-vector configurations, compute each
    exact maximal signed sum, and count violations of sqrt(d+2) - 1e-9.
    Also reports the exact value of every even-h simplex construction."""
    if d > 12:
        raise ValueError("harness limited to d <= 12 for exact enumeration")
    sharp = math.sqrt(d + 2.0)
    min_norm = math.inf
    violations = 0
    for trial in range(trials):
        config = Configuration(d, unit_vectors(seed, d + 1, d, trial))
        result = max_sign_sum_exact(config)
        min_norm = min(min_norm, result.norm)
        if result.norm < sharp - 1e-9:
            violations += 1
    values: dict[int, float] = {}
    if d == 1:
        values[0] = max_sign_sum_exact(simplex_union_onb(1)).norm
    else:
        for h in range(2, d + 1, 2):
            values[h] = max_sign_sum_exact(simplex_union_onb(d, h)).norm
    attains = all(abs(v - sharp) <= 1e-9 for h, v in values.items() if h >= 2)
    return HarnessReport(
        d=d,
        trials=trials,
        min_over_trials=float(min_norm),
        violations=violations,
        sharp_value=sharp,
        construction_values=values,
        construction_attains=bool(attains),
    )
