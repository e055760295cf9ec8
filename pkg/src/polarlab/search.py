"""Heuristic minimization of the certified polarization over configurations.

The inner maximum is certified (see ``certified_max``); the outer minimum is
a multi-start descent on a soft-max surrogate and carries no optimality
certificate. Structured starts cover the known and conjectured minimizing
families: stacked orthonormal bases, synthesized tight frames, and equally
spaced lines in the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Configuration, MaxCertificate, certified_max, positive_exponent, sphere_net
from .asymptotics import mean_inner_power, onb_copies
from .rng import rng_for, unit_vectors


def random_configuration(n: int, d: int, seed: int, *path: int) -> Configuration:
    """n iid uniform unit vectors, deterministic for fixed (seed, path)."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    return Configuration(d, unit_vectors(seed, n, d, *path))


@dataclass(frozen=True)
class SearchOptions:
    restarts: int = 4
    net_delta: float = 1e-3
    outer_steps: int = 60
    smoothing: float | None = None  # soft-max beta; defaults to 50/n
    seed: int = 0
    structured_starts: bool = True
    surrogate_delta: float | None = None
    fd_step: float = 1e-5
    recertify_every: int = 25
    workers: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.net_delta <= 0:
            raise ValueError("net_delta must be positive")
        if self.smoothing is not None and self.smoothing <= 0:
            raise ValueError("smoothing must be positive")


@dataclass(frozen=True)
class SearchResult:
    best: Configuration
    certificate: MaxCertificate
    lower_bound: float
    gap: float
    provenance: str
    converged: bool

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "certificate": self.certificate.to_dict(),
            "lower_bound": self.lower_bound,
            "gap": self.gap,
            "provenance": self.provenance,
            "converged": self.converged,
        }


def _surrogate_net(d: int, opts: SearchOptions) -> np.ndarray:
    delta = opts.surrogate_delta
    if delta is None:
        delta = max(opts.net_delta, 0.006 if d == 2 else 0.15)
    return sphere_net(d, delta).points


def _soft_max(vectors: np.ndarray, net: np.ndarray, p: float, beta: float) -> float:
    vals = np.add.reduce(np.abs(net @ vectors.T) ** p, axis=1)
    peak = float(np.max(vals))
    return peak + math.log(float(np.sum(np.exp(beta * (vals - peak))))) / beta


def _tangent_bases(vectors: np.ndarray) -> np.ndarray:
    """(n, d, d-1) orthonormal bases of each vector's tangent space via
    Householder reflections."""
    n, d = vectors.shape
    bases = np.empty((n, d, d - 1))
    for k in range(n):
        w = vectors[k].copy()
        w[0] += math.copysign(1.0, w[0])
        h = np.eye(d) - 2.0 * np.outer(w, w) / float(w @ w)
        bases[k] = h[:, 1:]
    return bases


def _descend(
    vectors: np.ndarray,
    p: float,
    beta: float,
    net: np.ndarray,
    opts: SearchOptions,
) -> tuple[np.ndarray, bool]:
    """Finite-difference descent of the soft-max surrogate on the product of
    spheres, with backtracking halving from 0.1."""
    n, d = vectors.shape
    if d < 2:
        return vectors, True
    current = _soft_max(vectors, net, p, beta)
    h = opts.fd_step
    converged = False
    for _ in range(opts.outer_steps):
        bases = _tangent_bases(vectors)
        grad = np.zeros((n, d - 1))
        for k in range(n):
            for a in range(d - 1):
                probe = vectors.copy()
                plus = vectors[k] + h * bases[k, :, a]
                probe[k] = plus / np.linalg.norm(plus)
                up = _soft_max(probe, net, p, beta)
                minus = vectors[k] - h * bases[k, :, a]
                probe[k] = minus / np.linalg.norm(minus)
                down = _soft_max(probe, net, p, beta)
                grad[k, a] = (up - down) / (2.0 * h)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < 1e-12:
            converged = True
            break
        step = 0.1
        improved = False
        for _ in range(20):
            trial = vectors - step * np.einsum("kda,ka->kd", bases, grad)
            trial /= np.linalg.norm(trial, axis=1)[:, None]
            value = _soft_max(trial, net, p, beta)
            if value < current - 1e-14:
                vectors, current = trial, value
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True
            break
    return vectors, converged


def _starts(n: int, d: int, p: float, opts: SearchOptions):
    if opts.structured_starts:
        if n >= d:
            yield "onb-copies", onb_copies(n, d).vectors
            try:
                from .frames import synthesize_untf

                yield "tight-frame", synthesize_untf(n, d, opts.seed).vectors
            except RuntimeError:
                pass
        if d == 2:
            from .planar import equispaced_lines

            yield "equispaced-lines", equispaced_lines(n).vectors
    for restart in range(opts.restarts):
        yield f"random-{restart}", unit_vectors(opts.seed, n, d, restart)


def minimize_polarization(n: int, d: int, p, opts: SearchOptions | None = None) -> SearchResult:
    """Approximate the n-point polarization constant of S^{d-1}.

    Runs the surrogate descent from every start and returns the
    configuration with the smallest certified upper bound; the reported gap
    is against the universal averaging lower bound n * mean_inner_power.
    Heuristic on the outer level: only the inner maximum is certified.
    """
    p = positive_exponent(p)
    opts = opts or SearchOptions()
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    beta = opts.smoothing if opts.smoothing is not None else 50.0 / n
    net = _surrogate_net(d, opts) if d >= 2 else None
    lower_bound = n * mean_inner_power(d, p)

    best_cert: MaxCertificate | None = None
    best_vectors: np.ndarray | None = None
    best_tag = ""
    all_converged = True

    def consider(tag: str, vectors: np.ndarray):
        nonlocal best_cert, best_vectors, best_tag
        config = Configuration(d, vectors)
        cert = certified_max(config, p, opts.net_delta, workers=opts.workers)
        if best_cert is None or cert.upper < best_cert.upper:
            best_cert, best_vectors, best_tag = cert, vectors, tag

    for tag, start in _starts(n, d, p, opts):
        consider(f"{tag}/start", start)
        if d < 2 or opts.outer_steps <= 0:
            continue
        vectors = start.copy()
        steps_done = 0
        while steps_done < opts.outer_steps:
            burst = min(opts.recertify_every, opts.outer_steps - steps_done)
            sub = SearchOptions(**{**opts.__dict__, "outer_steps": burst})
            vectors, converged = _descend(vectors, p, beta, net, sub)
            steps_done += burst
            consider(f"{tag}/step-{steps_done}", vectors)
            if converged:
                break
        else:
            all_converged = False

    assert best_cert is not None and best_vectors is not None
    return SearchResult(
        best=Configuration(d, best_vectors),
        certificate=best_cert,
        lower_bound=float(lower_bound),
        gap=float(best_cert.upper - lower_bound),
        provenance=best_tag,
        converged=all_converged,
    )
