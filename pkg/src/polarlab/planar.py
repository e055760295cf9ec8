"""Potentials and energies on the unit circle.

Squaring the circle, z -> z^2 with the probe sent to -v^2, turns absolute
inner products into chord lengths: |(-v^2) - u_i^2| = 2 |<v, u_i>|. Circle
polarization problems therefore translate into maximizing sums of powers of
Euclidean distances on T, where the n-th roots of unity admit closed-form
energies and maxima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import Configuration, positive_exponent
from .asymptotics import mean_chord_power
from .parallel import map_chunks

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PlanarConfig:
    """n points z_k = exp(i a_k) on the unit circle; angles sorted in [0, 2pi)."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.sort(np.mod(np.asarray(self.angles, dtype=np.float64).reshape(-1), TWO_PI))
        if a.shape[0] < 1:
            raise ValueError("need at least one angle")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def n(self) -> int:
        return self.angles.shape[0]

    def to_configuration(self) -> Configuration:
        return Configuration(2, np.column_stack([np.cos(self.angles), np.sin(self.angles)]))

    @classmethod
    def from_configuration(cls, config: Configuration) -> "PlanarConfig":
        if config.dim != 2:
            raise ValueError("planar configs live in dimension 2")
        return cls(np.arctan2(config.vectors[:, 1], config.vectors[:, 0]))

    def to_dict(self) -> dict:
        return {"angles": [float(a) for a in self.angles]}


def equidistributed(n: int) -> PlanarConfig:
    """The n-th roots of unity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return PlanarConfig(TWO_PI * np.arange(n) / n)


def equispaced_lines(n: int) -> Configuration:
    """n unit vectors whose lines are equally spaced by pi/n; the minimizing
    shape for circle polarization at p <= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    theta = math.pi * np.arange(n) / n
    return Configuration(2, np.column_stack([np.cos(theta), np.sin(theta)]))


def squared_map(config: PlanarConfig, v_angle: float) -> tuple[PlanarConfig, float]:
    """Doubled configuration and mapped probe point 2*phi + pi, for which
    |mapped_probe - mapped_point_i| = 2 |<v, u_i>| for every i."""
    mapped = PlanarConfig(2.0 * config.angles)
    return mapped, float(np.mod(2.0 * v_angle + math.pi, TWO_PI))


def chord_lengths(angles: np.ndarray, theta: float) -> np.ndarray:
    return 2.0 * np.abs(np.sin((theta - angles) / 2.0))


def riesz_energy(config: PlanarConfig, p) -> float:
    """sum over all ordered pairs (j, k), including j=k, of |z_j - z_k|^p."""
    p = positive_exponent(p)
    diff = config.angles[:, None] - config.angles[None, :]
    chords = 2.0 * np.abs(np.sin(diff / 2.0))
    return float(np.sum(chords**p))


def riesz_energy_closed(n: int, p: int) -> float:
    """Closed-form energy of the n-th roots of unity for integer 0 < p < 2n.

    Even p = 2m: n^2 * C(2m, m). Odd p: the cotangent sum
    n * (-1)^((p-1)/2) * sum_s C(p, s) (-1)^s cot((p/2 - s) pi / n); the
    requirement p < 2n keeps every cotangent argument off the poles.
    """
    if int(p) != p:
        raise ValueError("closed-form energy needs an integer exponent")
    p = int(p)
    if not (0 < p < 2 * n):
        raise ValueError(f"closed form requires 0 < p < 2n, got p={p}, n={n}")
    if p % 2 == 0:
        m = p // 2
        return float(n * n * math.comb(2 * m, m))
    total = 0.0
    for s in range(p + 1):
        total += math.comb(p, s) * (-1) ** s / math.tan((p / 2.0 - s) * math.pi / n)
    return float(n * (-1) ** ((p - 1) // 2) * total)


def _energy(n: int, p: float) -> float:
    """Energy of the n-th roots of unity: closed form when valid, else direct."""
    if float(p).is_integer() and 0 < int(p) < 2 * n:
        return riesz_energy_closed(n, int(p))
    return riesz_energy(equidistributed(n), p)


@dataclass(frozen=True)
class PlanarEnergyReport:
    n: int
    p: float
    direct: float
    closed: float | None
    stolarsky_max: float
    branch: str

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "direct": self.direct,
            "closed": self.closed,
            "stolarsky_max": self.stolarsky_max,
            "branch": self.branch,
        }


def stolarsky_max(n: int, p) -> PlanarEnergyReport:
    """Maximum over T of the distance-power sum for the n-th roots of unity.

    For 0 < p < 2n with m = floor(p/2): E_n/n when m is odd (attained at
    the points themselves), E_2n/(2n) - E_n/n when m is even (attained at
    midpoints). For p >= 2n the parity of n takes over the branch choice.
    Always at least n * mean_chord_power(p).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = positive_exponent(p)
    e_n = _energy(n, p)
    if p < 2 * n:
        m = int(math.floor(p / 2.0))
        if m % 2 == 1:
            value = e_n / n
            branch = "base-points (floor(p/2) odd)"
        else:
            value = _energy(2 * n, p) / (2 * n) - e_n / n
            branch = "midpoints (floor(p/2) even)"
    else:
        if n % 2 == 0:
            value = e_n / n
            branch = "base-points (n even, p >= 2n)"
        else:
            value = _energy(2 * n, p) / (2 * n) - e_n / n
            branch = "midpoints (n odd, p >= 2n)"
    closed = None
    if float(p).is_integer() and 0 < int(p) < 2 * n:
        closed = riesz_energy_closed(n, int(p))
    return PlanarEnergyReport(
        n=n,
        p=p,
        direct=riesz_energy(equidistributed(n), p),
        closed=closed,
        stolarsky_max=float(value),
        branch=branch,
    )


def circle_polarization_constant(n: int, p) -> float:
    """Minimal polarization of n unit vectors on the circle for 0 < p <= 1,
    attained by equally spaced lines: sum_k |cos(k pi/n - pi/(2n))|^p for
    even n and sum_k |cos(k pi/n)|^p for odd n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = positive_exponent(p)
    if p > 1.0:
        raise ValueError("the closed minimax value is only available for 0 < p <= 1")
    k = np.arange(1, n + 1)
    if n % 2 == 0:
        terms = np.abs(np.cos(k * math.pi / n - math.pi / (2.0 * n)))
    else:
        terms = np.abs(np.cos(k * math.pi / n))
    return float(np.sum(terms**p))


def max_distance_power(
    config: PlanarConfig,
    p,
    grid_per_point: int = 100_000,
    workers: int | None = None,
) -> tuple[float, float]:
    """(max over T of sum |z - z_i|^p, attaining angle) by a dense angular
    grid followed by a bounded scalar polish around the best grid point."""
    p = positive_exponent(p)
    angles = config.angles
    total = grid_per_point * config.n

    def chunk_vals(lo: int, hi: int) -> np.ndarray:
        theta = TWO_PI * np.arange(lo, hi) / total
        chords = 2.0 * np.abs(np.sin((theta[:, None] - angles[None, :]) / 2.0))
        return np.add.reduce(chords**p, axis=1)

    best_val = -math.inf
    best_idx = 0
    offset = 0
    for vals in map_chunks(chunk_vals, total, workers=workers):
        j = int(np.argmax(vals))
        if float(vals[j]) > best_val:
            best_val = float(vals[j])
            best_idx = offset + j
        offset += vals.size

    theta0 = TWO_PI * best_idx / total
    h = TWO_PI / total

    def negated(theta: float) -> float:
        return -float(np.sum(chord_lengths(angles, theta) ** p))

    res = minimize_scalar(
        negated, bounds=(theta0 - h, theta0 + h), method="bounded",
        options={"xatol": 1e-13},
    )
    if -float(res.fun) > best_val:
        return -float(res.fun), float(np.mod(res.x, TWO_PI))
    return best_val, theta0


def max_potential_on_circle(
    config: Configuration, p, grid_per_point: int = 100_000
) -> tuple[float, float]:
    """(max over directions of the potential, attaining angle) for a planar
    configuration, via the squaring correspondence: the potential maximum
    is 2^-p times the distance-power maximum of the doubled configuration."""
    planar = PlanarConfig.from_configuration(config)
    doubled, _ = squared_map(planar, 0.0)
    value, theta = max_distance_power(doubled, p, grid_per_point)
    # theta = 2 phi + pi identifies the maximizing direction phi.
    phi = np.mod((theta - math.pi) / 2.0, TWO_PI)
    return value / 2.0 ** float(p), float(phi)


def equidistribution_residual(config: Configuration) -> float:
    """Deviation of the doubled angles from a rotated copy of the n-th roots
    of unity; zero exactly when the lines are equally spaced."""
    planar = PlanarConfig.from_configuration(config)
    doubled = np.sort(np.mod(2.0 * planar.angles, TWO_PI))
    n = doubled.shape[0]
    if n == 1:
        return 0.0
    diffs = doubled - TWO_PI * np.arange(n) / n
    mean = math.atan2(float(np.mean(np.sin(diffs))), float(np.mean(np.cos(diffs))))
    circ = np.mod(diffs - mean + math.pi, TWO_PI) - math.pi
    return float(np.max(np.abs(circ)))


EXCLUDED_TOL = 1e-12


def constant_potential_exponent(n: int, p: float) -> bool:
    """True when p is one of the even integers 2, 4, ..., 2n-2, where the
    equidistributed potential is constant on T and every averaging-optimal
    configuration ties."""
    if abs(p - round(p)) > EXCLUDED_TOL:
        return False
    q = int(round(p))
    return q % 2 == 0 and 2 <= q <= 2 * n - 2


def equidistribution_scan(
    n: int,
    p_grid,
    restarts: int = 8,
    seed: int = 0,
    net_delta: float = 1e-3,
    outer_steps: int = 40,
) -> list[dict]:
    """Numerically probe whether equally spaced points minimize the circle
    polarization across a grid of exponents.

    Each non-excluded p runs the minimax search with seeded restarts and
    reports the best found value (by dense maximization), its gap to the
    equidistributed value, and the equidistribution residual of the best
    configuration. Constant-potential exponents are reported as excluded.
    """
    from .search import SearchOptions, minimize_polarization

    if n < 1:
        raise ValueError("n must be >= 1")
    rows: list[dict] = []
    for index, p_raw in enumerate(p_grid):
        p = positive_exponent(p_raw)
        equi_value = stolarsky_max(n, p).stolarsky_max / 2.0 ** float(p)
        if constant_potential_exponent(n, p):
            rows.append(
                {
                    "p": p,
                    "excluded": True,
                    "equidistributed_value": equi_value,
                    "reason": "constant potential: every averaging-optimal set ties",
                }
            )
            continue
        opts = SearchOptions(
            restarts=restarts,
            net_delta=net_delta,
            outer_steps=outer_steps,
            seed=seed * 1_000_003 + index,
        )
        result = minimize_polarization(n, 2, p, opts)
        best_value, _ = max_potential_on_circle(result.best, p)
        residual = equidistribution_residual(result.best)
        rows.append(
            {
                "p": p,
                "excluded": False,
                "best_value": best_value,
                "equidistributed_value": equi_value,
                "gap": best_value - equi_value,
                "equidistribution_residual": residual,
                "consistent": bool(
                    best_value >= equi_value - 1e-6 and residual <= 1e-4
                ),
            }
        )
    return rows
