"""Parity-check density conversions and a Fano-type bit error lower bound.

Density Delta counts ones per information bit in a parity-check matrix; the
normalized density is t = R Delta / (2 - R). If H(X|Y)/n is bounded below,
Fano's inequality H(X|Y)/n <= R h2(P_b) turns that into P_b >= h2^-1(H/(nR)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

INVERSE_TOL = 1e-14


def h2(x):
    """Binary entropy in bits, h2(0) = h2(1) = 0."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ConfigError("h2 needs arguments in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(arr * np.log2(arr) + (1 - arr) * np.log2(1 - arr))
    out = np.where((arr == 0) | (arr == 1), 0.0, out)
    return float(out) if out.ndim == 0 else out


def h2_inverse(y: float) -> float:
    """The x in [0, 1/2] with h2(x) = y, by bisection to 1e-14."""
    y = float(y)
    if not 0.0 <= y <= 1.0:
        raise ConfigError(f"h2_inverse needs y in [0, 1], got {y}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > INVERSE_TOL:
        mid = 0.5 * (lo + hi)
        if h2(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_rate(rate: float) -> None:
    if not 0.0 < rate < 1.0:
        raise ConfigError(f"rate must lie in (0, 1), got {rate}")


def normalized_density(rate: float, delta: float) -> float:
    """t = R Delta / (2 - R)."""
    _check_rate(rate)
    if not delta >= 0:
        raise ConfigError(f"density must be >= 0, got {delta}")
    return rate * delta / (2.0 - rate)


def min_density(rate: float, t: float) -> float:
    """Delta = (2 - R) t / R, the inverse of normalized_density."""
    _check_rate(rate)
    if not t >= 0:
        raise ConfigError(f"normalized density must be >= 0, got {t}")
    return (2.0 - rate) * t / rate


def pb_lower_from_entropy(h_norm: float, rate: float, normalize_by_rate: bool = True) -> float:
    """Bit error lower bound from a lower bound h_norm on H(X|Y)/n.

    With ``normalize_by_rate`` the bound is h2^-1(h_norm / R); otherwise the
    weaker form h2^-1(h_norm) that drops the rate factor.
    """
    _check_rate(rate)
    if not 0.0 <= h_norm <= rate:
        raise ConfigError(f"need 0 <= H(X|Y)/n <= R, got {h_norm} with R = {rate}")
    return h2_inverse(h_norm / rate if normalize_by_rate else h_norm)


@dataclass(frozen=True)
class DensityPoint:
    capacity: float
    epsilon: float
    t: float
    pb: float | None = None

    def __post_init__(self):
        if not 0.0 < self.capacity <= 1.0:
            raise ConfigError(f"capacity must lie in (0, 1], got {self.capacity}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"gap epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def rate(self) -> float:
        """R = (1 - epsilon) C."""
        return (1.0 - self.epsilon) * self.capacity

    @property
    def delta_min(self) -> float:
        return min_density(self.rate, self.t)

    def as_row(self) -> dict:
        return {
            "capacity": self.capacity,
            "epsilon": self.epsilon,
            "rate": self.rate,
            "t": self.t,
            "delta_min": self.delta_min,
            "pb": self.pb,
        }


def density_table(capacity: float, epsilons, ts, pb: float | None = None) -> list[dict]:
    """Rows (epsilon, t, Delta_min) for every combination, epsilon-major."""
    rows = []
    for eps in epsilons:
        for t in ts:
            rows.append(DensityPoint(capacity, float(eps), float(t), pb).as_row())
    return rows


def entropy_from_pb(pb: float, rate: float) -> float:
    """Largest H(X|Y)/n compatible with bit error pb under the Fano step, R h2(pb)."""
    _check_rate(rate)
    if not 0.0 <= pb <= 0.5:
        raise ConfigError(f"bit error probability must lie in [0, 1/2], got {pb}")
    return rate * h2(pb)
