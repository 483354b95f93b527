"""Memoryless binary-input channels and the scalar special functions the bounds use.

Signals are unit-energy antipodal (bit 0 -> +1, bit 1 -> -1), so for BIAWGN
the noise variance per dimension is sigma^2 = 1 / (2 R Eb/N0). Every bound is
evaluated conditioned on the all-zero codeword, which linearity and output
symmetry make representative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, NumericalError

KINDS = ("biawgn", "bsc")


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    ebno_db: float | None = None
    rate: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown channel kind {self.kind!r}")
        if self.kind == "biawgn":
            if self.ebno_db is None or self.rate is None:
                raise ConfigError("BIAWGN needs ebno_db and rate")
            if not 0 < self.rate <= 1:
                raise ConfigError(f"rate must lie in (0, 1], got {self.rate}")
            if not np.isfinite(self.ebno_db):
                raise ConfigError("ebno_db must be finite")
        else:
            if self.p is None or not 0 < self.p < 0.5:
                raise ConfigError(f"BSC crossover must lie in (0, 1/2), got {self.p}")

    @classmethod
    def biawgn(cls, ebno_db: float, rate: float) -> "ChannelModel":
        return cls("biawgn", ebno_db=float(ebno_db), rate=float(rate))

    @classmethod
    def bsc(cls, p: float) -> "ChannelModel":
        return cls("bsc", p=float(p))

    @property
    def ebno(self) -> float:
        return 10.0 ** (self.ebno_db / 10.0)

    @property
    def es_n0(self) -> float:
        """Symbol SNR R * Eb/N0."""
        return self.rate * self.ebno

    @property
    def sigma(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.es_n0))

    def require(self, kind: str) -> None:
        if self.kind != kind:
            raise ConfigError(f"operation needs a {kind} channel, got {self.kind}")

    def with_ebno(self, ebno_db: float) -> "ChannelModel":
        self.require("biawgn")
        return ChannelModel.biawgn(ebno_db, self.rate)

    def describe(self) -> dict:
        if self.kind == "biawgn":
            return {"kind": "biawgn", "ebno_db": self.ebno_db, "rate": self.rate}
        return {"kind": "bsc", "p": self.p}


def q_function(x):
    """Gaussian tail P(Z > x)."""
    out = 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def log_q(x):
    out = special.log_ndtr(-np.asarray(x, dtype=np.float64))
    return float(out) if np.ndim(out) == 0 else out


def bhattacharyya(channel: ChannelModel) -> float:
    if channel.kind == "bsc":
        return 2.0 * math.sqrt(channel.p * (1.0 - channel.p))
    return math.exp(-channel.es_n0)


def pairwise_error(channel: ChannelModel, d):
    """Probability that ML prefers a fixed codeword at Hamming distance d over the sent one.

    BSC ties (even d, exactly d/2 flips) count one half.
    """
    d_arr = np.asarray(d)
    if np.any(d_arr < 1):
        raise ConfigError("pairwise error needs d >= 1")
    if channel.kind == "biawgn":
        return q_function(np.sqrt(2.0 * d_arr * channel.es_n0))
    p = channel.p

    def one(dd):
        dd = int(dd)
        half = dd // 2
        tail = special.bdtrc(half, dd, p)  # P(X > floor(d/2))
        if dd % 2 == 0:
            tail += 0.5 * math.comb(dd, half) * p**half * (1 - p) ** (dd - half)
        return float(tail)

    if d_arr.ndim == 0:
        return one(d_arr)
    return np.array([one(x) for x in d_arr.ravel()]).reshape(d_arr.shape)


def orthant_probability(a: float, b: float, rho: float) -> float:
    """P(Z1 >= a, Z2 >= b) for a standard bivariate normal with correlation rho.

    Conditions on Z1 and integrates phi(x) Q((b - rho x) / sqrt(1 - rho^2))
    adaptively; the breakpoint at x = b / rho keeps the step-like integrand
    accurate when |rho| is close to 1.
    """
    if not -1.0 - 1e-12 <= rho <= 1.0 + 1e-12:
        raise NumericalError(f"correlation {rho} outside [-1, 1]")
    rho = min(1.0, max(-1.0, rho))
    if a < b:
        a, b = b, a  # outer variable gets the larger threshold
    if rho >= 1.0 - 1e-15:
        return q_function(max(a, b))
    if rho <= -1.0 + 1e-15:
        return max(0.0, q_function(a) - q_function(-b))
    if rho == 0.0:
        return q_function(a) * q_function(b)
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    lo = max(a, -40.0)

    def f(x):
        return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi) * 0.5 * math.erfc((b - rho * x) / (s * math.sqrt(2)))

    # phi(x) is negligible 12 units past max(lo, 0)
    hi = max(lo, 0.0) + 40.0 / max(1.0, abs(lo)) + 12.0
    x0 = b / rho
    pts = [x0] if lo < x0 < hi else None
    # absolute tolerance scaled to the integrand's size so tiny orthants keep relative accuracy
    probe = max(f(x) for x in np.linspace(lo, hi, 257))
    scale = min(1.0, probe * (hi - lo))
    val, err = integrate.quad(f, lo, hi, points=pts, epsabs=max(1e-300, 1e-14 * scale), epsrel=1e-11, limit=200)
    if not np.isfinite(val) or err > max(1e-12, 1e-8 * abs(val)):
        raise NumericalError(f"orthant quadrature did not converge (err {err:.3g})")
    return max(0.0, val)


def codeword_correlation(w_i: int, w_j: int, w_ij: int) -> float:
    """Correlation of the two pairwise decision statistics for codewords of weights w_i, w_j."""
    check_weight_triple(w_i, w_j, w_ij)
    return (w_i + w_j - w_ij) / (2.0 * math.sqrt(w_i * w_j))


def check_weight_triple(w_i: int, w_j: int, w_ij: int) -> None:
    if w_i < 1 or w_j < 1:
        raise ConfigError("codeword weights must be >= 1")
    if not abs(w_i - w_j) <= w_ij <= w_i + w_j or (w_i + w_j + w_ij) % 2:
        raise ConfigError(f"inconsistent weights w_i={w_i}, w_j={w_j}, w_ij={w_ij}")


def joint_pairwise_error(channel: ChannelModel, w_i: int, w_j: int, w_ij: int) -> float:
    """P(A_i and A_j): the received vector is closer to both c_i and c_j than to the sent word."""
    channel.require("biawgn")
    rho = codeword_correlation(w_i, w_j, w_ij)
    a_i = math.sqrt(2.0 * w_i * channel.es_n0)
    a_j = math.sqrt(2.0 * w_j * channel.es_n0)
    return orthant_probability(a_i, a_j, rho)
