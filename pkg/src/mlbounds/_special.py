"""Log-domain chi-square helpers for the geometric bounds.

scipy's regularized incomplete gamma underflows near 1e-308, which the cone
and sphere bounds at block lengths in the thousands reach routinely, so the
deep lower tail switches to the power series of P(a, x).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SERIES_MAX_TERMS = 100_000


def _log_lower_gamma_series(a: float, x: np.ndarray) -> np.ndarray:
    # P(a, x) = x^a e^-x / Gamma(a + 1) * sum_j x^j / ((a+1)...(a+j)); only used for x < a
    term = np.ones_like(x)
    total = np.ones_like(x)
    j = 0
    while j < _SERIES_MAX_TERMS:
        j += 1
        term = term * x / (a + j)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return a * np.log(x) - x - special.gammaln(a + 1.0) + np.log(total)


def log_chi2_cdf(x, k: int) -> np.ndarray:
    """log P(chi^2_k <= x), accurate far into the lower tail; k >= 1."""
    x = np.asarray(x, dtype=np.float64)
    a = 0.5 * k
    half = 0.5 * np.maximum(x, 0.0)
    out = np.full(x.shape, -np.inf)
    pos = half > 0
    p = special.gammainc(a, half[pos])
    with np.errstate(divide="ignore"):
        lp = np.log(p)
    tiny = (p < 1e-280) & (half[pos] < a)
    if np.any(tiny):
        lp[tiny] = _log_lower_gamma_series(a, half[pos][tiny])
    out[pos] = lp
    return out


def log_chi2_pdf(x, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    a = 0.5 * k
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    xp = x[pos]
    out[pos] = (a - 1.0) * np.log(xp) - 0.5 * xp - a * math.log(2.0) - special.gammaln(a)
    if k == 2:
        out[x == 0] = -math.log(2.0)
    elif k == 1:
        out[x == 0] = np.inf
    return out


def chi2_sf(x, k: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return special.gammaincc(0.5 * k, 0.5 * np.maximum(x, 0.0))


def log_phi(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return -0.5 * t * t - LOG_SQRT_2PI


def log_mills(lam) -> np.ndarray:
    """log of Q(lam) / phi(lam) for lam >= 0."""
    lam = np.asarray(lam, dtype=np.float64)
    return np.log(special.erfcx(lam / math.sqrt(2.0))) + 0.5 * math.log(math.pi / 2.0)


def logsumexp(v) -> float:
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return -math.inf
    m = float(np.max(v))
    if not math.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(v - m))))
