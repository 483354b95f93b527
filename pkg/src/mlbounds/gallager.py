"""Gallager-type upper bounds in distance-spectrum form.

With a per-letter tilting function g and the all-zero word sent, the DS2
bound factorizes over coordinates into three per-letter sums

    zeta  = sum_y g(y) p(y|0)
    alpha = sum_y g(y)^(1 - 1/rho) p(y|0)^(1 - lam) p(y|1)^lam
    beta  = sum_y g(y)^(1 - 1/rho) p(y|0)

and reads zeta^(n (1 - rho)) * (sum_d A_d alpha^d beta^(n - d))^rho.
Sums become Gaussian integrals on the BIAWGN channel; for the families
used here they have closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._special import logsumexp
from .channels import ChannelModel, bhattacharyya
from .codebook import IOWEF, DistanceSpectrum, LinearCode, enumerate_spectrum
from .errors import ConfigError, NumericalError, SizeGuardError
from .optimize import coordinate_descent, multistart, polish
from .results import BoundResult

FAMILIES = ("uniform", "llr", "gaussian")
N_PARAMS = {"uniform": 0, "llr": 1, "gaussian": 2}
MAX_OUTPUT_ENUM = 26  # n + k for exhaustive BSC output enumeration


@dataclass(frozen=True)
class TiltingMeasure:
    """Per-letter tilting function g.

    uniform: g = 1. llr: g(y) = (p(y|0) / p(y|1))^s, params (s,).
    gaussian: g(y) = exp(c y + e y^2), BIAWGN only, params (c, e).
    """

    family: str = "uniform"
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown tilting family {self.family!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != N_PARAMS[self.family]:
            raise ConfigError(f"{self.family} tilting takes {N_PARAMS[self.family]} parameters")
        object.__setattr__(self, "params", params)

    def gaussian_form(self, channel: ChannelModel):
        """(c, e) with g(y) = exp(c y + e y^2) on the BIAWGN channel."""
        if self.family == "uniform":
            return 0.0, 0.0
        if self.family == "llr":
            # log p(y|0)/p(y|1) = 2 y / sigma^2
            return 2.0 * self.params[0] / channel.sigma**2, 0.0
        return self.params

    def log_g(self, channel: ChannelModel, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if channel.kind == "bsc":
            if self.family == "gaussian":
                raise ConfigError("gaussian tilting needs a BIAWGN channel")
            if self.family == "uniform":
                return np.zeros(y.shape)
            llr = math.log((1 - channel.p) / channel.p)
            return self.params[0] * np.where(y == 0, llr, -llr)
        c, e = self.gaussian_form(channel)
        return c * y + e * y * y

    def normalization_error(self, channel: ChannelModel) -> float:
        """|integral of the normalized measure g p(.|0) / zeta - 1| by direct summation or quadrature."""
        lz = _log_letter(channel, self, 1.0, 0.0)[0]
        if channel.kind == "bsc":
            p0 = np.array([1 - channel.p, channel.p])
            return abs(float(np.sum(np.exp(self.log_g(channel, np.array([0, 1])) - lz) * p0)) - 1.0)
        s = channel.sigma

        def f(y):
            return math.exp(float(self.log_g(channel, y)) - lz - (y - 1) ** 2 / (2 * s * s)) / (s * math.sqrt(2 * math.pi))

        val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        return abs(val - 1.0)


@dataclass(frozen=True)
class BoundParams:
    lam: float = 0.5
    rho: float = 1.0
    tilt: TiltingMeasure = field(default_factory=TiltingMeasure)

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "rho": self.rho, "tilt": self.tilt.family, "tilt_params": list(self.tilt.params)}


def _log_gauss_integral(s2: float, m: float, b: float, q: float) -> float:
    """log of int N(y; m, s2) exp(b y + q y^2) dy; raises if it diverges."""
    a = 1.0 / (2.0 * s2) - q
    if not a > 0:
        raise NumericalError(f"per-letter integral diverges (quadratic coefficient {q:.6g} >= 1/(2 sigma^2))")
    bb = m / s2 + b
    return -0.5 * math.log(2.0 * math.pi * s2) + 0.5 * math.log(math.pi / a) + bb * bb / (4.0 * a) - m * m / (2.0 * s2)


def _log_letter(channel: ChannelModel, tilt: TiltingMeasure, rho: float, lam: float):
    """(log zeta, log alpha, log beta) for one channel use."""
    kappa = 1.0 - 1.0 / rho
    if channel.kind == "bsc":
        p = channel.p
        p0 = np.array([1 - p, p])
        p1 = np.array([p, 1 - p])
        lg = tilt.log_g(channel, np.array([0, 1]))
        lz = logsumexp(lg + np.log(p0))
        la = logsumexp(kappa * lg + (1 - lam) * np.log(p0) + lam * np.log(p1))
        lb = logsumexp(kappa * lg + np.log(p0))
        return lz, la, lb
    s2 = channel.sigma**2
    c, e = tilt.gaussian_form(channel)
    lz = _log_gauss_integral(s2, 1.0, c, e)
    lb = _log_gauss_integral(s2, 1.0, kappa * c, kappa * e)
    # p(y|0)^(1-lam) p(y|1)^lam is a Gaussian centred at 1 - 2 lam, scaled by exp(-2 lam (1 - lam) / sigma^2)
    m = 1.0 - 2.0 * lam
    la = _log_gauss_integral(s2, m, kappa * c, kappa * e) - (1.0 - m * m) / (2.0 * s2)
    return lz, la, lb


def log_ds2(spectrum: DistanceSpectrum, channel: ChannelModel, params: BoundParams, n: int | None = None) -> float:
    """Natural log of the unclipped DS2 bound."""
    n = spectrum.n if n is None else int(n)
    d, log_a = spectrum.log_nonzero()
    if d.size == 0:
        return -math.inf
    lz, la, lb = _log_letter(channel, params.tilt, params.rho, params.lam)
    inner = logsumexp(log_a + d * la + (n - d) * lb)
    return n * (1.0 - params.rho) * lz + params.rho * inner


def _result(name, log_value, params, extra=None):
    meta = dict(extra or {})
    return BoundResult(name, math.exp(min(log_value, 700.0)), params.as_dict(), meta)


def ds2_bound(spectrum: DistanceSpectrum, channel: ChannelModel, params: BoundParams | None = None,
              n: int | None = None) -> BoundResult:
    params = params or BoundParams()
    return _result("ds2", log_ds2(spectrum, channel, params, n), params)


def ds2_bit_error_bound(iowef: IOWEF, channel: ChannelModel, params: BoundParams | None = None) -> BoundResult:
    """DS2 with A_d replaced by the information-weighted counts sum_w (w/k) A_{w,d}."""
    params = params or BoundParams()
    spec = iowef.bit_spectrum()
    res = _result("ds2-bit", log_ds2(spec, channel, params), params)
    return res


def bhattacharyya_bound(spectrum: DistanceSpectrum, channel: ChannelModel) -> BoundResult:
    """sum_d A_d gamma^d."""
    d, log_a = spectrum.log_nonzero()
    val = logsumexp(log_a + d * math.log(bhattacharyya(channel))) if d.size else -math.inf
    return BoundResult("bhattacharyya", math.exp(min(val, 700.0)), {"gamma": bhattacharyya(channel)})


# --- exact output enumeration on the BSC -------------------------------------------------


def _bsc_tables(code: LinearCode, channel: ChannelModel):
    channel.require("bsc")
    if code.n + code.k > MAX_OUTPUT_ENUM:
        raise SizeGuardError(f"output enumeration needs n + k <= {MAX_OUTPUT_ENUM}")
    n = code.n
    ys = np.arange(1 << n, dtype=np.int64)
    weights = np.bitwise_count(ys.astype(np.uint64)).astype(np.int64)
    cw = code.codewords()[1:]
    cw_int = (cw.astype(np.int64) << np.arange(n)).sum(axis=1)
    # dist[y, c] = Hamming distance between output y and codeword c
    dist = np.bitwise_count((ys[:, None] ^ cw_int[None, :]).astype(np.uint64)).astype(np.int64)
    return ys, weights, dist


def gallager65_bound(source, channel: ChannelModel, params: BoundParams | None = None) -> BoundResult:
    """Gallager's 1965 bound sum_y p(y|0) [sum_c (p(y|c)/p(y|0))^lam]^rho.

    The tilting measure cancels from this bound, so ``params.tilt`` is ignored.
    Exact for a LinearCode on the BSC by summing over all outputs. From a
    distance spectrum only rho = 1 is reducible (any channel).
    """
    params = params or BoundParams()
    lam, rho = params.lam, params.rho
    meta = {"tilt": "cancels"}
    if isinstance(source, LinearCode) and channel.kind == "bsc":
        _, weights, dist = _bsc_tables(source, channel)
        n = source.n
        lp = math.log(channel.p)
        lq = math.log1p(-channel.p)
        log_p0 = weights * lp + (n - weights) * lq
        # log of p(y|c)/p(y|0)
        ratio = (dist - weights[:, None]) * (lp - lq)
        inner = np.array([logsumexp(row) for row in lam * ratio]) if dist.shape[1] else np.full(len(weights), -np.inf)
        total = logsumexp(log_p0 + rho * inner)
        return _result("gallager65", total, params, meta)
    spectrum = source.spectrum if hasattr(source, "spectrum") else source
    if isinstance(source, LinearCode):
        spectrum = enumerate_spectrum(source)
    if rho != 1.0:
        raise ConfigError("gallager65 with rho < 1 needs exact output enumeration (a LinearCode on the BSC)")
    # rho = 1: sum_d A_d (sum_y p0^(1-lam) p1^lam)^d
    _, la, _ = _log_letter(channel, TiltingMeasure(), 1.0, lam)
    d, log_a = spectrum.log_nonzero()
    return _result("gallager65", logsumexp(log_a + d * la) if d.size else -math.inf, params, meta)


def ds2_exhaustive(code: LinearCode, channel: ChannelModel, params: BoundParams) -> float:
    """DS2 computed by summing over every BSC output, without the per-letter factorization."""
    _, weights, dist = _bsc_tables(code, channel)
    n = code.n
    lp, lq = math.log(channel.p), math.log1p(-channel.p)
    log_p0 = weights * lp + (n - weights) * lq
    log_pc = dist * lp + (n - dist) * lq
    lg_letter = params.tilt.log_g(channel, np.array([0, 1]))
    # log G(y) = (#zeros) log g(0) + (#ones) log g(1)
    log_big_g = (n - weights) * lg_letter[0] + weights * lg_letter[1]
    kappa = 1.0 - 1.0 / params.rho
    first = logsumexp(log_big_g + log_p0)
    terms = (kappa * log_big_g + (1 - params.lam) * log_p0)[:, None] + params.lam * log_pc
    second = logsumexp(terms.ravel()) if terms.size else -math.inf
    return math.exp((1.0 - params.rho) * first + params.rho * second)


# --- optimization ------------------------------------------------------------------------

LAMBDA_MAX = 20.0
RHO_SEEDS = (0.4, 0.7, 0.9)


def _box(family: str, channel: ChannelModel):
    box = [(0.0, LAMBDA_MAX), (0.02, 1.0)]
    if family == "llr":
        box.append((-1.0, 1.0))
    elif family == "gaussian":
        # coordinates of the normalized measure g p(.|0) / zeta, a Gaussian:
        # its mean and the log of its variance relative to sigma^2
        box += [(-2.0, 3.0), (-3.0, 3.0)]
    return box


def _unpack(x, family: str, channel: ChannelModel) -> BoundParams:
    lam, rho = float(x[0]), float(x[1])
    if family == "uniform":
        tilt = TiltingMeasure()
    elif family == "llr":
        tilt = TiltingMeasure("llr", (float(x[2]),))
    else:
        s2 = channel.sigma**2
        mean, ratio = float(x[2]), math.exp(float(x[3]))
        # N(1, s2) * exp(c y + e y^2) is proportional to N(mean, ratio * s2)
        e = (1.0 - 1.0 / ratio) / (2.0 * s2)
        c = mean / (ratio * s2) - 1.0 / s2
        tilt = TiltingMeasure("gaussian", (c, e))
    return BoundParams(lam, rho, tilt)


def optimize_bound(bound_fn, spectrum, channel: ChannelModel, family: str | None = None, starts: int = 5,
                   seed: int = 0, fixed: dict | None = None):
    """Minimise ``bound_fn(spectrum, channel, BoundParams)`` over (lam, rho, tilt parameters).

    Coordinate descent with golden-section line searches from ``starts``
    points, the first being the union-Bhattacharyya choice (lam = 1/2,
    rho = 1, g = 1). ``fixed`` pins coordinates, e.g. {"rho": 1.0}.
    Works on the log of the unclipped bound. Returns (BoundParams, BoundResult).
    """
    if family is None:
        family = "gaussian" if channel.kind == "biawgn" else "llr"
    if family not in FAMILIES:
        raise ConfigError(f"unknown tilting family {family!r}")
    if family == "gaussian" and channel.kind != "biawgn":
        raise ConfigError("gaussian tilting needs a BIAWGN channel")
    box = _box(family, channel)
    fixed = dict(fixed or {})
    names = ["lam", "rho"] + [f"t{i}" for i in range(len(box) - 2)]
    for key, val in fixed.items():
        if key not in names:
            raise ConfigError(f"cannot fix unknown parameter {key!r}")
        i = names.index(key)
        box[i] = (float(val), float(val))

    def objective(x):
        try:
            params = _unpack(x, family, channel)
            res = bound_fn(spectrum, channel, params)
        except NumericalError:
            return math.inf
        return math.log(res.raw) if res.raw > 0 else -745.0

    union_start = [0.5, 1.0] + ([1.0, 0.0] if family == "gaussian" else [0.0] * (len(box) - 2))
    initial = [union_start]
    if box[1][0] < box[1][1] and len(box) > 2:
        # at rho = 1 the tilt drops out and the objective is flat in it, which traps
        # free descents; seed with descents at pinned rho < 1 first
        for rho in RHO_SEEDS:
            pinned = list(box)
            pinned[1] = (rho, rho)
            x0 = list(union_start)
            x0[1] = rho
            x, fx = coordinate_descent(objective, x0, pinned)
            if math.isfinite(fx):
                x, _ = polish(objective, x, pinned, fx)
            initial.append(list(x))
    opt = multistart(objective, box, starts=starts, seed=seed, initial=initial)
    params = _unpack(opt.x, family, channel)
    res = bound_fn(spectrum, channel, params)
    res.metadata.update({"starts": starts, "seed": seed, "evaluations": opt.evaluations, "family": family})
    return params, res
