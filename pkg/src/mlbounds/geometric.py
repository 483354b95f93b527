"""Region-decomposition upper bounds: whole space, sphere, shifted sphere, cone.

For a region R around the transmitted point,

    P(error) <= sum_c P(c beats the sent word, r in R) + P(r not in R).

All regions here are symmetric about the axis through the origin and the
transmitted signal s0 = (+1, ..., +1), so everything is conditioned on the
noise component along that axis. With z1 the component pointing from s0
towards the origin, a weight-d competitor wins exactly when the tangential
noise component y along its own direction exceeds

    beta_d(z1) = sqrt(d / (n - d)) * (sqrt(n) - z1),

and the slice of the region at z1 is an (n-1)-ball of radius r(z1). The
remaining n-2 tangential coordinates enter only through a chi-square law,
giving

    P_d(z1) = int_{beta}^{r} phi_sigma(y) F_{n-2}((r^2 - y^2) / sigma^2) dy.

The inner integrand is even and log-concave in y, which is what makes the
cheap tail bound and the pruning below rigorous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import _mc, kernels
from ._special import chi2_sf, log_chi2_cdf, log_chi2_pdf, log_mills, log_phi, logsumexp
from .channels import ChannelModel, pairwise_error
from .codebook import DistanceSpectrum, LinearCode
from .errors import ConfigError, NumericalError, SizeGuardError
from .optimize import coordinate_descent, grid_golden
from .results import BoundResult

OUTER_SIGMAS = 12.0
# terms whose cheap bound sits this many nats below the largest term are not refined
PRUNE_NATS = 37.0
# window of the refined inner integral: the log-concave integrand has fallen by e^-46 at its end
WINDOW_NATS = 46.0
NODES = 16
MAX_PANELS = 256
START_PANELS = 4
OUTER_PANELS = 8
TRIM_POINTS = 97
TRIM_RATIO = 1e-18
MAX_MC_K = 16


@lru_cache(maxsize=None)
def _gauss_legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


@dataclass(frozen=True)
class Region:
    """Region around the transmitted signal in n-dimensional signal space.

    ``shift`` moves a sphere's centre from s0 towards the origin along the
    axis (negative values move it away). ``theta`` is a cone half-angle; the
    cone's apex is the origin and its axis passes through s0.
    """

    kind: str
    radius: float | None = None
    shift: float = 0.0
    theta: float | None = None

    def __post_init__(self):
        if self.kind == "whole":
            return
        if self.kind == "sphere":
            if self.radius is None or not self.radius > 0:
                raise ConfigError("sphere radius must be positive")
        elif self.kind == "cone":
            if self.theta is None or not 0 < self.theta < math.pi / 2:
                raise ConfigError("cone half-angle must lie in (0, pi/2)")
        else:
            raise ConfigError(f"unknown region kind {self.kind!r}")

    @classmethod
    def whole(cls) -> "Region":
        return cls("whole")

    @classmethod
    def sphere(cls, radius: float, shift: float = 0.0) -> "Region":
        return cls("sphere", radius=float(radius), shift=float(shift))

    @classmethod
    def cone(cls, theta: float) -> "Region":
        return cls("cone", theta=float(theta))

    def axial_support(self, n: int):
        """Interval of z1 on which the region's slice is non-empty."""
        if self.kind == "whole":
            return -math.inf, math.inf
        if self.kind == "cone":
            return -math.inf, math.sqrt(n)
        return self.shift - self.radius, self.shift + self.radius

    def slice_radius(self, z1: float, n: int) -> float:
        """Radius of the slice at axial noise z1; inf for the whole space, 0 if empty."""
        if self.kind == "whole":
            return math.inf
        if self.kind == "cone":
            return max(0.0, (math.sqrt(n) - z1) * math.tan(self.theta))
        r2 = self.radius**2 - (z1 - self.shift) ** 2
        return math.sqrt(r2) if r2 > 0 else 0.0

    def contains(self, received: np.ndarray) -> np.ndarray:
        r = np.atleast_2d(np.asarray(received, dtype=np.float64))
        n = r.shape[1]
        if self.kind == "whole":
            return np.ones(r.shape[0], dtype=bool)
        axial = r.sum(axis=1) / math.sqrt(n)
        if self.kind == "cone":
            perp2 = np.maximum((r * r).sum(axis=1) - axial**2, 0.0)
            return (axial > 0) & (perp2 <= (axial * math.tan(self.theta)) ** 2)
        # centre s0 - shift * u equals (1 - shift / sqrt(n)) in every coordinate
        centre = 1.0 - self.shift / math.sqrt(n)
        return ((r - centre) ** 2).sum(axis=1) <= self.radius**2

    def describe(self) -> dict:
        if self.kind == "whole":
            return {"region": "whole"}
        if self.kind == "cone":
            return {"region": "cone", "theta": self.theta}
        return {"region": "sphere", "radius": self.radius, "shift": self.shift}


def _log_cdf(x, k: int):
    if k == 0:
        return np.where(np.asarray(x) >= 0, 0.0, -np.inf)
    return log_chi2_cdf(x, k)


def _pdf_over_cdf(x, k: int):
    if k == 0:
        return np.zeros_like(np.asarray(x, dtype=np.float64))
    return np.exp(log_chi2_pdf(x, k) - log_chi2_cdf(x, k))


class AxialEngine:
    """Evaluates the conditional union sum for one spectrum at one noise level."""

    def __init__(self, spectrum: DistanceSpectrum, sigma: float, n: int | None = None):
        n = int(spectrum.n if n is None else n)
        if n < 1:
            raise ConfigError("block length must be positive")
        d, log_a = spectrum.log_nonzero()
        if d.size and d.max() > n:
            raise ConfigError("spectrum weight exceeds block length")
        self.n = n
        self.sigma = float(sigma)
        self.sqrt_n = math.sqrt(n)
        inner = d < n
        self.log_a = log_a[inner]
        self.coef = np.sqrt(d[inner] / (n - d[inner]))
        self.log_a_full = logsumexp(log_a[~inner]) if np.any(~inner) else -math.inf
        self.k_tan = n - 2
        self.worst_refine = 0.0

    # inner integrand h(t) = phi(t) F_{n-2}(R^2 - t^2), standardized units
    def _log_h(self, t, r2):
        return log_phi(t) + _log_cdf(r2 - t * t, self.k_tan)

    def _decay(self, t, r2):
        return t + 2.0 * t * _pdf_over_cdf(r2 - t * t, self.k_tan)

    def log_tail_cheap(self, b, r2):
        """Upper bound on log int_b^R h, valid for 0 <= b < R."""
        return self._log_h(b, r2) + log_mills(self._decay(b, r2))

    def log_tail(self, b, r2):
        """log int_b^R h(t) dt for 0 <= b < R (elementwise) by windowed composite Gauss-Legendre.

        Panel edges sit where the log-concavity bound on h has dropped by equal
        amounts; a quadratic change of variables removes the power-law zero of h
        at t = R. The panel count doubles until two successive answers agree.
        """
        b = np.asarray(b, dtype=np.float64)
        r2 = np.broadcast_to(np.asarray(r2, dtype=np.float64), b.shape)
        if b.size == 0:
            return b.copy()
        lam = self._decay(b, r2)
        ref = self._log_h(b, r2)
        span = np.maximum(np.sqrt(r2) - b, 0.0)
        window = -lam + np.sqrt(lam * lam + 2.0 * WINDOW_NATS)
        end = np.minimum(window, span)
        drop = lam * end + 0.5 * end * end
        # mass beyond the window, bounded by the same log-concavity argument
        beyond = np.where(window < span, np.exp(-WINDOW_NATS + log_mills(lam + window)), 0.0)
        prev = None
        out = np.empty_like(b)
        todo = np.arange(b.size)
        panels = START_PANELS
        while True:
            rel = self._relative_tail(b[todo], r2[todo], lam[todo], ref[todo], end[todo], drop[todo], panels)
            rel = rel + beyond[todo]
            if prev is not None:
                diff = np.abs(rel - prev) / np.maximum(rel, 1e-300)
                done = diff <= 1e-12
                if panels >= MAX_PANELS:
                    self.worst_refine = max(self.worst_refine, float(diff.max(initial=0.0)))
                    done[:] = True
                out[todo[done]] = ref[todo[done]] + np.log(rel[done])
                todo = todo[~done]
                prev = rel[~done]
                if todo.size == 0:
                    return out
            else:
                prev = rel
            panels *= 2

    def _relative_tail(self, b, r2, lam, ref, end, drop, panels):
        x, w = _gauss_legendre(NODES)
        levels = np.arange(panels + 1) / panels
        edges = -lam[:, None] + np.sqrt(lam[:, None] ** 2 + 2.0 * drop[:, None] * levels[None, :])
        edges = np.clip(edges, 0.0, end[:, None])
        # u = end * (1 - (1 - tau)^2), so the integrand is smooth in tau at u = end
        safe_end = np.where(end > 0, end, 1.0)[:, None]
        tau = 1.0 - np.sqrt(np.clip(1.0 - edges / safe_end, 0.0, 1.0))
        lo, hi = tau[:, :-1], tau[:, 1:]
        half = 0.5 * (hi - lo)
        tn = (lo + half)[:, :, None] + half[:, :, None] * x[None, None, :]
        e3 = safe_end[:, :, None]
        u = e3 * (1.0 - (1.0 - tn) ** 2)
        jac = 2.0 * e3 * (1.0 - tn)
        vals = np.exp(self._log_h(b[:, None, None] + u, r2[:, None, None]) - ref[:, None, None]) * jac
        return np.einsum("mpj,j,mp->m", vals, w, half) * (end > 0)

    def _log_tails_chained(self, b, r2, sel):
        """log H(b) for the selected entries of each row of b, in row-major order.

        Within a row all entries share one integrand, so H(b_j) = int_{b_j}^{b_(j+1)} h + H(b_(j+1)):
        only the largest b needs the windowed tail, the rest are short segments.
        """
        m = b.shape[0]
        order = np.argsort(~sel, axis=1, kind="stable")
        counts = sel.sum(axis=1)
        width = int(counts.max())
        order = order[:, :width]
        valid = np.arange(width)[None, :] < counts[:, None]
        bs = np.take_along_axis(b, order, axis=1)
        rows = np.broadcast_to(np.arange(m)[:, None], bs.shape)
        logs = np.full(bs.shape, -np.inf)
        last = counts - 1
        live = counts > 0
        lr = np.nonzero(live)[0]
        logs[lr, last[lr]] = self.log_tail(bs[lr, last[lr]], r2[lr])
        seg = valid.copy()
        seg[lr, last[lr]] = False
        if np.any(seg):
            lo = bs[seg]
            hi = np.take_along_axis(bs, np.minimum(np.arange(width) + 1, width - 1)[None, :].repeat(m, 0), axis=1)[seg]
            logs[seg] = self._log_segments(lo, hi, r2[rows[seg]])
        # reverse cumulative log-sum-exp along each row
        acc = np.flip(np.logaddexp.accumulate(np.flip(logs, axis=1), axis=1), axis=1)
        out = np.full(b.shape, -np.inf)
        np.put_along_axis(out, order, np.where(valid, acc, -np.inf), axis=1)
        return out[sel]

    def _log_segments(self, lo, hi, r2):
        """log int_lo^hi h(t) dt with lo < hi <= R, doubling the panel count until stable."""
        x, w = _gauss_legendre(NODES)
        ref = self._log_h(lo, r2)
        out = np.empty_like(lo)
        todo = np.arange(lo.size)
        # first pass: an 8-node rule on the single panel serves as the error check
        x8, w8 = _gauss_legendre(NODES // 2)
        half = 0.5 * (hi - lo)
        mid = lo + half
        vals = np.exp(self._log_h(mid[:, None] + half[:, None] * x8[None, :], r2[:, None]) - ref[:, None])
        prev = half * (vals @ w8)
        panels = 1
        while True:
            a, c, rr, rf = lo[todo], hi[todo], r2[todo], ref[todo]
            edges = a[:, None] + (c - a)[:, None] * (np.arange(panels + 1) / panels)[None, :]
            half = 0.5 * np.diff(edges, axis=1)
            t = (edges[:, :-1] + half)[:, :, None] + half[:, :, None] * x[None, None, :]
            vals = np.exp(self._log_h(t, rr[:, None, None]) - rf[:, None, None])
            rel = np.einsum("mpj,j,mp->m", vals, w, half)
            diff = np.abs(rel - prev) / np.maximum(rel, 1e-300)
            done = diff <= 1e-12
            if panels >= MAX_PANELS:
                self.worst_refine = max(self.worst_refine, float(diff.max(initial=0.0)))
                done[:] = True
            with np.errstate(divide="ignore"):
                out[todo[done]] = rf[done] + np.log(rel[done])
            todo = todo[~done]
            prev = rel[~done]
            if todo.size == 0:
                return out
            panels *= 2

    def log_conditional_sum(self, z1, radius, precise: bool = True):
        """log sum_d A_d P_d(z1) and log P(slice | z1), vectorized over z1.

        ``radius`` holds the slice radii (all inf for the whole space, all > 0 otherwise).
        With ``precise=False`` every term keeps its cheap upper bound.
        """
        z1 = np.atleast_1d(np.asarray(z1, dtype=np.float64))
        radius = np.broadcast_to(np.asarray(radius, dtype=np.float64), z1.shape)
        s = self.sigma
        b = self.coef[None, :] * ((self.sqrt_n - z1) / s)[:, None]
        at_full = z1 >= self.sqrt_n
        if np.all(np.isinf(radius)):
            log_p = special.log_ndtr(-b)
            log_full = np.where(at_full, 0.0, -np.inf)
            return _row_logsumexp(self.log_a + log_p, self.log_a_full + log_full), np.zeros(z1.shape)
        rt = radius / s
        r2 = rt * rt
        log_in = log_chi2_cdf(r2, self.n - 1) if self.n > 1 else np.zeros(z1.shape)
        r2_full = np.broadcast_to(r2[:, None], b.shape)
        log_in_full = np.broadcast_to(log_in[:, None], b.shape)
        log_p = np.full(b.shape, -np.inf)
        cheap = np.full(b.shape, -np.inf)
        pos = (b >= 0) & (b < rt[:, None])
        neg_in = (b < 0) & (-b < rt[:, None])
        neg_out = b <= -rt[:, None]
        cheap[pos] = self.log_tail_cheap(b[pos], r2_full[pos])
        cheap[neg_in | neg_out] = log_in_full[neg_in | neg_out]
        log_p[neg_out] = log_in_full[neg_out]
        log_full = np.where(at_full, log_in, -np.inf)
        terms = self.log_a + cheap
        top = np.maximum(np.max(terms, axis=1, initial=-np.inf), self.log_a_full + log_full)
        keep = terms >= (top - PRUNE_NATS)[:, None] if precise else np.zeros(b.shape, dtype=bool)
        # pruned terms keep their cheap upper bound, so the sum stays an upper bound
        log_p[~keep] = cheap[~keep]
        sel = pos & keep
        if np.any(sel):
            log_p[sel] = self._log_tails_chained(b, r2, sel)
        sel = neg_in & keep
        if np.any(sel):
            h = np.exp(self.log_tail(-b[sel], r2_full[sel]) - log_in_full[sel])
            log_p[sel] = log_in_full[sel] + np.log1p(-np.minimum(h, 0.5))
        return _row_logsumexp(self.log_a + log_p, self.log_a_full + log_full), log_in

    def conditional(self, z1, region: Region, clip: bool = True, precise: bool = True) -> np.ndarray:
        """The integrand of the outer z1 integral divided by the Gaussian density, vectorized."""
        z1 = np.atleast_1d(np.asarray(z1, dtype=np.float64))
        radius = np.array([region.slice_radius(z, self.n) for z in z1])
        out = np.ones(z1.shape)
        live = radius > 0
        if not np.any(live):
            return out
        log_s, _ = self.log_conditional_sum(z1[live], radius[live], precise)
        if region.kind == "whole":
            p_out = 0.0
        else:
            p_out = chi2_sf((radius[live] / self.sigma) ** 2, self.n - 1) if self.n > 1 else 0.0
        total = np.exp(np.minimum(log_s, 700.0)) + p_out
        out[live] = np.minimum(1.0, total) if clip else total
        return out

    def integrate(self, region: Region, clip: bool = True, method: str = "adaptive"):
        """Outer integral over z1; returns (value, achieved error estimate, neglected mass).

        ``method`` is "adaptive" (scipy's adaptive Gauss-Kronrod, the reported
        value), "fixed" (composite Gauss-Legendre, for optimizer sweeps) or
        "cheap" (fixed rule with every inner term at its cheap upper bound).
        """
        s = self.sigma
        a, b = region.axial_support(self.n)
        lo, hi = max(a, -OUTER_SIGMAS * s), min(b, OUTER_SIGMAS * s)
        outside = _normal_mass_outside(a, b, s)
        neglected = _normal_mass(a, lo, s) + _normal_mass(hi, b, s)
        if lo >= hi:
            return outside + neglected, 0.0, neglected
        norm = 1.0 / (s * math.sqrt(2 * math.pi))

        def g_vec(z, precise=True):
            return norm * np.exp(-0.5 * (z / s) ** 2) * self.conditional(z, region, clip, precise)

        # locate where the integrand matters using its cheap upper bound
        probe = np.linspace(lo, hi, TRIM_POINTS)
        gc = g_vec(probe, precise=False)
        thresh = TRIM_RATIO * (float(gc.max()) * (hi - lo) + outside)
        hot = np.nonzero(gc > thresh)[0]
        if hot.size == 0:
            return outside + neglected + float(np.trapz(gc, probe)), 0.0, neglected
        i0, i1 = max(hot[0] - 1, 0), min(hot[-1] + 1, TRIM_POINTS - 1)
        cold = np.ones(TRIM_POINTS, dtype=bool)
        cold[i0 : i1 + 1] = False
        step = probe[1] - probe[0]
        neglected += float(gc[cold].sum() * step)
        lo, hi = probe[i0], probe[i1]
        if method in ("fixed", "cheap"):
            x, w = _gauss_legendre(NODES)
            edges = np.linspace(lo, hi, OUTER_PANELS + 1)
            if lo < self.sqrt_n < hi:
                # the all-ones codeword switches on at z1 = sqrt(n)
                edges = np.unique(np.append(edges, self.sqrt_n))
            half = 0.5 * np.diff(edges)
            z = ((edges[:-1] + half)[:, None] + half[:, None] * x[None, :]).ravel()
            wz = (half[:, None] * w[None, :]).ravel()
            val = float(np.dot(wz, g_vec(z, precise=(method == "fixed"))))
            return val + outside + neglected, math.nan, neglected
        if method != "adaptive":
            raise ConfigError(f"unknown quadrature method {method!r}")

        def g(z):
            return float(g_vec(np.array([z]))[0])

        rough, _, _ = self.integrate(region, clip, "fixed")
        eps_abs = min(1e-12, 1e-10 * max(rough - outside - neglected, 1e-290))
        pts = [p for p in (0.0, self.sqrt_n) if lo < p < hi]
        val, err = integrate.quad(g, lo, hi, epsabs=eps_abs, epsrel=1e-10, limit=400, points=pts or None)
        if not math.isfinite(val) or err > max(1e-9 * abs(val), 1e3 * eps_abs):
            raise NumericalError(f"outer quadrature tolerance not met: achieved {err:.3g} on {val:.6g}")
        return val + outside + neglected, err, neglected


def _row_logsumexp(mat: np.ndarray, extra: np.ndarray) -> np.ndarray:
    full = np.concatenate([mat, extra[:, None]], axis=1)
    top = np.max(full, axis=1)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return np.where(np.isfinite(top), safe + np.log(np.exp(full - safe[:, None]).sum(axis=1)), top)


def _normal_mass(a: float, b: float, s: float) -> float:
    """P(a < Z < b) for Z ~ N(0, s^2), evaluated on the side that avoids cancellation."""
    if not a < b:
        return 0.0
    a, b = a / s, b / s
    if a >= 0:
        return float(special.ndtr(-a) - special.ndtr(-b))
    return float(special.ndtr(b) - special.ndtr(a))


def _normal_mass_outside(a: float, b: float, s: float) -> float:
    return float(special.ndtr(a / s) + special.ndtr(-b / s))


def union_bound(spectrum: DistanceSpectrum, channel: ChannelModel) -> BoundResult:
    """Sum over d of A_d times the pairwise error probability (either channel)."""
    d, log_a = spectrum.log_nonzero()
    if d.size == 0:
        return BoundResult("union", 0.0)
    if channel.kind == "biawgn":
        log_p = special.log_ndtr(-np.sqrt(2.0 * d * channel.es_n0))
    else:
        with np.errstate(divide="ignore"):
            log_p = np.log(np.asarray(pairwise_error(channel, d), dtype=np.float64))
    return BoundResult("union", math.exp(min(logsumexp(log_a + log_p), 700.0)))


def _engine(spectrum, channel, n):
    channel.require("biawgn")
    return AxialEngine(spectrum, channel.sigma, n)


def _meta(engine, err, neglected, clip, extra=None):
    meta = {"clip": "min(1, union + outside)" if clip else "none", "quad_error": err, "neglected_mass": neglected}
    if engine.worst_refine > 1e-11:
        meta["inner_refine_residual"] = engine.worst_refine
    if extra:
        meta.update(extra)
    return meta


def region_bound(spectrum: DistanceSpectrum, channel: ChannelModel, region: Region, n: int | None = None,
                 clip: bool = True, method: str = "adaptive") -> BoundResult:
    """Semi-analytic value of the region bound for a fixed region."""
    eng = _engine(spectrum, channel, n)
    val, err, neg = eng.integrate(region, clip, method)
    return BoundResult(region.kind, val, region.describe(), _meta(eng, err, neg, clip))


def tsb_quadrature(spectrum: DistanceSpectrum, channel: ChannelModel, n: int | None = None,
                   theta: float | None = None, clip: bool = True, grid: int = 64) -> BoundResult:
    """Cone (tangential-sphere) bound; the half-angle is optimized when not given."""
    eng = _engine(spectrum, channel, n)
    if theta is not None:
        region = Region.cone(theta)
        val, err, neg = eng.integrate(region, clip)
        return BoundResult("tsb", val, {"theta": float(theta)}, _meta(eng, err, neg, clip))

    def objective(t, method="fixed"):
        return eng.integrate(Region.cone(t), clip, method)[0]

    edge = 1e-3
    best_t, _ = grid_golden(objective, edge, math.pi / 2 - edge, n_grid=grid, tol=1e-7,
                            coarse=lambda t: objective(t, "cheap"))
    val, err, neg = eng.integrate(Region.cone(best_t), clip)
    whole, w_err, w_neg = eng.integrate(Region.whole(), clip)
    if whole < val:
        return BoundResult("tsb", whole, {"theta": math.pi / 2},
                           _meta(eng, w_err, w_neg, clip, {"optimum": "whole-space limit"}))
    return BoundResult("tsb", val, {"theta": best_t}, _meta(eng, err, neg, clip))


def _radius_range(eng: AxialEngine):
    return 1e-3 * eng.sigma, eng.sigma * (eng.sqrt_n + OUTER_SIGMAS) + 2.0 * eng.sqrt_n


def sphere_bound(spectrum: DistanceSpectrum, channel: ChannelModel, n: int | None = None,
                 shifted: bool = False, radius: float | None = None, shift: float | None = None,
                 clip: bool = True, grid: int = 64) -> BoundResult:
    """Sphere bound with optimized radius, optionally with the centre moved along the axis.

    The shifted variant starts from the best centred sphere, so it is never worse.
    """
    eng = _engine(spectrum, channel, n)
    name = "sphere-shifted" if shifted else "sphere"
    if radius is not None:
        region = Region.sphere(radius, shift or 0.0)
        val, err, neg = eng.integrate(region, clip)
        return BoundResult(name, val, {"radius": region.radius, "shift": region.shift}, _meta(eng, err, neg, clip))
    r_lo, r_hi = _radius_range(eng)
    fixed_shift = 0.0 if shift is None else float(shift)

    def obj_r(r, method="fixed"):
        return eng.integrate(Region.sphere(r, fixed_shift), clip, method)[0]

    best_r, best_v = grid_golden(obj_r, r_lo, r_hi, n_grid=grid, tol=1e-7, coarse=lambda r: obj_r(r, "cheap"))
    best = (best_r, fixed_shift)
    if shifted and shift is None:
        bounds = [(r_lo, r_hi), (-0.5 * eng.sqrt_n, eng.sqrt_n)]

        def obj(x):
            return eng.integrate(Region.sphere(x[0], x[1]), clip, "fixed")[0]

        x, v = coordinate_descent(obj, [best_r, 0.0], bounds, n_grid=24, sweeps=6)
        if v < best_v:
            cand = (float(x[0]), float(x[1]))
            # settle the choice on the final quadrature, not the search one
            if eng.integrate(Region.sphere(*cand), clip)[0] <= eng.integrate(Region.sphere(*best), clip)[0]:
                best = cand
    region = Region.sphere(*best)
    val, err, neg = eng.integrate(region, clip)
    whole, w_err, w_neg = eng.integrate(Region.whole(), clip)
    if whole < val:
        return BoundResult(name, whole, {"radius": math.inf, "shift": 0.0},
                           _meta(eng, w_err, w_neg, clip, {"optimum": "whole-space limit"}))
    return BoundResult(name, val, {"radius": best[0], "shift": best[1]}, _meta(eng, err, neg, clip))


@dataclass
class MCEstimate:
    estimate: float
    std_error: float
    samples: int
    seed: int

    def __iter__(self):
        return iter((self.estimate, self.std_error))


def region_bound_mc(code: LinearCode, channel: ChannelModel, region: Region, samples: int, seed: int,
                    workers: int | None = None) -> MCEstimate:
    """Monte-Carlo estimate of the region bound with union-bound multiplicities.

    Each sample scores the number of codewords beating the sent word if the
    received point lies in the region, and 1 otherwise.
    """
    channel.require("biawgn")
    seed = _mc.require_seed(seed)
    if code.k > MAX_MC_K:
        raise SizeGuardError(f"k={code.k} exceeds Monte-Carlo guard {MAX_MC_K}")
    indptr, indices = kernels.supports_csr(code.codewords()[1:])
    sigma = channel.sigma
    n = code.n

    def block(rng, count):
        received = 1.0 + sigma * rng.standard_normal((count, n))
        _, _, _, n_neg = kernels.decode_metrics(received, indptr, indices)
        score = np.where(region.contains(received), n_neg, 1).astype(np.int64)
        return int(score.sum()), int((score * score).sum())

    parts = _mc.run_blocks(block, seed, samples, workers)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / samples
    var = max(0.0, s2 / samples - mean * mean) * samples / max(samples - 1, 1)
    return MCEstimate(mean, math.sqrt(var / samples), samples, seed)
