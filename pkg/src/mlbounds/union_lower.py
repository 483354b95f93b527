"""Lower bounds on the probability of a union of events.

For events A_i with non-negative weights m_i(x),

    P(U A_i) >= sum_i (sum_{x in A_i} p(x) m_i(x))^2 / sum_j sum_{x in A_i & A_j} p(x) m_i(x)^2

with equality at m_i(x) = 1/deg(x), deg(x) being the number of events that
contain x. Constant weights give de Caen's bound.

On the BIAWGN channel the events are "closer to codeword c_i than to the sent
all-zero word" and the weights are m_i(r) = exp(-a |r - s_i|^2). Tilting the
Gaussian noise by such a weight gives another isotropic Gaussian, so every
term is a univariate or bivariate normal orthant.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .channels import ChannelModel, joint_pairwise_error, orthant_probability, pairwise_error, q_function
from .codebook import IOWEF, DistanceSpectrum, LinearCode
from .errors import ConfigError, NumericalError, SizeGuardError
from .optimize import golden_section
from .results import BoundResult

MAX_K = 16
MAX_N = 64
PROB_TOL = 1e-12
# a_max makes the numerator's tilted noise variance sigma^2 / 100
SHRINK = 100.0
A_GRID = 24


# --- finite event systems ------------------------------------------------------------------


@dataclass(frozen=True)
class EventSystem:
    """Atoms with probabilities and a boolean (event x atom) membership matrix."""

    probs: np.ndarray
    membership: np.ndarray
    atom_names: tuple = ()
    event_names: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64).ravel()
        mem = np.atleast_2d(np.asarray(self.membership, dtype=bool))
        if p.size == 0:
            raise ConfigError("event system needs at least one atom")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ConfigError("atom probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > PROB_TOL * max(1, p.size):
            raise ConfigError(f"atom probabilities sum to {p.sum():.15g}, not 1")
        if mem.shape[1] != p.size:
            raise ConfigError(f"membership has {mem.shape[1]} atom columns, expected {p.size}")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "membership", mem)
        atoms = tuple(self.atom_names) or tuple(f"x{i}" for i in range(p.size))
        events = tuple(self.event_names) or tuple(f"A{i}" for i in range(mem.shape[0]))
        if len(atoms) != p.size or len(events) != mem.shape[0]:
            raise ConfigError("name lists do not match the system's shape")
        object.__setattr__(self, "atom_names", atoms)
        object.__setattr__(self, "event_names", events)

    @property
    def n_events(self) -> int:
        return self.membership.shape[0]

    def degree(self) -> np.ndarray:
        """deg(x): number of events containing each atom."""
        return self.membership.sum(axis=0).astype(np.int64)

    def event_probabilities(self) -> np.ndarray:
        return self.membership @ self.probs

    def intersection_probabilities(self) -> np.ndarray:
        """Matrix of P(A_i & A_j)."""
        mem = self.membership.astype(np.float64)
        return (mem * self.probs) @ mem.T

    def union_probability(self) -> float:
        return float(np.sum(self.probs[self.membership.any(axis=0)]))

    @classmethod
    def from_dict(cls, doc: dict) -> "EventSystem":
        try:
            atoms = doc["atoms"]
            events = doc["events"]
        except (KeyError, TypeError):
            raise ConfigError("event system needs 'atoms' and 'events'") from None
        names = [str(a.get("name", f"x{i}")) for i, a in enumerate(atoms)]
        index = {name: i for i, name in enumerate(names)}
        probs = [float(a["p"]) for a in atoms]
        mem = np.zeros((len(events), len(atoms)), dtype=bool)
        enames = []
        for r, ev in enumerate(events):
            enames.append(str(ev.get("name", f"A{r}")))
            for ref in ev.get("atoms", []):
                i = index.get(ref, ref) if isinstance(ref, str) else ref
                if not isinstance(i, int) or not 0 <= i < len(atoms):
                    raise ConfigError(f"event {enames[-1]!r} references unknown atom {ref!r}")
                mem[r, i] = True
        return cls(np.array(probs), mem, tuple(names), tuple(enames))

    def to_dict(self) -> dict:
        return {
            "atoms": [{"name": n, "p": float(p)} for n, p in zip(self.atom_names, self.probs)],
            "events": [
                {"name": e, "atoms": [self.atom_names[i] for i in np.flatnonzero(row)]}
                for e, row in zip(self.event_names, self.membership)
            ],
        }


def load_events(path) -> EventSystem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed event-system file {path}: {exc}") from None
    return EventSystem.from_dict(doc)


def store_events(events: EventSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(events.to_dict(), fh, indent=1)


def random_event_system(rng: np.random.Generator, max_atoms: int = 12, max_events: int = 6) -> EventSystem:
    """Random system with at least one nonempty event, for property checks."""
    n_atoms = int(rng.integers(1, max_atoms + 1))
    n_events = int(rng.integers(1, max_events + 1))
    p = rng.random(n_atoms) + 1e-3
    p /= p.sum()
    mem = rng.random((n_events, n_atoms)) < rng.uniform(0.1, 0.9)
    if not mem.any():
        mem[0, int(rng.integers(n_atoms))] = True
    return EventSystem(p, mem)


def optimal_weights(events: EventSystem) -> np.ndarray:
    """m_i(x) = 1/deg(x) on every atom (zero where deg = 0)."""
    deg = events.degree().astype(np.float64)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return np.broadcast_to(inv, events.membership.shape).copy()


def _ratio_sum(num: np.ndarray, den: np.ndarray) -> float:
    ok = den > 0
    return float(np.sum(num[ok] ** 2 / den[ok]))


def decaen_bound(events: EventSystem) -> float:
    """sum_i P(A_i)^2 / sum_j P(A_i & A_j)."""
    inter = events.intersection_probabilities()
    return _ratio_sum(np.diag(inter).copy(), inter.sum(axis=1))


def cohen_merhav_bound(events: EventSystem, weights=None) -> float:
    """Weighted union lower bound; ``weights`` is an (events x atoms) array, "optimal", or None (m = 1)."""
    mem = events.membership
    if weights is None:
        m = np.ones(mem.shape)
    elif isinstance(weights, str):
        if weights != "optimal":
            raise ConfigError(f"unknown weight choice {weights!r}")
        m = optimal_weights(events)
    else:
        m = np.broadcast_to(np.asarray(weights, dtype=np.float64), mem.shape)
    if np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ConfigError("weights must be finite and non-negative")
    p = events.probs
    pm = np.where(mem, p * m, 0.0)
    num = pm.sum(axis=1)
    # denominator: sum over j of the (A_i & A_j) mass of p m_i^2
    pm2 = np.where(mem, p * m * m, 0.0)
    den = pm2 @ mem.T.astype(np.float64)
    den = den.sum(axis=1)
    silent = (num == 0) & (events.event_probabilities() > 0)
    if np.any(silent):
        names = [events.event_names[i] for i in np.flatnonzero(silent)]
        warnings.warn(f"events with zero weight but positive probability contribute nothing: {names}",
                      stacklevel=2)
    return _ratio_sum(num, den)


# --- BIAWGN instantiation ------------------------------------------------------------------


def _require_code(code) -> LinearCode:
    if isinstance(code, (DistanceSpectrum, IOWEF)):
        raise ConfigError("union lower bounds need a specific code, not a distance spectrum or ensemble average")
    if not isinstance(code, LinearCode):
        raise ConfigError(f"expected a LinearCode, got {type(code).__name__}")
    if code.k > MAX_K:
        raise SizeGuardError(f"union lower bounds enumerate codeword pairs; k={code.k} exceeds {MAX_K}")
    if code.n > MAX_N:
        raise SizeGuardError(f"union lower bounds need n <= {MAX_N}")
    return code


@dataclass
class PairProfiles:
    """Distinct (w_i, histogram over (w_j, d(c_i, c_j))) rows with multiplicities."""

    n: int
    weights: np.ndarray
    hists: np.ndarray
    mult: np.ndarray
    triples: list = field(default_factory=list)

    @classmethod
    def from_code(cls, code: LinearCode) -> "PairProfiles":
        cw = code.codewords()[1:]
        n = code.n
        packed = (cw.astype(np.uint64) << np.arange(n, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)
        hist = kernels.pair_profiles(packed, n)
        w = cw.sum(axis=1).astype(np.int64)
        rows = np.concatenate([w[:, None], hist.reshape(len(w), -1)], axis=1)
        uniq, mult = np.unique(rows, axis=0, return_counts=True)
        weights = uniq[:, 0]
        hists = uniq[:, 1:].reshape(-1, n + 1, n + 1)
        triples = sorted({(int(wi), int(wj), int(x)) for wi, h in zip(weights, hists) for wj, x in zip(*np.nonzero(h))})
        return cls(n, weights, hists, mult, triples)


def _tilt(c: float, sigma: float):
    """(kappa, tau) of the noise law tilted by exp(-c |r - s_i|^2)."""
    s2 = sigma * sigma
    kappa = 2.0 * c * s2 / (1.0 + 2.0 * c * s2)
    tau = sigma / math.sqrt(1.0 + 2.0 * c * s2)
    return kappa, tau


def _log_k(c: float, sigma: float, n: int, w) -> np.ndarray:
    """log E[exp(-c |r - s_i|^2)] for a codeword of weight w."""
    g = 1.0 + 2.0 * c * sigma * sigma
    return -0.5 * n * math.log(g) - 4.0 * c * np.asarray(w, dtype=np.float64) / g


def _orthants(profiles: PairProfiles, c: float, sigma: float) -> dict:
    """P(A_i & A_j) under the tilted law, keyed by (w_i, w_j, d(c_i, c_j))."""
    kappa, tau = _tilt(c, sigma)
    out = {}
    for wi, wj, x in profiles.triples:
        overlap = 0.5 * (wi + wj - x)
        rho = overlap / math.sqrt(wi * wj)
        # the sum of r over supp(c_j) has mean w_j - 2 kappa |supp c_i & supp c_j| and variance w_j tau^2
        ti = wi * (1.0 - 2.0 * kappa) / (tau * math.sqrt(wi))
        tj = (wj - 2.0 * kappa * overlap) / (tau * math.sqrt(wj))
        out[(wi, wj, x)] = q_function(ti) if x == 0 else orthant_probability(ti, tj, rho)
    return out


def _log_value(profiles: PairProfiles, a: float, sigma: float) -> float:
    kappa, tau = _tilt(a, sigma)
    w = profiles.weights.astype(np.float64)
    with np.errstate(divide="ignore"):
        log_num = _log_k(a, sigma, profiles.n, w) + np.log(q_function(np.sqrt(w) * (1.0 - 2.0 * kappa) / tau))
    table = _orthants(profiles, 2.0 * a, sigma)
    den = np.zeros(len(w))
    for r, (wi, h) in enumerate(zip(profiles.weights, profiles.hists)):
        wj, x = np.nonzero(h)
        den[r] = float(np.sum(h[wj, x] * np.array([table[(int(wi), int(a_), int(b_))] for a_, b_ in zip(wj, x)])))
    with np.errstate(divide="ignore"):
        log_den = _log_k(2.0 * a, sigma, profiles.n, w) + np.log(den)
    ok = np.isfinite(log_num) & np.isfinite(log_den)
    if not np.any(ok):
        return -math.inf
    terms = np.log(profiles.mult[ok]) + 2.0 * log_num[ok] - log_den[ok]
    top = float(np.max(terms))
    return top + math.log(float(np.sum(np.exp(terms - top))))


def a_max(channel: ChannelModel) -> float:
    return (SHRINK - 1.0) / (2.0 * channel.sigma**2)


def ml_lower_bound(code: LinearCode, channel: ChannelModel, a: float | None = None,
                   profiles: PairProfiles | None = None) -> BoundResult:
    """Weighted union lower bound on the ML block error probability.

    ``a`` fixes the weight exp(-a |r - s_i|^2); ``a = 0`` is de Caen's bound.
    With ``a`` None the bound is maximised over a in [0, a_max] by a
    log-spaced grid followed by golden section.
    """
    channel.require("biawgn")
    code = _require_code(code)
    profiles = profiles or PairProfiles.from_code(code)
    if profiles.weights.size == 0:
        return BoundResult("cohen-merhav", 0.0, {"a": 0.0})
    sigma = channel.sigma
    if a is not None:
        if not a >= 0 or not math.isfinite(a):
            raise ConfigError(f"weight parameter a must be finite and >= 0, got {a}")
        val = math.exp(_log_value(profiles, float(a), sigma))
        return BoundResult("cohen-merhav", val, {"a": float(a)})
    top = a_max(channel)
    grid = np.concatenate([[0.0], np.geomspace(top * 1e-6, top, A_GRID)])

    def neg(t):
        try:
            return -_log_value(profiles, t, sigma)
        except NumericalError:
            return math.inf

    vals = np.array([neg(t) for t in grid])
    i = int(np.argmin(vals))
    best_a, best = float(grid[i]), float(vals[i])
    if i == 0:
        lo, hi = 0.0, float(grid[1])
        x, fx = golden_section(neg, lo, hi, tol=1e-8)
    else:
        lo, hi = math.log(grid[max(i - 1, 1)]), math.log(grid[min(i + 1, len(grid) - 1)])
        t, fx = golden_section(lambda u: neg(math.exp(u)), lo, hi, tol=1e-8)
        x = math.exp(t)
    if fx < best:
        best_a, best = float(x), float(fx)
    return BoundResult("cohen-merhav", math.exp(-best), {"a": best_a}, {"a_max": top, "grid_points": len(grid)})


def decaen_ml_bound(code: LinearCode, channel: ChannelModel) -> BoundResult:
    """de Caen's bound assembled directly from pairwise and joint pairwise error probabilities."""
    channel.require("biawgn")
    code = _require_code(code)
    profiles = PairProfiles.from_code(code)
    cache = {}
    total = 0.0
    for wi, h, mult in zip(profiles.weights, profiles.hists, profiles.mult):
        den = 0.0
        for wj, x in zip(*np.nonzero(h)):
            key = (int(wi), int(wj), int(x))
            if key not in cache:
                cache[key] = pairwise_error(channel, key[0]) if x == 0 else joint_pairwise_error(channel, *key)
            den += h[wj, x] * cache[key]
        num = pairwise_error(channel, int(wi))
        if den > 0:
            total += mult * num * num / den
    return BoundResult("decaen", total, {})
