"""IOWEFs of terminated recursive convolutional codes and of turbo ensembles.

Component tables come from a dynamic programme over (time, state, input
weight, parity weight). Parallel concatenation under the uniform interleaver
averages over all N! permutations in closed form:

    A_pc[w, j] = sum_{j1 + j2 = j} A1[w, j1] * A2[w, j2] / C(N, w)
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import kernels
from .codebook import IOWEF, DistanceSpectrum
from .errors import ConfigError

TERMINATIONS = ("terminated", "truncated")


def parse_poly(text, notation: str = "octal") -> tuple:
    """Polynomial coefficients, D^0 first.

    Binary strings are read left to right as the coefficients of
    D^0, D^1, ...; octal digits expand to that binary string with leading
    zeros stripped (so ``"23"`` -> ``10011`` -> 1 + D^3 + D^4).
    """
    text = str(text).strip()
    if notation == "octal":
        try:
            bits = bin(int(text, 8))[2:]
        except ValueError as exc:
            raise ConfigError(f"bad octal polynomial {text!r}") from exc
    elif notation == "binary":
        bits = text.lstrip("0") if set(text) <= {"0", "1"} else None
        if bits is None:
            raise ConfigError(f"bad binary polynomial {text!r}")
    else:
        raise ConfigError(f"unknown polynomial notation {notation!r}")
    if not bits or bits == "0":
        raise ConfigError("zero polynomial")
    return tuple(int(b) for b in bits)


@dataclass(frozen=True)
class ConvolutionalComponent:
    """Rate-1 recursive parity encoder feedforward(D) / feedback(D).

    The shift register holds a_{t-1} .. a_{t-nu}; a_t = u_t + sum_{i>=1} f_i a_{t-i}
    and the parity is p_t = sum_{i>=0} g_i a_{t-i}. Under termination the nu
    tail inputs drive the register to zero and both tail streams (systematic
    and parity) are charged to the parity weight.
    """

    feedback: tuple = (1,)
    feedforward: tuple = (1,)
    systematic: bool = True
    termination: str = "terminated"

    def __post_init__(self):
        fb = tuple(int(b) for b in self.feedback)
        ff = tuple(int(b) for b in self.feedforward)
        if not fb or fb[0] != 1:
            raise ConfigError("feedback polynomial needs a unit constant term")
        if not any(ff):
            raise ConfigError("feedforward polynomial is zero")
        if self.termination not in TERMINATIONS:
            raise ConfigError(f"termination must be one of {TERMINATIONS}")
        nu = max(len(fb), len(ff)) - 1
        fb = fb + (0,) * (nu + 1 - len(fb))
        ff = ff + (0,) * (nu + 1 - len(ff))
        object.__setattr__(self, "feedback", fb)
        object.__setattr__(self, "feedforward", ff)

    @classmethod
    def from_octal(cls, feedback: str, feedforward: str, **kwargs):
        return cls(parse_poly(feedback, "octal"), parse_poly(feedforward, "octal"), **kwargs)

    @classmethod
    def accumulator(cls, **kwargs):
        return cls((1, 1), (1,), **kwargs)

    @classmethod
    def turbo_rsc_37_21(cls, **kwargs):
        """[1, (1 + D^4) / (1 + D + D^2 + D^3 + D^4)]."""
        return cls.from_octal("37", "21", **kwargs)

    @property
    def memory(self) -> int:
        return len(self.feedback) - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def tail_length(self) -> int:
        """Extra channel symbols per component: nu systematic + nu parity bits."""
        return 2 * self.memory if self.termination == "terminated" else 0

    def _step(self, state: int, u: int):
        nu = self.memory
        reg = [(state >> (i - 1)) & 1 for i in range(1, nu + 1)]  # a_{t-1}..a_{t-nu}
        fb = 0
        for i in range(1, nu + 1):
            fb ^= self.feedback[i] & reg[i - 1]
        a = u ^ fb
        p = self.feedforward[0] & a
        for i in range(1, nu + 1):
            p ^= self.feedforward[i] & reg[i - 1]
        ns = ((state << 1) | a) & ((1 << nu) - 1) if nu else 0
        return ns, p

    def transition_table(self):
        """(next_state[S, 2], parity[S, 2]) as int64 arrays."""
        S = self.n_states
        nxt = np.zeros((S, 2), dtype=np.int64)
        par = np.zeros((S, 2), dtype=np.int64)
        for s in range(S):
            for u in range(2):
                nxt[s, u], par[s, u] = self._step(s, u)
        return nxt, par

    def tail(self, state: int):
        """Tail (inputs, parities) driving ``state`` to zero."""
        ins, pars = [], []
        for _ in range(self.memory):
            fb = 0
            for i in range(1, self.memory + 1):
                fb ^= self.feedback[i] & ((state >> (i - 1)) & 1)
            u = fb
            state, p = self._step(state, u)
            ins.append(u)
            pars.append(p)
        assert state == 0
        return ins, pars

    def tail_weights(self) -> np.ndarray:
        if self.termination != "terminated":
            return np.zeros(self.n_states, dtype=np.int64)
        return np.array([sum(a) + sum(b) for a, b in (self.tail(s) for s in range(self.n_states))], dtype=np.int64)

    def encode(self, bits) -> np.ndarray:
        """Parity stream (plus tail bits when terminated) for one input block."""
        state = 0
        out = []
        for u in bits:
            state, p = self._step(state, int(u))
            out.append(p)
        if self.termination == "terminated":
            ins, pars = self.tail(state)
            for a, b in zip(ins, pars):
                out.extend((a, b))
        return np.array(out, dtype=np.uint8)

    def to_dict(self) -> dict:
        return {
            "feedback": "".join(map(str, self.feedback)).rstrip("0") or "1",
            "feedforward": "".join(map(str, self.feedforward)).rstrip("0") or "1",
            "notation": "binary",
            "systematic": self.systematic,
            "termination": self.termination,
        }

    @classmethod
    def from_dict(cls, doc: dict):
        try:
            notation = doc.get("notation", "octal")
            return cls(
                parse_poly(doc["feedback"], notation),
                parse_poly(doc["feedforward"], notation),
                systematic=bool(doc.get("systematic", True)),
                termination=doc.get("termination", "terminated"),
            )
        except KeyError as exc:
            raise ConfigError(f"component spec missing field {exc}") from exc


@dataclass(frozen=True)
class EnsembleSpec:
    """Parallel concatenation of two components through a uniform interleaver of length N."""

    comp1: ConvolutionalComponent
    comp2: ConvolutionalComponent
    N: int
    puncturing: None = None

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("interleaver length must be >= 1")
        if self.puncturing is not None:
            raise ConfigError("puncturing is not supported")

    @property
    def n(self) -> int:
        return 3 * self.N + self.comp1.tail_length + self.comp2.tail_length

    @property
    def rate(self) -> float:
        return self.N / self.n

    def assumption_flags(self) -> dict:
        return {
            "termination": [self.comp1.termination, self.comp2.termination],
            "tail_bits_in_parity_weight": True,
            "interleaver": "uniform",
        }


def load_component(path) -> ConvolutionalComponent:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read component file {path}: {exc}") from exc
    return ConvolutionalComponent.from_dict(doc)


def load_ensemble(path) -> EnsembleSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read ensemble file {path}: {exc}") from exc

    def comp(ref):
        if isinstance(ref, dict):
            return ConvolutionalComponent.from_dict(ref)
        return load_component(path.parent / ref)

    try:
        return EnsembleSpec(comp(doc["component1"]), comp(doc["component2"]), int(doc["N"]))
    except KeyError as exc:
        raise ConfigError(f"ensemble spec missing field {exc}") from exc


# ---------------------------------------------------------------------------


def conv_iowef(comp: ConvolutionalComponent, N: int, w_max: int | None = None,
               j_max: int | None = None, exact: bool = False) -> IOWEF:
    """IOWEF of one component over an input block of length N.

    Column j is the parity weight including any tail bits. ``exact=True``
    runs the recursion on Python integers.
    """
    if N < 1:
        raise ConfigError("input length must be >= 1")
    full_j = N + comp.tail_length
    w_max = N if w_max is None else min(int(w_max), N)
    j_max = full_j if j_max is None else min(int(j_max), full_j)
    if w_max < 0 or j_max < 0:
        raise ConfigError("caps must be non-negative")
    nxt, par = comp.transition_table()
    j_dp = min(N, j_max)
    if exact:
        table = kernels.np_trellis_dp(nxt, par, N, w_max, j_dp, dtype=object)
    else:
        table = kernels.trellis_dp(nxt, par, N, w_max, j_dp)
    tails = comp.tail_weights()
    out = np.zeros((w_max + 1, j_max + 1), dtype=object if exact else np.float64)
    for s in range(comp.n_states):
        if comp.termination == "terminated":
            shift = int(tails[s])
            width = min(j_max + 1 - shift, j_dp + 1)
            if width > 0:
                out[:, shift : shift + width] += table[s, :, :width]
        else:
            out[:, : j_dp + 1] += table[s]
    meta = {
        "termination": comp.termination,
        "N": N,
        "w_max": w_max,
        "j_max": j_max,
        "status": "ok",
    }
    nonzero = np.argwhere(out.astype(np.float64) != 0)
    if not any((w, j) != (0, 0) for w, j in map(tuple, nonzero)):
        meta["status"] = "empty"
        warnings.warn("truncation caps exclude every nonzero-weight entry", RuntimeWarning, stacklevel=2)
    n = (N if comp.systematic else 0) + N + comp.tail_length
    return IOWEF(n, N, out, convention="parity", metadata=meta)


def log_binom(N: int, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    return gammaln(N + 1.0) - gammaln(w + 1.0) - gammaln(N - w + 1.0)


def uniform_interleaver_combine(a1: IOWEF, a2: IOWEF, N: int, j_max: int | None = None,
                                exact: bool | None = None) -> IOWEF:
    """Average IOWEF of the parallel concatenation over all interleavers of length N.

    Float mode divides A1 by C(N, w) before the convolution so nothing
    overflows for N in the thousands; exact mode (object tables) keeps
    Fractions throughout.
    """
    if a1.k != N or a2.k != N:
        raise ConfigError(f"component tables built for k={a1.k}, {a2.k}; expected N={N}")
    if a1.convention != "parity" or a2.convention != "parity":
        raise ConfigError("uniform-interleaver combine needs parity-convention tables")
    if exact is None:
        exact = a1.counts.dtype == object or a2.counts.dtype == object
    w_top = min(a1.w_max, a2.w_max)
    j_full = a1.j_max + a2.j_max
    j_max = j_full if j_max is None else min(int(j_max), j_full)
    if exact:
        out = np.zeros((w_top + 1, j_max + 1), dtype=object)
        for w in range(w_top + 1):
            c = math.comb(N, w)
            r1 = [Fraction(int(x)) if not isinstance(x, Fraction) else x for x in a1.counts[w]]
            r2 = [Fraction(int(x)) if not isinstance(x, Fraction) else x for x in a2.counts[w]]
            for j1, x in enumerate(r1):
                if not x:
                    continue
                for j2, y in enumerate(r2):
                    if y and j1 + j2 <= j_max:
                        out[w, j1 + j2] += x * y / c
        for idx in np.ndindex(out.shape):
            v = out[idx]
            if isinstance(v, Fraction) and v.denominator == 1:
                out[idx] = int(v)
    else:
        out = np.zeros((w_top + 1, j_max + 1))
        inv_binom = np.exp(-log_binom(N, np.arange(w_top + 1)))
        t1 = a1.counts[: w_top + 1].astype(np.float64)
        t2 = a2.counts[: w_top + 1].astype(np.float64)
        for w in range(w_top + 1):
            r1 = t1[w] * inv_binom[w]
            r2 = t2[w]
            nz1 = np.nonzero(r1)[0]
            nz2 = np.nonzero(r2)[0]
            if nz1.size == 0 or nz2.size == 0:
                continue
            conv = np.convolve(r1[: nz1[-1] + 1], r2[: nz2[-1] + 1])
            m = min(conv.size, j_max + 1)
            out[w, :m] = conv[:m]
    meta = {"N": N, "interleaver": "uniform", "components": [a1.metadata, a2.metadata]}
    n = a1.n + a2.n - N
    return IOWEF(n, N, out, convention="parity", ensemble=True, metadata=meta)


@dataclass
class EnsembleResult:
    """Combined IOWEF of a turbo ensemble plus the two spectra the bounds consume."""

    iowef: IOWEF
    block: DistanceSpectrum
    bit: DistanceSpectrum
    metadata: dict = field(default_factory=dict)


def ensemble_iowef(spec: EnsembleSpec, w_max: int | None = None, d_max: int | None = None) -> IOWEF:
    """Ensemble IOWEF, exact for every codeword weight d <= d_max and input weight w <= w_max."""
    N = spec.N
    n = spec.n
    d_max = n if d_max is None else min(int(d_max), n)
    w_cap = min(N, d_max) if w_max is None else min(int(w_max), N, d_max)
    j_cap = max(0, d_max - 1) if d_max < n else None
    t1 = conv_iowef(spec.comp1, N, w_cap, j_cap)
    t2 = t1 if spec.comp2 == spec.comp1 else conv_iowef(spec.comp2, N, w_cap, j_cap)
    combined = uniform_interleaver_combine(t1, t2, N, j_max=d_max)
    # drop entries beyond the codeword-weight cap (w + j > d_max)
    w_idx = np.arange(combined.w_max + 1)[:, None]
    j_idx = np.arange(combined.j_max + 1)[None, :]
    combined.counts[(w_idx + j_idx) > d_max] = 0.0
    combined.n = n
    combined.metadata.update(spec.assumption_flags())
    combined.metadata.update({"w_max": w_cap, "d_max": d_max})
    return combined


def ensemble_spectrum(spec: EnsembleSpec, w_max: int | None = None, d_max: int | None = None,
                      margin: int | None = None) -> EnsembleResult:
    """Average block and bit-weighted spectra of a turbo ensemble.

    The spectra are exact for d <= d_max. When truncating, the enumeration
    continues for ``margin`` more weights (default 25% of d_max); those
    entries are kept in ``metadata['tail_counts']`` so a bound can estimate
    the mass it is missing.
    """
    n = spec.n
    d_req = n if d_max is None else min(int(d_max), n)
    truncated = d_req < n
    if truncated:
        margin = max(8, d_req // 4) if margin is None else int(margin)
        d_cap = min(n, d_req + margin)
    else:
        d_cap = n
    table = ensemble_iowef(spec, w_max=w_max, d_max=d_cap)
    block = table.to_spectrum().counts.astype(np.float64)
    bit = table.bit_spectrum().counts.astype(np.float64)
    meta = dict(table.metadata)
    meta.pop("components", None)
    kwargs = {}
    if truncated:
        kwargs["d_max"] = d_req
        meta["tail_counts"] = {
            "block": block[d_req + 1 : d_cap + 1].tolist(),
            "bit": bit[d_req + 1 : d_cap + 1].tolist(),
            "first_d": d_req + 1,
        }
        block[d_req + 1 :] = 0.0
        bit[d_req + 1 :] = 0.0
    block_spec = DistanceSpectrum(n, block, k=spec.N, ensemble=True, metadata=_sub(meta, "block"), **kwargs)
    bit_spec = DistanceSpectrum(n, bit, k=spec.N, ensemble=True,
                                metadata={**_sub(meta, "bit"), "bit_weighted": True}, **kwargs)
    return EnsembleResult(table, block_spec, bit_spec, meta)


def _sub(meta: dict, which: str) -> dict:
    out = {k: v for k, v in meta.items() if k != "tail_counts"}
    if "tail_counts" in meta:
        tc = meta["tail_counts"]
        out["tail_counts"] = {"first_d": tc["first_d"], "counts": tc[which]}
    return out
