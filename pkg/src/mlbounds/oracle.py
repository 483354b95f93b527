"""Ground truth for the bounds: exact and simulated ML decoding, brute-force interleaver averages."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from ._mc import BLOCK_SIZE, require_seed, run_blocks
from .channels import ChannelModel
from .codebook import IOWEF, LinearCode
from .ensemble import ConvolutionalComponent
from .errors import ConfigError, SizeGuardError

MAX_EXACT_N = 20
MAX_K = 16
MIN_SAMPLES = 10_000
MAX_PERM_N = 6
METRICS = ("block", "bit")


@dataclass(frozen=True)
class OracleResult:
    estimate: float
    std_error: float
    samples: int | None
    seed: int | None
    tie_policy: str
    metric: str = "block"

    @property
    def exact(self) -> bool:
        return self.samples is None

    def __iter__(self):
        return iter((self.estimate, self.std_error))

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "tie_policy": self.tie_policy,
            "metric": self.metric,
        }


# --- exact ML on the BSC -------------------------------------------------------------------


def _reduced_generator(gen: np.ndarray):
    """Row-reduced echelon form over GF(2) and its pivot columns."""
    g = gen.copy() % 2
    k, n = g.shape
    pivots = []
    row = 0
    for col in range(n):
        hit = np.nonzero(g[row:, col])[0]
        if hit.size == 0:
            continue
        r = row + int(hit[0])
        g[[row, r]] = g[[r, row]]
        others = np.nonzero(g[:, col])[0]
        for o in others:
            if o != row:
                g[o] ^= g[row]
        pivots.append(col)
        row += 1
        if row == k:
            break
    return g, pivots


def exact_ml_bsc(code: LinearCode, p: float) -> OracleResult:
    """Exact ML block error probability on the BSC, ties broken uniformly at random.

    Every output y lies in a coset y + C whose elements are the error patterns
    y + c; ML picks a minimum-weight element, so given y the decoder is right
    with probability 1/t when wt(y) is the coset's minimum weight shared by t
    elements, and wrong otherwise.
    """
    channel = ChannelModel.bsc(p)
    n, k = code.n, code.k
    if n > MAX_EXACT_N or k > MAX_K:
        raise SizeGuardError(f"exact BSC oracle needs n <= {MAX_EXACT_N} and k <= {MAX_K}")
    g, pivots = _reduced_generator(code.generator.astype(np.uint8))
    shifts = np.arange(n, dtype=np.int64)
    rows = (g.astype(np.int64) << shifts).sum(axis=1)
    ys = np.arange(1 << n, dtype=np.int64)
    rep = ys.copy()
    # clear the pivot bits: rep is the unique coset element that is zero on the pivots
    for r, col in enumerate(pivots):
        rep = np.where((ys >> col) & 1, rep ^ rows[r], rep)
    # rep ^ ys is a codeword so the pivot bits of rep must be zero
    weights = np.bitwise_count(ys.astype(np.uint64)).astype(np.int64)
    _, coset = np.unique(rep, return_inverse=True)
    n_cosets = int(coset.max()) + 1
    w_min = np.full(n_cosets, n + 1, dtype=np.int64)
    np.minimum.at(w_min, coset, weights)
    at_min = weights == w_min[coset]
    ties = np.bincount(coset[at_min], minlength=n_cosets)
    log_py = weights * math.log(channel.p) + (n - weights) * math.log1p(-channel.p)
    p_wrong = np.where(at_min, 1.0 - 1.0 / ties[coset], 1.0)
    est = float(np.sum(np.exp(log_py) * p_wrong))
    return OracleResult(est, 0.0, None, None, "uniform")


# --- Monte-Carlo ML ------------------------------------------------------------------------


def _check_mc(code: LinearCode, samples: int, seed, metric: str):
    if code.k > MAX_K:
        raise SizeGuardError(f"Monte-Carlo ML decoding enumerates codewords; k={code.k} exceeds {MAX_K}")
    if samples < MIN_SAMPLES:
        raise ConfigError(f"Monte-Carlo ML needs at least {MIN_SAMPLES} samples")
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}")
    return require_seed(seed)


class _Decoder:
    """Exhaustive correlation ML decoder for the all-zero codeword being sent."""

    def __init__(self, code: LinearCode):
        cw = code.codewords()
        self.k = code.k
        self.cw = cw[1:]
        self.info_weight = code.messages()[1:].sum(axis=1).astype(np.int64)
        self.indptr, self.indices = kernels.supports_csr(self.cw)
        self.supports = self.cw.astype(np.float64)

    def errors(self, v: np.ndarray, rng: np.random.Generator | None):
        """Per-sample (block error 0/1, decoded information weight); metric_c = sum over supp(c) of v."""
        minval, argmin, n_at_min, _ = kernels.decode_metrics(v, self.indptr, self.indices)
        wrong = minval < 0.0
        choice = np.where(wrong, argmin, -1)
        tied = np.flatnonzero(minval == 0.0)
        if tied.size and rng is not None:
            # uniform choice among the all-zero word and the n_at_min tied nonzero words
            pick = rng.integers(0, n_at_min[tied] + 1)
            for s, t, c in zip(tied, pick, n_at_min[tied]):
                if t == 0:
                    continue
                metrics = self.supports @ v[s]
                candidates = np.flatnonzero(metrics == 0.0)
                choice[s] = candidates[t - 1]
        block = (choice >= 0).astype(np.int64)
        info = np.where(choice >= 0, self.info_weight[np.maximum(choice, 0)], 0)
        return block, info


def _mc(code: LinearCode, channel: ChannelModel, samples: int, seed, metric: str, workers):
    seed = _check_mc(code, samples, seed, metric)
    dec = _Decoder(code)
    n = code.n

    def block(rng, count):
        if channel.kind == "biawgn":
            v = 1.0 + channel.sigma * rng.standard_normal((count, n))
            err, info = dec.errors(v, None)
        else:
            flips = rng.random((count, n)) < channel.p
            v = 1.0 - 2.0 * flips
            err, info = dec.errors(v, rng)
        x = err if metric == "block" else info
        return int(x.sum()), int((x * x).sum())

    parts = run_blocks(block, seed, samples, workers, BLOCK_SIZE)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    scale = 1 if metric == "block" else code.k
    mean = Fraction(s1, samples)
    var = Fraction(s2, samples) - mean * mean
    est = float(mean / scale)
    se = math.sqrt(float(var) / samples) / scale
    tie = "zero-probability" if channel.kind == "biawgn" else "uniform"
    return OracleResult(est, se, samples, seed, tie, metric)


def mc_ml_awgn(code: LinearCode, channel: ChannelModel, samples: int, seed, metric: str = "block",
               workers: int | None = None) -> OracleResult:
    """Monte-Carlo ML block or bit error rate on the BIAWGN channel, all-zero codeword sent."""
    channel.require("biawgn")
    return _mc(code, channel, samples, seed, metric, workers)


def mc_ml_bsc(code: LinearCode, channel: ChannelModel, samples: int, seed, metric: str = "block",
              workers: int | None = None) -> OracleResult:
    """Monte-Carlo ML on the BSC with ties broken uniformly from each block's own stream."""
    channel.require("bsc")
    return _mc(code, channel, samples, seed, metric, workers)


# --- brute-force interleaver averaging -----------------------------------------------------


def permute_average_iowef(comp1: ConvolutionalComponent, comp2: ConvolutionalComponent, N: int,
                          exact: bool = False) -> IOWEF:
    """Average parity-convention IOWEF over all N! interleavers by direct encoding."""
    if not 1 <= N <= MAX_PERM_N:
        raise SizeGuardError(f"permutation averaging needs 1 <= N <= {MAX_PERM_N}")
    inputs = np.array(list(itertools.product((0, 1), repeat=N)), dtype=np.uint8)
    pw1 = np.array([int(comp1.encode(u).sum()) for u in inputs])
    pw2 = np.array([int(comp2.encode(u).sum()) for u in inputs])
    len1 = comp1.encode(np.zeros(N, dtype=np.uint8)).size
    len2 = comp2.encode(np.zeros(N, dtype=np.uint8)).size
    w = inputs.sum(axis=1)
    place = 1 << np.arange(N - 1, -1, -1)
    counts = np.zeros((N + 1, len1 + len2 + 1), dtype=np.int64)
    n_perm = 0
    for perm in itertools.permutations(range(N)):
        idx = inputs[:, list(perm)] @ place
        np.add.at(counts, (w, pw1 + pw2[idx]), 1)
        n_perm += 1
    if exact:
        table = np.empty(counts.shape, dtype=object)
        for ij in np.ndindex(counts.shape):
            f = Fraction(int(counts[ij]), n_perm)
            table[ij] = int(f) if f.denominator == 1 else f
    else:
        table = counts / float(n_perm)
    meta = {"N": N, "interleaver": "all permutations", "permutations": n_perm}
    return IOWEF(N + len1 + len2, N, table, convention="parity", ensemble=True, metadata=meta)
