"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names ``span_histogram``, ``trellis_dp`` and ``pair_profiles``
are bound to the numba versions unless ``MLBOUNDS_DISABLE_NUMBA`` is set.
``decode_metrics`` always uses the numpy version: its inner product is a
matrix multiply, and BLAS beats the compiled loop at every size the
benchmark tries. Both flavours are importable under ``nb_*`` / ``np_*`` so
tests can check that they agree and the benchmark can time them side by side.

Codewords are bit-packed little-endian into uint64 words: position ``i``
lives in word ``i // 64``, bit ``i % 64``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


def pack_rows(bits):
    """Pack a (rows, n) 0/1 array into (rows, ceil(n/64)) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows, n = bits.shape
    nw = max(1, (n + 63) // 64)
    out = np.zeros((rows, nw), dtype=np.uint64)
    for i in range(n):
        col = bits[:, i].astype(np.uint64) << np.uint64(i % 64)
        out[:, i // 64] |= col
    return out


def unpack_rows(words, n):
    words = np.asarray(words, dtype=np.uint64)
    out = np.zeros((words.shape[0], n), dtype=np.uint8)
    for i in range(n):
        out[:, i] = (words[:, i // 64] >> np.uint64(i % 64)) & np.uint64(1)
    return out


# ---------------------------------------------------------------------------
# codeword-span enumeration


@njit
def _popcount64(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return np.int64((x * _H01) >> _S56)


@njit
def nb_span_histogram(gen, mask, inv_mask, n_in, n_out):
    k, nw = gen.shape
    hist = np.zeros((n_in + 1, n_out + 1), dtype=np.int64)
    cw = np.zeros(nw, dtype=np.uint64)
    hist[0, 0] += 1
    total = np.int64(1) << k
    for i in range(1, total):
        b = 0
        while ((i >> b) & 1) == 0:
            b += 1
        wi = 0
        wo = 0
        for t in range(nw):
            cw[t] ^= gen[b, t]
            wi += _popcount64(cw[t] & mask[t])
            wo += _popcount64(cw[t] & inv_mask[t])
        hist[wi, wo] += 1
    return hist


def np_span_histogram(gen, mask, inv_mask, n_in, n_out):
    gen = np.asarray(gen, dtype=np.uint64)
    k, nw = gen.shape
    low_rows = min(k, 14)
    low = np.zeros((1, nw), dtype=np.uint64)
    for r in range(low_rows):
        low = np.concatenate([low, low ^ gen[r]])
    hist = np.zeros((n_in + 1) * (n_out + 1), dtype=np.int64)
    offset = np.zeros(nw, dtype=np.uint64)
    for h in range(1 << (k - low_rows)):
        if h:
            b = (h & -h).bit_length() - 1
            offset ^= gen[low_rows + b]
        cws = low ^ offset
        wi = np.bitwise_count(cws & mask).sum(axis=1, dtype=np.int64)
        wo = np.bitwise_count(cws & inv_mask).sum(axis=1, dtype=np.int64)
        hist += np.bincount(wi * (n_out + 1) + wo, minlength=hist.size)
    return hist.reshape(n_in + 1, n_out + 1)


# ---------------------------------------------------------------------------
# trellis dynamic programme over (state, input weight, output weight)


@njit
def nb_trellis_dp(next_state, out_weight, n_steps, w_cap, j_cap):
    n_states = next_state.shape[0]
    max_out = 0
    for s in range(n_states):
        for u in range(2):
            if out_weight[s, u] > max_out:
                max_out = out_weight[s, u]
    cur = np.zeros((n_states, w_cap + 1, j_cap + 1))
    nxt = np.zeros((n_states, w_cap + 1, j_cap + 1))
    cur[0, 0, 0] = 1.0
    for t in range(n_steps):
        wl = min(t, w_cap)
        jl = min(t * max_out, j_cap)
        wz = min(t + 1, w_cap)
        jz = min((t + 1) * max_out, j_cap)
        for s in range(n_states):
            for w in range(wz + 1):
                for j in range(jz + 1):
                    nxt[s, w, j] = 0.0
        for s in range(n_states):
            for u in range(2):
                ns = next_state[s, u]
                p = out_weight[s, u]
                jmax = min(jl, j_cap - p)
                for w in range(wl + 1):
                    w2 = w + u
                    if w2 > w_cap:
                        break
                    for j in range(jmax + 1):
                        v = cur[s, w, j]
                        if v != 0.0:
                            nxt[ns, w2, j + p] += v
        cur, nxt = nxt, cur
    return cur


def np_trellis_dp(next_state, out_weight, n_steps, w_cap, j_cap, dtype=np.float64):
    """Same recursion with numpy slices; ``dtype=object`` gives exact integers."""
    n_states = next_state.shape[0]
    cur = np.zeros((n_states, w_cap + 1, j_cap + 1), dtype=dtype)
    cur[0, 0, 0] = 1
    for _ in range(n_steps):
        nxt = np.zeros_like(cur)
        for s in range(n_states):
            for u in range(2):
                ns = int(next_state[s, u])
                p = int(out_weight[s, u])
                if u > w_cap or p > j_cap:
                    continue
                nxt[ns, u:, p:] += cur[s, : w_cap + 1 - u, : j_cap + 1 - p]
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# per-sample ML decoding statistics
#
# metric_c = sum_{i in supp(c)} v_i for every nonzero codeword c; the all-zero
# codeword has metric 0 and ML picks the smallest metric.  For BIAWGN with
# 0 -> +1 mapping v is the received vector; for BSC v_i = 1 - 2*flip_i so the
# metric is d(y, c) - d(y, 0).


@njit
def nb_decode_metrics(v, indptr, indices):
    n_samples = v.shape[0]
    n_cw = indptr.shape[0] - 1
    minval = np.empty(n_samples)
    argmin = np.empty(n_samples, dtype=np.int64)
    n_at_min = np.empty(n_samples, dtype=np.int64)
    n_neg = np.empty(n_samples, dtype=np.int64)
    for b in range(n_samples):
        best = np.inf
        best_i = -1
        cnt = 0
        neg = 0
        for c in range(n_cw):
            m = 0.0
            for q in range(indptr[c], indptr[c + 1]):
                m += v[b, indices[q]]
            if m < 0.0:
                neg += 1
            if m < best:
                best = m
                best_i = c
                cnt = 1
            elif m == best:
                cnt += 1
        minval[b] = best
        argmin[b] = best_i
        n_at_min[b] = cnt
        n_neg[b] = neg
    return minval, argmin, n_at_min, n_neg


METRIC_CHUNK_ENTRIES = 1 << 23  # bound on the samples x codewords matrix the numpy path builds at once


def np_decode_metrics(v, indptr, indices):
    n_samples, n = v.shape
    n_cw = indptr.shape[0] - 1
    supports = np.zeros((n_cw, n))
    rows = np.repeat(np.arange(n_cw), np.diff(indptr))
    supports[rows, indices] = 1.0
    minval = np.empty(n_samples)
    argmin = np.empty(n_samples, dtype=np.int64)
    n_at_min = np.empty(n_samples, dtype=np.int64)
    n_neg = np.empty(n_samples, dtype=np.int64)
    step = max(1, METRIC_CHUNK_ENTRIES // max(n_cw, 1))
    for lo in range(0, n_samples, step):
        hi = min(n_samples, lo + step)
        metrics = v[lo:hi] @ supports.T
        best = metrics.argmin(axis=1)
        minval[lo:hi] = metrics[np.arange(hi - lo), best]
        argmin[lo:hi] = best
        n_at_min[lo:hi] = (metrics == minval[lo:hi, None]).sum(axis=1)
        n_neg[lo:hi] = (metrics < 0.0).sum(axis=1)
    return minval, argmin, n_at_min, n_neg


def supports_csr(codewords):
    """CSR (indptr, indices) of the supports of a (M, n) 0/1 codeword array."""
    codewords = np.asarray(codewords, dtype=bool)
    indptr = np.zeros(codewords.shape[0] + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(codewords.sum(axis=1))
    indices = np.nonzero(codewords)[1].astype(np.int64)
    return indptr, indices


# ---------------------------------------------------------------------------
# pair profiles for union lower bounds
#
# hist[i, w, x] counts codewords c_j with weight w and d(c_i, c_j) = x, over
# the nonzero codewords of a code with n <= 64 packed one word per codeword.


@njit
def nb_pair_profiles(cw, n):
    m = cw.shape[0]
    hist = np.zeros((m, n + 1, n + 1), dtype=np.int64)
    wts = np.empty(m, dtype=np.int64)
    for j in range(m):
        wts[j] = _popcount64(cw[j])
    for i in range(m):
        for j in range(m):
            hist[i, wts[j], _popcount64(cw[i] ^ cw[j])] += 1
    return hist


def np_pair_profiles(cw, n):
    cw = np.asarray(cw, dtype=np.uint64)
    m = cw.shape[0]
    wts = np.bitwise_count(cw).astype(np.int64)
    hist = np.zeros((m, n + 1, n + 1), dtype=np.int64)
    for i in range(m):
        x = np.bitwise_count(cw[i] ^ cw).astype(np.int64)
        np.add.at(hist[i], (wts, x), 1)
    return hist


if USE_NUMBA:
    span_histogram = nb_span_histogram
    decode_metrics = np_decode_metrics
    pair_profiles = nb_pair_profiles

    def trellis_dp(next_state, out_weight, n_steps, w_cap, j_cap, dtype=np.float64):
        if dtype is object or np.dtype(dtype) == np.dtype(object):
            return np_trellis_dp(next_state, out_weight, n_steps, w_cap, j_cap, dtype=object)
        return nb_trellis_dp(
            np.ascontiguousarray(next_state, dtype=np.int64),
            np.ascontiguousarray(out_weight, dtype=np.int64),
            int(n_steps),
            int(w_cap),
            int(j_cap),
        )

else:
    span_histogram = np_span_histogram
    decode_metrics = np_decode_metrics
    trellis_dp = np_trellis_dp
    pair_profiles = np_pair_profiles
