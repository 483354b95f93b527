import itertools
import math

import numpy as np
import pytest

from mlbounds import (
    ChannelModel,
    ConfigError,
    ConvolutionalComponent,
    LinearCode,
    SizeGuardError,
    exact_ml_bsc,
    mc_ml_awgn,
    mc_ml_bsc,
    permute_average_iowef,
    uniform_interleaver_combine,
)
from mlbounds.ensemble import conv_iowef
from mlbounds.oracle import _reduced_generator

from conftest import awgn


def brute_ml_bsc(code, p):
    # enumerate every output word and decode against every codeword
    cw = code.codewords().astype(np.int64)
    n = code.n
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        y = np.array(bits)
        dist = (cw ^ y).sum(axis=1)
        best = np.flatnonzero(dist == dist.min())
        w = int(y.sum())
        p_y = p**w * (1 - p) ** (n - w)
        total += p_y * (1.0 - (1.0 / best.size if 0 in best else 0.0))
    return total


def test_repetition_closed_form():
    for p in (0.01, 0.1, 0.3):
        assert exact_ml_bsc(LinearCode.repetition(3), p).estimate == pytest.approx(3 * p**2 - 2 * p**3, rel=1e-13)


@pytest.mark.parametrize("p", [0.02, 0.05, 0.2])
def test_exact_matches_brute_force(hamming, ext_hamming, p):
    assert exact_ml_bsc(hamming, p).estimate == pytest.approx(brute_ml_bsc(hamming, p), rel=1e-12)
    assert exact_ml_bsc(ext_hamming, p).estimate == pytest.approx(brute_ml_bsc(ext_hamming, p), rel=1e-12)


def test_hamming_perfect_code_formula(hamming):
    # perfect single-error-correcting code: correct iff at most one flip
    p = 0.05
    ref = 1 - (1 - p) ** 7 - 7 * p * (1 - p) ** 6
    res = exact_ml_bsc(hamming, p)
    assert res.estimate == pytest.approx(ref, rel=1e-13)
    assert res.exact and res.std_error == 0.0


def test_reduced_generator_span(hamming):
    g, piv = _reduced_generator(hamming.generator.astype(np.uint8))
    assert len(piv) == 4
    assert np.array_equal(g[:, piv], np.eye(4, dtype=np.uint8))
    span = {tuple(np.array(m) @ g % 2) for m in itertools.product((0, 1), repeat=4)}
    assert span == {tuple(c) for c in hamming.codewords()}


def test_exact_guard():
    big = LinearCode(np.hstack([np.eye(3, dtype=np.uint8), np.ones((3, 18), dtype=np.uint8)]))
    with pytest.raises(SizeGuardError):
        exact_ml_bsc(big, 0.1)


def test_mc_bsc_agrees_with_exact(hamming):
    ch = ChannelModel.bsc(0.05)
    exact = exact_ml_bsc(hamming, 0.05).estimate
    est = mc_ml_bsc(hamming, ch, 200_000, seed=2)
    assert abs(est.estimate - exact) < 3 * est.std_error
    assert est.tie_policy == "uniform"


def test_mc_bsc_ties_ext_hamming(ext_hamming):
    # the (8,4) code has many tied cosets; uniform tie breaking must match the exact value
    ch = ChannelModel.bsc(0.08)
    exact = exact_ml_bsc(ext_hamming, 0.08).estimate
    est = mc_ml_bsc(ext_hamming, ch, 200_000, seed=3)
    assert abs(est.estimate - exact) < 3 * est.std_error


def test_mc_awgn_repetition():
    code = LinearCode.repetition(3)
    ch = awgn(1.0, 1 / 3)
    est = mc_ml_awgn(code, ch, 200_000, seed=4)
    ref = 0.5 * math.erfc(math.sqrt(3 * ch.es_n0))
    assert abs(est.estimate - ref) < 3 * est.std_error


def test_mc_worker_count_does_not_matter(hamming):
    ch = awgn(2.0)
    a = mc_ml_awgn(hamming, ch, 60_000, seed=8, workers=1)
    b = mc_ml_awgn(hamming, ch, 60_000, seed=8, workers=3)
    assert a.as_dict() == b.as_dict()


def test_mc_high_snr_no_errors(hamming):
    est = mc_ml_awgn(hamming, awgn(30.0), 20_000, seed=1)
    assert est.estimate == 0.0 and est.std_error == 0.0


def test_mc_bit_metric_below_block(hamming):
    ch = awgn(1.0)
    block = mc_ml_awgn(hamming, ch, 100_000, seed=6)
    bit = mc_ml_awgn(hamming, ch, 100_000, seed=6, metric="bit")
    assert bit.estimate <= block.estimate
    assert bit.estimate >= block.estimate / hamming.k
    assert bit.metric == "bit"


def test_mc_validation(hamming):
    with pytest.raises(ConfigError):
        mc_ml_awgn(hamming, awgn(1.0), 100, seed=0)
    with pytest.raises(ConfigError):
        mc_ml_awgn(hamming, awgn(1.0), 10_000, seed=None)
    with pytest.raises(ConfigError):
        mc_ml_awgn(hamming, awgn(1.0), 10_000, seed=0, metric="symbol")
    with pytest.raises(ConfigError):
        mc_ml_bsc(hamming, awgn(1.0), 10_000, seed=0)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_permutation_average_matches_uniform_interleaver(N):
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    brute = permute_average_iowef(comp, comp, N)
    tab = conv_iowef(comp, N)
    combined = uniform_interleaver_combine(tab, tab, N)
    a = np.asarray(brute.counts, dtype=np.float64)
    b = np.asarray(combined.counts, dtype=np.float64)
    width = min(a.shape[1], b.shape[1])
    assert np.allclose(a[:, :width], b[:, :width], rtol=1e-10, atol=0)
    assert not a[:, width:].any() and not b[:, width:].any()


def test_permutation_guard():
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    with pytest.raises(SizeGuardError):
        permute_average_iowef(comp, comp, 7)
