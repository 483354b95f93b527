import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlbounds import ChannelModel, ConfigError, bhattacharyya, joint_pairwise_error, pairwise_error, q_function
from mlbounds.channels import codeword_correlation, orthant_probability

from conftest import awgn

# high-precision quadrature values (mpmath, 40 digits)
Q3 = 0.001349898031630094526651814767594977377829
Q_SQRT2 = 0.07864960352514256532938968245869537035197
JOINT_334_2DB = 0.0006356180284968483199784423337694307100256


def test_q_function_values():
    assert q_function(0.0) == 0.5
    assert q_function(-np.inf) == 1.0
    assert q_function(np.inf) == 0.0
    assert q_function(3.0) == pytest.approx(Q3, abs=1e-15)


def test_pairwise_bsc_d3():
    p = 0.07
    ch = ChannelModel.bsc(p)
    assert pairwise_error(ch, 3) == pytest.approx(3 * p**2 * (1 - p) + p**3, rel=1e-14)


def test_pairwise_bsc_even_d_half_weights_ties():
    p = 0.1
    ch = ChannelModel.bsc(p)
    expected = 0.5 * 6 * p**2 * (1 - p) ** 2 + 4 * p**3 * (1 - p) + p**4
    assert pairwise_error(ch, 4) == pytest.approx(expected, rel=1e-14)


def test_pairwise_biawgn_reference():
    ch = ChannelModel.biawgn(0.0, 1.0)
    assert pairwise_error(ch, 1) == pytest.approx(Q_SQRT2, abs=1e-15)
    assert pairwise_error(ChannelModel.biawgn(60.0, 0.5), 3) == 0.0


def test_pairwise_rejects_zero_distance():
    with pytest.raises(ConfigError):
        pairwise_error(awgn(1.0), 0)


def test_channel_validation():
    with pytest.raises(ConfigError):
        ChannelModel.bsc(0.5)
    with pytest.raises(ConfigError):
        ChannelModel.biawgn(1.0, 1.5)
    with pytest.raises(ConfigError):
        ChannelModel("rayleigh")


def test_noise_variance():
    ch = ChannelModel.biawgn(3.0, 0.5)
    assert ch.sigma**2 == pytest.approx(1.0 / (2 * 0.5 * 10**0.3), rel=1e-15)


def test_bhattacharyya_range():
    assert 0 < bhattacharyya(ChannelModel.bsc(0.49)) < 1
    assert bhattacharyya(ChannelModel.bsc(0.1)) == pytest.approx(0.6, rel=1e-15)
    assert bhattacharyya(awgn(-30.0)) == pytest.approx(1.0, abs=1e-3)


def test_pairwise_monotone():
    ch = awgn(2.0)
    vals = pairwise_error(ch, np.arange(1, 20))
    assert np.all(np.diff(vals) < 0)
    by_snr = [pairwise_error(awgn(x), 3) for x in np.linspace(-2, 8, 11)]
    assert np.all(np.diff(by_snr) < 0)


def test_joint_same_codeword_is_pairwise():
    ch = awgn(2.0)
    assert joint_pairwise_error(ch, 3, 3, 0) == pytest.approx(pairwise_error(ch, 3), rel=1e-14)


def test_joint_independent_is_product():
    # w_i = w_j = 2 with disjoint supports: correlation 0
    ch = awgn(1.0)
    assert codeword_correlation(2, 2, 4) == 0.0
    assert joint_pairwise_error(ch, 2, 2, 4) == pytest.approx(pairwise_error(ch, 2) ** 2, rel=1e-14)


def test_joint_reference_value():
    assert joint_pairwise_error(awgn(2.0), 3, 3, 4) == pytest.approx(JOINT_334_2DB, rel=1e-10)


def test_joint_rejects_inconsistent_weights():
    with pytest.raises(ConfigError):
        joint_pairwise_error(awgn(1.0), 3, 3, 7)
    with pytest.raises(ConfigError):
        joint_pairwise_error(awgn(1.0), 3, 4, 2)
    with pytest.raises(ConfigError):
        joint_pairwise_error(ChannelModel.bsc(0.1), 3, 3, 4)


def test_joint_matches_monte_carlo(hamming):
    """Two weight-3 Hamming codewords at distance 4, 2 dB, 10^7 noise draws."""
    ch = awgn(2.0)
    cw = hamming.codewords()
    w = cw.sum(axis=1)
    i = int(np.flatnonzero(w == 3)[0])
    j = next(int(t) for t in np.flatnonzero(w == 3) if (cw[i] ^ cw[t]).sum() == 4)
    rng = np.random.default_rng(7)
    hits = 0
    total = 10**7
    for _ in range(10):
        noise = ch.sigma * rng.standard_normal((total // 10, 7))
        r = 1.0 + noise
        hits += int(np.sum((r[:, cw[i] == 1].sum(axis=1) < 0) & (r[:, cw[j] == 1].sum(axis=1) < 0)))
    p = hits / total
    se = math.sqrt(p * (1 - p) / total)
    assert abs(p - joint_pairwise_error(ch, 3, 3, 4)) < 3 * se


def test_correlation_matches_empirical(rng):
    for _ in range(5):
        n = 12
        ci = rng.random(n) < 0.5
        cj = rng.random(n) < 0.5
        if ci.sum() == 0 or cj.sum() == 0:
            continue
        z = rng.standard_normal((200_000, n))
        xi = z[:, ci].sum(axis=1)
        xj = z[:, cj].sum(axis=1)
        emp = np.corrcoef(xi, xj)[0, 1]
        rho = codeword_correlation(int(ci.sum()), int(cj.sum()), int((ci ^ cj).sum()))
        assert abs(emp - rho) < 3 * (1 - rho**2) / math.sqrt(200_000) + 1e-12


@settings(max_examples=80, deadline=None)
@given(st.floats(-3, 6), st.floats(-3, 6), st.floats(-0.999, 0.999))
def test_orthant_frechet_bounds(a, b, rho):
    p = orthant_probability(a, b, rho)
    qa, qb = q_function(a), q_function(b)
    assert max(0.0, qa + qb - 1.0) - 1e-12 <= p <= min(qa, qb) + 1e-12
