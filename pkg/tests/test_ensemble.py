import math
from fractions import Fraction

import numpy as np
import pytest

from mlbounds import IOWEF, ConfigError, ConvolutionalComponent, EnsembleSpec
from mlbounds.ensemble import (
    conv_iowef,
    ensemble_iowef,
    ensemble_spectrum,
    load_component,
    load_ensemble,
    parse_poly,
    uniform_interleaver_combine,
)
from mlbounds.oracle import permute_average_iowef


def brute_parity_weights(comp, N):
    """Parity weight of every input block, by direct polynomial recursion over all 2^N inputs at once."""
    nu = comp.memory
    f, g = comp.feedback, comp.feedforward
    inputs = ((np.arange(2**N)[:, None] >> np.arange(N)) & 1).astype(np.int64)
    a = np.zeros((2**N, N + 2 * nu + 1), dtype=np.int64)  # a[:, nu + t] is the register input at step t
    weight = np.zeros(2**N, dtype=np.int64)
    steps = N + (nu if comp.termination == "terminated" else 0)
    for t in range(steps):
        fb = np.zeros(2**N, dtype=np.int64)
        for i in range(1, nu + 1):
            fb ^= f[i] * a[:, nu + t - i]
        if t < N:
            a[:, nu + t] = inputs[:, t] ^ fb
        else:
            a[:, nu + t] = 0  # tail input equals fb, flushing zeros into the register
            weight += fb  # the tail input is transmitted
        p = np.zeros(2**N, dtype=np.int64)
        for i in range(nu + 1):
            p ^= g[i] * a[:, nu + t - i]
        weight += p
    return inputs.sum(axis=1), weight


def brute_iowef(comp, N):
    w, j = brute_parity_weights(comp, N)
    table = np.zeros((N + 1, N + comp.tail_length + 1))
    np.add.at(table, (w, j), 1)
    return table


def test_parse_poly_octal_and_binary():
    assert parse_poly("23") == (1, 0, 0, 1, 1)
    assert parse_poly("10011", "binary") == (1, 0, 0, 1, 1)
    with pytest.raises(ConfigError):
        parse_poly("9")


def test_accumulator_truncated_hand_table():
    tab = conv_iowef(ConvolutionalComponent.accumulator(termination="truncated"), 3)
    expected = np.zeros((4, 4))
    # 100->111, 010->011, 001->001 ; 110->100, 101->110, 011->010 ; 111->101
    expected[0, 0] = 1
    expected[1, [1, 2, 3]] = 1
    expected[2, 1], expected[2, 2] = 2, 1
    expected[3, 2] = 1
    np.testing.assert_array_equal(tab.counts, expected)


def test_all_zero_input():
    tab = conv_iowef(ConvolutionalComponent.turbo_rsc_37_21(), 8)
    assert tab.entry(0, 0) == 1
    assert tab.counts[0].sum() == 1


@pytest.mark.parametrize("N", [1, 3, 7, 12, 16])
@pytest.mark.parametrize("termination", ["terminated", "truncated"])
def test_conv_iowef_matches_brute_force(N, termination):
    comp = ConvolutionalComponent.turbo_rsc_37_21(termination=termination)
    np.testing.assert_array_equal(conv_iowef(comp, N).counts, brute_iowef(comp, N))


def test_conv_iowef_exact_mode_matches_float():
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    exact = conv_iowef(comp, 12, exact=True)
    assert exact.counts.dtype == object
    np.testing.assert_array_equal(exact.counts.astype(np.float64), conv_iowef(comp, 12).counts)


def test_caps_below_min_weight_warn():
    with pytest.warns(RuntimeWarning):
        tab = conv_iowef(ConvolutionalComponent.turbo_rsc_37_21(), 8, w_max=0)
    assert tab.metadata["status"] == "empty"


def test_delta_table_is_identity():
    N = 7
    a1 = conv_iowef(ConvolutionalComponent.turbo_rsc_37_21(), N)
    delta = IOWEF(N, N, np.array([[math.comb(N, w)] for w in range(N + 1)], dtype=np.float64))
    out = uniform_interleaver_combine(a1, delta, N)
    np.testing.assert_allclose(out.counts, a1.counts, rtol=1e-13, atol=0)


def test_combine_mass_and_symmetry():
    N = 10
    a1 = conv_iowef(ConvolutionalComponent.turbo_rsc_37_21(), N)
    a2 = conv_iowef(ConvolutionalComponent.accumulator(), N)
    c12 = uniform_interleaver_combine(a1, a2, N)
    c21 = uniform_interleaver_combine(a2, a1, N)
    assert c12.total() == pytest.approx(2**N, rel=1e-13)
    width = min(c12.counts.shape[1], c21.counts.shape[1])
    np.testing.assert_allclose(c12.counts[:, :width], c21.counts[:, :width], rtol=1e-13)


def test_combine_exact_matches_float():
    N = 9
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    ex = conv_iowef(comp, N, exact=True)
    exact = uniform_interleaver_combine(ex, ex, N)
    approx = uniform_interleaver_combine(conv_iowef(comp, N), conv_iowef(comp, N), N)
    assert sum(exact.counts.ravel()) == 2**N
    assert any(isinstance(x, Fraction) for x in exact.counts.ravel())
    np.testing.assert_allclose(exact.counts.astype(np.float64), approx.counts, rtol=1e-12)


def test_combine_rejects_mismatched_N():
    a = conv_iowef(ConvolutionalComponent.accumulator(), 4)
    b = conv_iowef(ConvolutionalComponent.accumulator(), 5)
    with pytest.raises(ConfigError):
        uniform_interleaver_combine(a, b, 4)


@pytest.mark.parametrize("N", [2, 4, 5])
def test_ensemble_spectrum_matches_permutation_oracle(N):
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    spec = EnsembleSpec(comp, comp, N)
    res = ensemble_spectrum(spec)
    oracle = permute_average_iowef(comp, comp, N)
    assert res.block.n == oracle.n == spec.n
    np.testing.assert_allclose(res.block.counts, oracle.to_spectrum().counts, rtol=1e-12, atol=1e-14)
    assert res.block.counts[0] == 1
    assert res.block.total() == pytest.approx(2**N, rel=1e-13)


def test_ensemble_rate_and_flags():
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    spec = EnsembleSpec(comp, comp, 1000)
    assert spec.n == 3016
    assert spec.assumption_flags()["tail_bits_in_parity_weight"] is True


def test_truncation_never_changes_reported_entries():
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    spec = EnsembleSpec(comp, comp, 40)
    full = ensemble_spectrum(spec).block.counts
    for d_max in (12, 20, 33):
        cut = ensemble_spectrum(spec, d_max=d_max)
        np.testing.assert_allclose(cut.block.counts[: d_max + 1], full[: d_max + 1], rtol=1e-12, atol=0)
        assert np.all(cut.block.counts[d_max + 1 :] == 0)
        assert cut.block.d_max == d_max
        tail = cut.metadata["tail_counts"]
        assert tail["first_d"] == d_max + 1


def test_ensemble_iowef_exact_below_cap():
    comp = ConvolutionalComponent.turbo_rsc_37_21()
    spec = EnsembleSpec(comp, comp, 30)
    full = ensemble_iowef(spec).codeword_table()
    cut = ensemble_iowef(spec, d_max=18).codeword_table()
    np.testing.assert_allclose(cut[:, :19], full[: cut.shape[0], :19], rtol=1e-12)


def test_component_and_ensemble_files(tmp_path):
    (tmp_path / "c.json").write_text('{"feedback": "37", "feedforward": "21", "notation": "octal"}')
    (tmp_path / "e.json").write_text('{"component1": "c.json", "component2": "c.json", "N": 16}')
    comp = load_component(tmp_path / "c.json")
    assert comp == ConvolutionalComponent.turbo_rsc_37_21()
    spec = load_ensemble(tmp_path / "e.json")
    assert spec.N == 16 and spec.comp1 == comp
    assert ConvolutionalComponent.from_dict(comp.to_dict()) == comp
