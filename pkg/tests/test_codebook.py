import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlbounds import ConfigError, DistanceSpectrum, LinearCode, SizeGuardError
from mlbounds.codebook import (
    brute_force_min_distance,
    enumerate_iowef,
    enumerate_spectrum,
    load_code,
    load_spectrum,
    parse_code,
    store_code,
    store_spectrum,
)


def test_repetition_spectrum():
    assert enumerate_spectrum(LinearCode.repetition(3)).terms() == {0: 1, 3: 1}


def test_hamming_spectrum(hamming):
    assert enumerate_spectrum(hamming).terms() == {0: 1, 3: 7, 4: 7, 7: 1}


def test_identity_generator_is_whole_space():
    code = LinearCode.from_rows(["10", "01"])
    assert enumerate_spectrum(code).terms() == {0: 1, 1: 2, 2: 1}


def test_rate_is_exact(hamming):
    assert hamming.rate == 4 / 7
    assert hamming.k == 4 and hamming.n == 7


def test_rank_deficient_generator_rejected():
    with pytest.raises(ConfigError):
        LinearCode.from_rows(["110", "011", "101"])


def test_repetition_iowef():
    tab = enumerate_iowef(LinearCode.repetition(3))
    assert tab.entry(0, 0) == 1 and tab.entry(1, 2) == 1
    assert tab.total() == 2


def test_hamming_iowef_marginal_matches_spectrum(hamming):
    tab = enumerate_iowef(hamming)
    assert tab.total() == 16
    np.testing.assert_array_equal(tab.to_spectrum().counts, enumerate_spectrum(hamming).counts)


def test_non_systematic_without_mask_rejected():
    code = LinearCode.from_rows(["1101", "1011", "0111"])
    with pytest.raises(ConfigError):
        enumerate_iowef(code)


def test_parse_code_text():
    code = parse_code("3 1\n111\n")
    assert code == LinearCode.repetition(3)


def test_parse_code_malformed():
    with pytest.raises(ConfigError):
        parse_code("3 1\n11\n")


def test_code_file_round_trip(tmp_path, hamming):
    path = tmp_path / "h.txt"
    store_code(hamming, path)
    assert load_code(path) == hamming


def test_spectrum_file_round_trip(tmp_path, hamming):
    spec = enumerate_spectrum(hamming)
    store_spectrum(spec, tmp_path / "s.json")
    back = load_spectrum(tmp_path / "s.json")
    np.testing.assert_array_equal(back.counts, spec.counts)
    tab = enumerate_iowef(hamming)
    store_spectrum(tab, tmp_path / "t.json")
    np.testing.assert_array_equal(load_spectrum(tmp_path / "t.json").counts, tab.counts)


def test_exact_counts_survive_round_trip(tmp_path):
    big = 2**80 + 1
    spec = DistanceSpectrum(4, np.array([1, 0, big, 0, 3], dtype=object))
    store_spectrum(spec, tmp_path / "s.json")
    assert load_spectrum(tmp_path / "s.json").counts[2] == big


def test_enumeration_guard():
    gen = np.eye(29, dtype=np.uint8)
    with pytest.raises(SizeGuardError):
        enumerate_spectrum(LinearCode(gen))


def test_specific_code_check(hamming):
    enumerate_spectrum(hamming).check_specific_code()
    with pytest.raises(ConfigError):
        DistanceSpectrum(7, np.array([1, 0, 0, 3.5, 7, 0, 0, 1])).check_specific_code()


def test_log_nonzero_handles_huge_exact_counts():
    spec = DistanceSpectrum(3, np.array([1, 0, 2**2000, 0], dtype=object))
    d, la = spec.log_nonzero()
    assert d.tolist() == [2]
    assert la[0] == pytest.approx(2000 * math.log(2), rel=1e-15)


@st.composite
def generators(draw):
    k = draw(st.integers(1, 6))
    n = draw(st.integers(k, 12))
    rows = draw(st.lists(st.integers(1, 2**n - 1), min_size=k, max_size=k))
    gen = ((np.array(rows)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    return gen


@settings(max_examples=60, deadline=None)
@given(generators())
def test_spectrum_invariants(gen):
    try:
        code = LinearCode(gen)
    except ConfigError:
        return  # rank-deficient draw
    spec = enumerate_spectrum(code)
    assert spec.counts[0] == 1
    assert spec.total() == 2**code.k
    assert spec.min_distance() == brute_force_min_distance(code)
    tab = enumerate_iowef(code, info_positions=code.info_positions or _pivots(code))
    np.testing.assert_array_equal(tab.to_spectrum().counts, spec.counts)


def _pivots(code):
    from mlbounds.oracle import _reduced_generator

    return tuple(_reduced_generator(code.generator)[1])
