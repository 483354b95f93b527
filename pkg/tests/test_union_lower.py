import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlbounds import (
    ConfigError,
    EventSystem,
    LinearCode,
    SizeGuardError,
    cohen_merhav_bound,
    decaen_bound,
    decaen_ml_bound,
    enumerate_spectrum,
    load_events,
    mc_ml_awgn,
    ml_lower_bound,
    union_bound,
)
from mlbounds.channels import q_function
from mlbounds.union_lower import optimal_weights, random_event_system, store_events

from conftest import awgn


@st.composite
def event_systems(draw):
    n_atoms = draw(st.integers(1, 12))
    n_events = draw(st.integers(1, 6))
    raw = draw(st.lists(st.floats(1e-3, 1.0), min_size=n_atoms, max_size=n_atoms))
    p = np.array(raw) / sum(raw)
    bits = draw(st.lists(st.booleans(), min_size=n_atoms * n_events, max_size=n_atoms * n_events))
    mem = np.array(bits, dtype=bool).reshape(n_events, n_atoms)
    return EventSystem(p, mem)


@settings(max_examples=300, deadline=None)
@given(event_systems())
def test_optimal_weights_give_union(events):
    assert cohen_merhav_bound(events, "optimal") == pytest.approx(events.union_probability(), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(event_systems())
def test_unit_weights_give_decaen(events):
    assert cohen_merhav_bound(events) == pytest.approx(decaen_bound(events), abs=1e-12)
    assert decaen_bound(events) <= events.union_probability() + 1e-12


@settings(max_examples=200, deadline=None)
@given(event_systems(), st.data())
def test_any_weights_are_lower_bounds(events, data):
    vals = data.draw(st.lists(st.floats(0.0, 5.0), min_size=events.membership.size,
                              max_size=events.membership.size))
    m = np.array(vals).reshape(events.membership.shape)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert cohen_merhav_bound(events, m) <= events.union_probability() + 1e-12


@settings(max_examples=100, deadline=None)
@given(event_systems(), st.floats(0.01, 100.0))
def test_weights_scale_invariant(events, scale):
    m = optimal_weights(events) + 0.25
    assert cohen_merhav_bound(events, m * scale) == pytest.approx(cohen_merhav_bound(events, m), rel=1e-12)


def test_decaen_hand_example():
    # atoms a, b, c with p = .5, .3, .2; A0 = {a, b}, A1 = {b, c}
    ev = EventSystem(np.array([0.5, 0.3, 0.2]), np.array([[1, 1, 0], [0, 1, 1]], dtype=bool))
    assert decaen_bound(ev) == pytest.approx(0.8**2 / 1.1 + 0.5**2 / 0.8, rel=1e-15)
    assert ev.union_probability() == pytest.approx(1.0)


def test_zero_weight_warning():
    ev = EventSystem(np.array([0.5, 0.5]), np.array([[1, 0], [0, 1]], dtype=bool))
    with pytest.warns(UserWarning, match="zero weight"):
        val = cohen_merhav_bound(ev, np.array([[1.0, 1.0], [0.0, 0.0]]))
    assert val == pytest.approx(0.5)


def test_event_system_validation():
    with pytest.raises(ConfigError):
        EventSystem(np.array([0.5, 0.4]), np.array([[1, 0]], dtype=bool))
    with pytest.raises(ConfigError):
        EventSystem(np.array([1.0]), np.array([[1, 0]], dtype=bool))
    with pytest.raises(ConfigError):
        EventSystem.from_dict({"atoms": [{"name": "a", "p": 1.0}], "events": [{"atoms": ["zz"]}]})
    ev = EventSystem(np.array([1.0]), np.array([[1]], dtype=bool))
    with pytest.raises(ConfigError):
        cohen_merhav_bound(ev, "best")
    with pytest.raises(ConfigError):
        cohen_merhav_bound(ev, np.array([[-1.0]]))


def test_json_round_trip(tmp_path):
    ev = random_event_system(np.random.default_rng(2))
    path = tmp_path / "ev.json"
    store_events(ev, path)
    back = load_events(path)
    assert np.array_equal(back.membership, ev.membership)
    assert np.allclose(back.probs, ev.probs, rtol=0, atol=0)
    assert back.event_names == ev.event_names


def test_json_index_references(tmp_path):
    doc = {"atoms": [{"name": "a", "p": 0.25}, {"name": "b", "p": 0.75}], "events": [{"name": "E", "atoms": [1]}]}
    path = tmp_path / "ev.json"
    path.write_text(json.dumps(doc))
    assert load_events(path).union_probability() == 0.75
    path.write_text("{broken")
    with pytest.raises(ConfigError):
        load_events(path)


def test_two_codewords_exact():
    code = LinearCode.repetition(5)
    for ebno in (0.0, 3.0, 6.0):
        ch = awgn(ebno, 0.2)
        exact = q_function(math.sqrt(2 * 5 * ch.es_n0))
        assert decaen_ml_bound(code, ch).raw == pytest.approx(exact, rel=1e-12)
        assert ml_lower_bound(code, ch).raw == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("ebno", [0.0, 2.5, 5.0])
def test_a_zero_is_decaen(hamming, ebno):
    ch = awgn(ebno)
    assert ml_lower_bound(hamming, ch, a=0.0).raw == pytest.approx(decaen_ml_bound(hamming, ch).raw, rel=1e-10)


def test_tilted_terms_match_monte_carlo(hamming):
    # independent route: estimate numerator and denominator of the weighted bound by simulation
    ch = awgn(1.0)
    a = 0.3
    s = ch.sigma
    cw = hamming.codewords()[1:].astype(np.float64)
    signals = 1.0 - 2.0 * cw
    rng = np.random.default_rng(17)
    num = np.zeros(len(cw))
    den = np.zeros(len(cw))
    total = 0
    for _ in range(10):
        r = 1.0 + s * rng.standard_normal((200_000, hamming.n))
        wins = (r @ cw.T) < 0
        d2 = ((r[:, None, :] - signals[None, :, :]) ** 2).sum(axis=2)
        m = np.exp(-a * d2)
        num += (m * wins).sum(axis=0)
        den += (m * m * wins * wins.sum(axis=1, keepdims=True)).sum(axis=0)
        total += r.shape[0]
    est = float(np.sum((num / total) ** 2 / (den / total)))
    assert ml_lower_bound(hamming, ch, a=a).raw == pytest.approx(est, rel=0.02)


def test_optimized_lower_bound_bracket(ext_hamming):
    ch = awgn(3.0, 0.5)
    spec = enumerate_spectrum(ext_hamming)
    base = ml_lower_bound(ext_hamming, ch, a=0.0).raw
    best = ml_lower_bound(ext_hamming, ch)
    assert best.raw >= base
    assert 0 <= best.params["a"]
    est = mc_ml_awgn(ext_hamming, ch, 400_000, seed=3)
    assert best.raw <= est.estimate + 3 * est.std_error
    assert best.raw <= union_bound(spec, ch).raw


def test_rejects_spectra_and_large_codes(hamming_spectrum):
    with pytest.raises(ConfigError):
        ml_lower_bound(hamming_spectrum, awgn(1.0))
    big = LinearCode(np.hstack([np.eye(17, dtype=np.uint8), np.ones((17, 1), dtype=np.uint8)]))
    with pytest.raises(SizeGuardError):
        ml_lower_bound(big, awgn(1.0))
    with pytest.raises(ConfigError):
        ml_lower_bound(LinearCode.repetition(3), awgn(1.0), a=-1.0)
