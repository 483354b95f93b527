import numpy as np
import pytest

from mlbounds import ChannelModel, LinearCode, enumerate_spectrum


@pytest.fixture(scope="session")
def hamming():
    return LinearCode.hamming74()


@pytest.fixture(scope="session")
def ext_hamming():
    return LinearCode.extended_hamming84()


@pytest.fixture(scope="session")
def hamming_spectrum(hamming):
    return enumerate_spectrum(hamming)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def awgn(ebno_db, rate=4 / 7):
    return ChannelModel.biawgn(ebno_db, rate)
