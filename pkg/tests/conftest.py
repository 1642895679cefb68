import numpy as np
import pytest

from mannerctc.alphabet import default_alphabet, default_manner_map

# Published manner-to-character sets, transcribed independently of the package.
REFERENCE_MANNERS = {
    "-": {0},
    "V": {1, 5, 9, 15, 21},
    "$": {12, 18, 23, 25},
    "N": {13, 14},
    "F": {6, 8, 10, 19, 22, 24, 26},
    "S": {2, 3, 4, 7, 11, 16, 17, 20},
    ">": {27},
}


def reference_manner_of(ch: str) -> str:
    """Per-character lookup used as an oracle: letter -> reference manner."""
    idx = 27 if ch == " " else (0 if ch == "-" else ord(ch) - ord("A") + 1)
    (label,) = [m for m, s in REFERENCE_MANNERS.items() if idx in s]
    return label


def random_posteriors(rng, T, L, concentration=1.0):
    return rng.dirichlet(np.full(L, concentration), size=T)


@pytest.fixture
def alphabet():
    return default_alphabet()


@pytest.fixture
def manner_map():
    return default_manner_map()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
