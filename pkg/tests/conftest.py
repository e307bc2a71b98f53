import numpy as np
import pytest


def random_text(rng, n, sigma, offset=32):
    """Random bytes over ``sigma`` consecutive values; every value appears at least once."""
    vals = rng.integers(0, sigma, n)
    vals[:sigma] = np.arange(sigma)
    rng.shuffle(vals)
    return (vals + offset).astype(np.uint8).tobytes()


def random_dna(rng, n, alphabet=b"ACGT"):
    return rng.choice(np.frombuffer(alphabet, np.uint8), n).tobytes()


def brute_suffix_array(symbols):
    seq = list(symbols)
    return sorted(range(len(seq)), key=lambda i: seq[i:])


@pytest.fixture
def rng():
    return np.random.default_rng(20150615)
