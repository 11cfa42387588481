import itertools

import numpy as np
import pytest

from app.fec.ldpc import builtin_matrix


@pytest.fixture
def majority():
    return builtin_matrix("majority")


@pytest.fixture
def ham74():
    return builtin_matrix("ham74")


@pytest.fixture
def reg32():
    return builtin_matrix("reg32")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def span(generator: np.ndarray) -> np.ndarray:
    """All 2^k codewords generated by the rows of `generator`."""
    k = generator.shape[0]
    messages = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.int64).reshape(-1, k)
    return (messages @ generator.astype(np.int64) % 2).astype(np.uint8)


@pytest.fixture
def ham74_codewords(ham74):
    return span(ham74.generator)
