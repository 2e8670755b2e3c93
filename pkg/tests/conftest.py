import numpy as np
import pytest

from coredcodes.coring import core
from coredcodes.f2 import BinaryMatrix
from coredcodes.product import hypergraph_product
from coredcodes.slead import repetition_chain, slead_code

# Worked example: check on vertex v reads the listed bits.
EXAMPLE_CHECKS = [{0}, {0, 1}, {1, 2}, {1, 3, 5}, {0, 2, 4}, {2, 4, 5}, {3, 5, 6}]
EXAMPLE_CODEWORD = [1, 1, 1, 0, 0, 1, 1]


def example_edges():
    edges = []
    for v, bits in enumerate(EXAMPLE_CHECKS):
        edges += [(u, v) for u in sorted(bits)]
    return edges


@pytest.fixture
def example_H():
    return BinaryMatrix.from_rows([sorted(c) for c in EXAMPLE_CHECKS], 7)


@pytest.fixture
def example_code():
    return slead_code(7, example_edges())


@pytest.fixture(scope="session")
def rep3_product():
    f = repetition_chain(3, [0])
    return hypergraph_product(f, f)


@pytest.fixture(scope="session")
def cored13(rep3_product):
    return core(rep3_product)[0]


@pytest.fixture(scope="session")
def cored_rep5():
    f = repetition_chain(5, [2])
    return core(hypergraph_product(f, f))[0]


def random_matrix(rng, r, c, p=0.5):
    return BinaryMatrix.from_dense((rng.random((r, c)) < p).astype(np.uint8))
