import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coredcodes.f2 import BitVector, rank, row_space_contains
from coredcodes.pinwheel import pinwheel_factor
from coredcodes.product import (InvalidCodeword, NoLogical, bare_logicals, code_params,
                                dressed_logical, hypergraph_product, is_logical,
                                min_logical_weight, red_projection, symplectic_pairing)
from coredcodes.slead import build_codeword, deplete, random_slead, repetition_chain, slead_code


def brute_min_logical(c, sector):
    """Exhaustive oracle: lightest vector in ker H_sector outside rowspace H_other."""
    H, Ho = c.H(sector).to_dense(), c.H_other(sector)
    for w in range(1, c.n_q + 1):
        for supp in itertools.combinations(range(c.n_q), w):
            v = np.zeros(c.n_q, dtype=np.uint8)
            v[list(supp)] = 1
            if not (H @ v % 2).any() and not row_space_contains(Ho, BitVector.from_dense(v)):
                return w
    return None


def random_depleted(n, seed, v=None):
    rng = np.random.default_rng(seed)
    s = random_slead(n, rng)
    code = slead_code(n, s.edges + [(u, u) for u in range(n)],
                      positions=s.positions, t=s.direction)
    v = int(rng.integers(n)) if v is None else v
    return deplete(code, v), v


def test_rep3_square(rep3_product):
    c = rep3_product
    assert c.n_q == 13
    assert c.k_q == 1
    assert c.commutes()
    assert c.d_q == 3
    assert code_params(c) == (13, 1, 3)
    assert len(c.red_qubits()) == 9 and len(c.blue_qubits()) == 4


def test_rep3_distance_exhaustive(rep3_product):
    for s in "XZ":
        assert min_logical_weight(rep3_product, s) == 3 == brute_min_logical(rep3_product, s)


def test_rep3_bare_logicals(rep3_product):
    c = rep3_product
    LX, LZ = c.LX[0], c.LZ[0]
    assert LX.weight() == 3 and LZ.weight() == 3
    assert (LX & LZ).weight() == 1
    assert symplectic_pairing(c).tolist() == [[1]]
    assert not c.HX.mul_vec(LX).any() and not c.HZ.mul_vec(LZ).any()
    assert all(q in c.red_qubits() for q in LX.support() + LZ.support())


def test_undepleted_product_has_no_logical():
    f = repetition_chain(3)
    c = hypergraph_product(f, f)
    assert c.k_q == 0 and code_params(c)[1:] == (0, None)
    with pytest.raises(NoLogical):
        min_logical_weight(c, "X")


def test_incenter_pinwheel_size():
    f = pinwheel_factor(1, 0, placement="incenter").code
    c = hypergraph_product(f, f)
    assert c.n_q == 20 * 20 + 19 * 19 == 761
    assert c.k_q == 1


def test_sink_codeword_embeds_in_one_column():
    c1 = repetition_chain(3, [2])  # codeword is the unit vector on the sink
    c2 = repetition_chain(3, [0])
    q = hypergraph_product(c1, c2)
    C1, C2 = build_codeword(c1, 2), build_codeword(c2, 0)
    LX, LZ = bare_logicals(q, C1, C2, c1=c1, c2=c2)
    assert LZ.support() == [2 * 3 + b for b in range(3)]
    assert LX.weight() == 1


def test_bare_logicals_reject_non_codewords(rep3_product):
    with pytest.raises(InvalidCodeword):
        bare_logicals(rep3_product, BitVector.from_support(3, [0]),
                      BitVector.from_support(3, [0, 1, 2]), c1=repetition_chain(3, [0]))


def test_min_weight_invariant_under_stabilizers(rep3_product):
    c = rep3_product
    rng = np.random.default_rng(0)
    for _ in range(10):
        L = dressed_logical(c, "X", rng)
        assert is_logical(c, "X", L)
    assert min_logical_weight(c, "X") == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1),
       st.booleans(), st.booleans())
def test_product_identities(n1, n2, seed, dep1, dep2):
    c1 = random_depleted(n1, seed)[0] if dep1 else repetition_chain(n1)
    c2 = random_depleted(n2, seed + 1)[0] if dep2 else repetition_chain(n2)
    q = hypergraph_product(c1, c2)
    assert q.commutes()
    assert q.n_q == c1.n * c2.n + c1.m * c2.m
    assert q.k_q == c1.k * c2.k + c1.k_dual * c2.k_dual
    assert rank(q.HX) == rank(q.HX.T)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_dressed_logical_support_contains_factor_codeword(n1, n2, seed):
    c1, _ = random_depleted(n1, seed)
    c2, _ = random_depleted(n2, seed + 7)
    q = hypergraph_product(c1, c2)
    C1, C2 = q.factor_codewords
    rng = np.random.default_rng(seed)
    for _ in range(5):
        L = dressed_logical(q, "X", rng, max_rows=2)
        assert set(C1.support()) <= red_projection(q, L, 0)
        M = dressed_logical(q, "Z", rng, max_rows=2)
        assert set(C2.support()) <= red_projection(q, M, 1)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_distance_matches_brute_force(n1, n2, seed):
    c1, _ = random_depleted(n1, seed)
    c2, _ = random_depleted(n2, seed + 3)
    q = hypergraph_product(c1, c2)
    if q.n_q > 22:
        return
    dx, dz = (brute_min_logical(q, s) for s in "XZ")
    assert min_logical_weight(q, "X") == dx
    assert min_logical_weight(q, "Z") == dz
    assert q.d_q == min(dx, dz)
