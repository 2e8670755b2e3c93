import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coredcodes.f2 import BitVector, kernel_basis
from coredcodes.pinwheel import pinwheel_factor
from coredcodes.slead import (AlreadyDepleted, CycleFound, HalfSpaceViolation, MissingSelfLoop,
                              NotDepleted, causal_cone, build_codeword, deplete,
                              mediate_edges, random_slead, repetition_chain, slead_code,
                              stopping_set_check, validate_slead)

from conftest import EXAMPLE_CODEWORD, example_edges


def longest_path_levels(n, edges):
    """Independent oracle: longest path from any source, by repeated relaxation."""
    lvl = [0] * n
    for _ in range(n):
        for u, v in edges:
            if u != v:
                lvl[v] = max(lvl[v], lvl[u] + 1)
    return lvl


def closure(n, edges):
    R = np.eye(n, dtype=bool)
    for u, v in edges:
        R[u, v] = True
    for k in range(n):
        R |= R[:, [k]] & R[[k], :]
    return R


def test_example_cycle_rejected():
    edges = [e for e in example_edges() if e != (2, 5)] + [(5, 2)]
    with pytest.raises(CycleFound) as err:
        validate_slead(7, edges)
    assert set(err.value.cycle) == {2, 4, 5}


def test_missing_self_loop():
    with pytest.raises(MissingSelfLoop):
        validate_slead(3, [(0, 0), (1, 1), (0, 1), (1, 2)])


def test_half_space_violation():
    # edges must run against t: (x_u - x_v) . t > 0 for an edge u -> v
    pos = np.array([[0.0], [1.0]])
    validate_slead(2, [(0, 0), (1, 1), (0, 1)], positions=pos, t=[-1.0])
    with pytest.raises(HalfSpaceViolation):
        validate_slead(2, [(0, 0), (1, 1), (0, 1)], positions=pos, t=[1.0])
    with pytest.raises(HalfSpaceViolation):  # ties are rejected too
        validate_slead(2, [(0, 0), (1, 1), (0, 1)], positions=np.zeros((2, 1)), t=[1.0])


def test_chain_levels():
    s = repetition_chain(6).slead
    assert s.levels == tuple(range(6))


def test_random_dag_levels_match_longest_path():
    rng = np.random.default_rng(0)
    for _ in range(10):
        s = random_slead(12, rng)
        assert list(s.levels) == longest_path_levels(12, s.edges)


def test_example_depletion(example_code):
    assert example_code.k == 0 and example_code.rank == 7
    dep = deplete(example_code, 0)
    assert dep.m == 6 and dep.k == 1
    assert build_codeword(dep, 0).to_dense().tolist() == EXAMPLE_CODEWORD
    assert stopping_set_check(dep, BitVector.from_dense(EXAMPLE_CODEWORD))
    with pytest.raises(AlreadyDepleted):
        deplete(dep, 0)


def test_not_depleted_codeword(example_code):
    with pytest.raises(NotDepleted):
        build_codeword(example_code, 0)


def test_sink_depletion_gives_unit_codeword():
    c = repetition_chain(5, [4])
    assert build_codeword(c, 4) == BitVector.unit(5, 4)
    assert c.k == 1


def test_head_depletion_gives_all_ones():
    c = repetition_chain(5, [0])
    assert c.k == 1
    (v,) = kernel_basis(c.H)
    assert v.weight() == 5 and build_codeword(c, 0) == v


def test_stopping_set_examples(example_code):
    dep = deplete(example_code, 0)
    C = build_codeword(dep, 0)
    assert stopping_set_check(dep, BitVector.zeros(7))
    for i in range(7):
        flipped = BitVector.from_dense(C.to_dense() ^ np.eye(7, dtype=np.uint8)[i])
        assert not stopping_set_check(dep, flipped)


def test_causal_cone():
    c = repetition_chain(5)
    assert causal_cone(c.slead, 4) == {4}
    assert causal_cone(c.slead, 0) == set(range(5))
    rng = np.random.default_rng(1)
    for _ in range(10):
        s = random_slead(9, rng)
        R = closure(9, s.edges)
        for v in range(9):
            assert causal_cone(s, v) == set(np.flatnonzero(R[v]).tolist())


def test_pinwheel_codeword_in_cone():
    f = pinwheel_factor(1, 1)
    C = build_codeword(f.code, f.site)
    assert not f.code.H.mul_vec(C).any()
    assert set(C.support()) <= causal_cone(f.code.slead, f.site)


def test_mediation_noop_when_short():
    c = repetition_chain(4, [0])
    m = mediate_edges(c, 1.5)
    assert m.n == c.n and m.H == c.H


def test_mediation_long_edge():
    pos = np.array([[0.0], [5.0], [6.0]])
    c = slead_code(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)], positions=pos, t=[-1.0],
                   depleted={0}, self_loops=[1, 2])
    m = mediate_edges(c, 1.0)
    assert m.n - c.n >= 4
    assert m.k == c.k == 1
    (before,), (after,) = kernel_basis(c.H), kernel_basis(m.H)
    assert after.weight() == before.weight() + (m.n - c.n)
    P = m.slead.positions
    for u, v in m.slead.edges:
        if u != v:
            assert np.linalg.norm(P[v] - P[u]) <= 1.0 + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_undepleted_kernel_trivial(n, seed):
    s = random_slead(n, np.random.default_rng(seed))
    code = slead_code(n, s.edges + [(v, v) for v in range(n)])
    assert kernel_basis(code.H) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.data())
def test_codeword_properties(n, seed, data):
    s = random_slead(n, np.random.default_rng(seed))
    code = slead_code(n, s.edges + [(v, v) for v in range(n)])
    v = data.draw(st.integers(0, n - 1))
    dep = deplete(code, v)
    C = build_codeword(dep, v)
    assert not dep.H.mul_vec(C).any()
    assert stopping_set_check(dep, C)
    assert dep.k == 1
    low = {u for u in range(n) if dep.slead.levels[u] <= dep.slead.levels[v]} - {v}
    assert not low & set(C.support())


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(0.05, 0.6))
def test_mediation_preserves_k(n, seed, r):
    s = random_slead(n, np.random.default_rng(seed))
    code = deplete(slead_code(n, s.edges + [(v, v) for v in range(n)],
                              positions=s.positions, t=s.direction), 0)
    assert mediate_edges(code, r).k == code.k
