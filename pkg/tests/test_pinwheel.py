import math
from fractions import Fraction

import numpy as np
import pytest

from coredcodes.f2 import kernel_basis
from coredcodes.pinwheel import (PERMS, DEFAULT_NU, build_pinwheel_code, choose_depletion_site,
                                 default_depletion_target, generation, partial_substitute,
                                 pinwheel_factor, prototiles, substitute, tiling_to_json)
from coredcodes.product import hypergraph_product
from coredcodes.slead import build_codeword, deplete, validate_slead


def edge_angles(tile):
    pts = tile.as_floats()
    out = set()
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        d = np.subtract(pts[b], pts[a])
        out.add(round(math.atan2(d[1], d[0]) % math.pi, 9))
    return out


def test_tile_counts():
    assert len(prototiles()) == 4
    assert len(generation(1, 0)) == 20
    assert len(generation(2, 0)) == 100
    assert len(generation(1, 2, PERMS["A"])) == 52
    assert len(generation(1, 1, PERMS["B"])) == 36


def test_j5_is_full_substitution():
    tiles = generation(1, 0)
    assert partial_substitute(tiles, PERMS["B"], 5) == substitute(tiles)
    assert generation(1, 5) == generation(2, 0)


def test_partial_substitution_labels():
    tiles = generation(1, 0)
    out = partial_substitute(tiles, PERMS["B"], 1)
    kept = [t for t in out if len(t.path) == 1]
    assert all(t.label != 2 for t in kept)
    assert len(out) - len(kept) == 5 * sum(t.label == 2 for t in tiles)


def test_irrational_angle_appears():
    parent = prototiles()[0]
    rel = set()
    for child in substitute([parent]):
        for a in edge_angles(child):
            for b in edge_angles(parent):
                rel.add(round((a - b) % math.pi, 9))
    assert round(math.atan(0.5), 9) in rel


@pytest.mark.parametrize("G", [0, 1, 2])
def test_full_generation_areas_and_cover(G):
    tiles = generation(G, 0)
    assert all(t.area == Fraction(1, 4 * 5 ** G) for t in tiles)
    assert sum(t.area for t in tiles) == 1


def test_tiles_interior_disjoint():
    tiles = generation(1, 2)

    def inside(p, tri):
        (ax, ay), (bx, by), (cx, cy) = tri
        s = [(bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax),
             (cx - bx) * (p[1] - by) - (cy - by) * (p[0] - bx),
             (ax - cx) * (p[1] - cy) - (ay - cy) * (p[0] - cx)]
        return all(x > 1e-12 for x in s) or all(x < -1e-12 for x in s)

    tris = [t.as_floats() for t in tiles]
    for t in tiles:
        c = t.incenter()
        assert sum(inside(c, tri) for tri in tris) == 1
    assert float(sum(t.area for t in tiles)) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("placement", ["vertex", "incenter"])
@pytest.mark.parametrize("g", [(1, 0), (1, 2), (2, 0)])
def test_code_is_valid_slead(g, placement):
    code = build_pinwheel_code(generation(*g), placement=placement)
    s = code.slead
    validate_slead(s.num_vertices, s.edges + [(v, v) for v in range(s.num_vertices)],
                   positions=s.positions, t=s.direction)
    assert code.m == code.n and kernel_basis(code.H) == []


def test_strict_half_space():
    s = build_pinwheel_code(generation(1, 2), t=(-1, -1)).slead
    t = np.array([-1.0, -1.0])
    for u, v in s.edges:
        if u != v:
            assert (s.positions[u] - s.positions[v]) @ t > 0


def test_single_source_and_sink_on_vertex_lattice():
    s = build_pinwheel_code(generation(1, 0), t=(-1, 1)).slead
    assert len(s.sources) == 1 and len(s.sinks) == 1


def test_incenter_lattice_sizes():
    f = pinwheel_factor(1, 0, placement="incenter")
    assert (f.code.n, f.code.m) == (20, 19)
    assert hypergraph_product(f.code, f.code).n_q == 761


def test_depletion_site_is_heaviest_of_six():
    code = build_pinwheel_code(generation(1, 0))
    s = code.slead
    target = s.positions[s.sources[0]]
    site = choose_depletion_site(code, target=target)
    dist = np.linalg.norm(s.positions - target, axis=1)
    near = sorted(range(code.n), key=lambda v: (dist[v], v))[:6]
    weights = {v: build_codeword(deplete(code, v), v).weight() for v in near}
    best = max(weights.values())
    assert site == min(v for v, w in weights.items() if w == best)


def test_depletion_defaults():
    assert DEFAULT_NU == pytest.approx(3 / 5)
    target = default_depletion_target(100)
    assert np.all(target >= 0) and np.all(target <= 1)
    with pytest.raises(ValueError):
        choose_depletion_site(build_pinwheel_code(generation(1, 0)), nu=0.0)


def test_factor_codeword_is_kernel():
    f = pinwheel_factor(1, 1, "B")
    assert f.code.k == 1
    assert not f.code.H.mul_vec(f.codeword).any()
    assert f.codeword.weight() > 1


def test_distance_nondecreasing_across_generations():
    for perm in "AB":
        ws = [pinwheel_factor(*g, perm=perm).codeword.weight()
              for g in [(1, 0), (1, 1), (1, 2), (2, 0)]]
        assert ws == sorted(ws), (perm, ws)


def test_tiling_json():
    rows = tiling_to_json(generation(1, 0))
    assert len(rows) == 20
    assert {"vertices", "label", "path", "orientation"} <= set(rows[0])
    assert all(len(r["vertices"]) == 3 for r in rows)
