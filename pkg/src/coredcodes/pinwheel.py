"""Pinwheel tilings of the unit square and the slead codes built on them.

A tile is a right triangle with legs in ratio 1:2, stored as its right-angle
corner ``P``, the end of the short leg ``S`` and the end of the long leg
``L``. Coordinates are exact rationals, so repeated substitution never
drifts and shared edges can be matched exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .slead import ClassicalCode, build_codeword, deplete, slead_code

Point = tuple[Fraction, Fraction]

PERM_A = (1, 2, 3, 4, 5)
PERM_B = (2, 4, 3, 1, 5)
PERMS = {"A": PERM_A, "B": PERM_B}
DEFAULT_T = (-1.0, -1.0)
DEFAULT_NU = 3 / 5


@dataclass(frozen=True)
class Tile:
    P: Point
    S: Point
    L: Point
    label: int
    path: tuple[int, ...] = ()

    @property
    def vertices(self) -> tuple[Point, Point, Point]:
        return (self.P, self.S, self.L)

    @property
    def orientation(self) -> int:
        """+1 if P, S, L run counter-clockwise, else -1."""
        (px, py), (sx, sy), (lx, ly) = self.P, self.S, self.L
        cross = (sx - px) * (ly - py) - (sy - py) * (lx - px)
        return 1 if cross > 0 else -1

    @property
    def area(self) -> Fraction:
        (px, py), (sx, sy), (lx, ly) = self.P, self.S, self.L
        return abs((sx - px) * (ly - py) - (sy - py) * (lx - px)) / 2

    def incenter(self) -> np.ndarray:
        # Side lengths opposite P, S, L are sqrt(5), 2, 1 in units of the short leg.
        w = np.array([math.sqrt(5.0), 2.0, 1.0])
        pts = np.array([[float(c) for c in p] for p in self.vertices])
        return (w[:, None] * pts).sum(axis=0) / w.sum()

    def as_floats(self) -> list[list[float]]:
        return [[float(c) for c in p] for p in self.vertices]


def _lerp(a: Point, b: Point, f: Fraction) -> Point:
    return (a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f)


def children(tile: Tile) -> list[Tile]:
    """The five congruent descendants of a tile, labelled 1..5.

    The altitude from the right angle splits the tile into a descendant next
    to ``S`` and a half-scale copy of the parent, which is cut at its edge
    midpoints into four more descendants.
    """
    P, S, L = tile.P, tile.S, tile.L
    half = Fraction(1, 2)
    D = _lerp(L, S, Fraction(4, 5))   # foot of the altitude from P
    M1 = _lerp(L, S, Fraction(2, 5))  # midpoint of L-D
    M2 = _lerp(L, P, half)            # midpoint of L-P
    M3 = _lerp(P, D, half)            # midpoint of P-D
    corners = [
        (D, S, P),
        (M1, M2, L),
        (D, M3, M1),
        (M3, P, M2),
        (M2, M1, M3),
    ]
    return [Tile(p, s, l, i + 1, tile.path + (i + 1,))
            for i, (p, s, l) in enumerate(corners)]


def prototiles() -> list[Tile]:
    """Four tiles covering the unit square, symmetric under a half turn."""
    h = Fraction(1, 2)
    z, o = Fraction(0), Fraction(1)
    return [
        Tile((o, z), (o, h), (z, z), 1),
        Tile((z, h), (z, z), (o, h), 2),
        Tile((z, o), (z, h), (o, o), 3),
        Tile((o, h), (o, o), (z, h), 4),
    ]


def substitute(tiles: Sequence[Tile]) -> list[Tile]:
    return [c for t in tiles for c in children(t)]


def partial_substitute(tiles: Sequence[Tile], sigma: Sequence[int], j: int) -> list[Tile]:
    """Substitute only tiles whose label is among ``sigma[:j]``."""
    if not 1 <= j <= 5:
        raise ValueError("j must be in 1..5")
    chosen = set(sigma[:j])
    out: list[Tile] = []
    for t in tiles:
        out.extend(children(t) if t.label in chosen else [t])
    return out


def generation(G: int, j: int = 0, sigma: Sequence[int] = PERM_A) -> list[Tile]:
    """Tiling at generation (G, j); (G, 5) is the same as (G + 1, 0)."""
    if j == 5:
        G, j = G + 1, 0
    if G < 0 or not 0 <= j < 5:
        raise ValueError(f"bad generation ({G}, {j})")
    if j and G == 0:
        raise ValueError("partial substitution starts from generation (1, 0)")
    tiles = prototiles()
    for _ in range(G):
        tiles = substitute(tiles)
    if j:
        tiles = partial_substitute(tiles, sigma, j)
    return tiles


def _to_int_coords(tiles: Sequence[Tile]) -> tuple[np.ndarray, int]:
    denom = 1
    for t in tiles:
        for p in t.vertices:
            for c in p:
                denom = denom * c.denominator // math.gcd(denom, c.denominator)
    arr = np.array([[[int(c * denom) for c in p] for p in t.vertices] for t in tiles],
                   dtype=object)
    return arr, denom


def tile_adjacency(tiles: Sequence[Tile]) -> list[tuple[int, int]]:
    """Pairs of tiles sharing a boundary segment of positive length.

    Edges are bucketed by their supporting line (primitive direction and
    integer offset), then overlapping intervals are found by a sweep.
    """
    coords, _ = _to_int_coords(tiles)
    lines: dict[tuple, list[tuple[int, int, int]]] = defaultdict(list)
    for ti in range(len(tiles)):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            (x0, y0), (x1, y1) = coords[ti][a], coords[ti][b]
            dx, dy, offset = _line_key((x0, y0), (x1, y1))
            s0, s1 = dx * x0 + dy * y0, dx * x1 + dy * y1
            lines[(dx, dy, offset)].append((min(s0, s1), max(s0, s1), ti))
    pairs = set()
    for segs in lines.values():
        if len(segs) < 2:
            continue
        segs.sort()
        active: list[tuple[int, int, int]] = []
        for lo, hi, ti in segs:
            active = [s for s in active if s[1] > lo]
            for _, _, tj in active:
                if tj != ti:
                    pairs.add((min(ti, tj), max(ti, tj)))
            active.append((lo, hi, ti))
    return sorted(pairs)


def tiling_vertex_graph(tiles: Sequence[Tile]) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Corner points of the tiling and the boundary segments joining them.

    Tile sides are split at every corner lying on them (the pinwheel tiling
    is not edge-to-edge), so each returned pair is a piece of tile boundary
    with no corner in its interior.
    """
    coords, denom = _to_int_coords(tiles)
    index: dict[tuple[int, int], int] = {}
    lines: dict[tuple, list[tuple[tuple[int, int], tuple[int, int]]]] = defaultdict(list)
    for ti in range(len(tiles)):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            p0, p1 = tuple(coords[ti][a]), tuple(coords[ti][b])
            for p in (p0, p1):
                index.setdefault(p, len(index))
            key = _line_key(p0, p1)
            lines[key].append((p0, p1))
    pairs = set()
    for (dx, dy, _), segs in lines.items():
        ends: dict[int, tuple[int, int]] = {}
        spans = []
        for p0, p1 in segs:
            s0, s1 = dx * p0[0] + dy * p0[1], dx * p1[0] + dy * p1[1]
            ends[s0], ends[s1] = p0, p1
            spans.append((min(s0, s1), max(s0, s1)))
        keys = sorted(ends)
        for lo, hi in zip(keys[:-1], keys[1:]):
            if any(a <= lo and hi <= b for a, b in spans):
                u, v = index[ends[lo]], index[ends[hi]]
                pairs.add((min(u, v), max(u, v)))
    pos = np.zeros((len(index), 2))
    for p, i in index.items():
        pos[i] = (p[0] / denom, p[1] / denom)
    return pos, sorted(pairs)


def _line_key(p0, p1) -> tuple[int, int, int]:
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    g = math.gcd(dx, dy)
    dx, dy = dx // g, dy // g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy, dx * p0[1] - dy * p0[0]


PLACEMENTS = ("vertex", "incenter")


def build_pinwheel_code(tiles: Sequence[Tile], t=DEFAULT_T, placement: str = "vertex",
                        tol: float = 1e-12) -> ClassicalCode:
    """Slead code on a pinwheel tiling, oriented by the half-space direction ``t``.

    With ``placement="vertex"`` spins sit on tiling corners and neighbours
    are joined by tile boundary segments. With ``"incenter"`` there is one
    spin per tile at its incenter and tiles sharing a boundary segment of
    positive length are neighbours. Either way, the check on a spin reads
    itself and the neighbours lying strictly in its positive half-space.
    Neighbour pairs orthogonal to ``t`` (within ``tol``) are left uncoupled.
    """
    t = np.asarray(t, dtype=float)
    if not np.any(t):
        raise ValueError("direction must be nonzero")
    if placement == "vertex":
        pos, pairs = tiling_vertex_graph(tiles)
    elif placement == "incenter":
        pos = np.array([tile.incenter() for tile in tiles])
        pairs = tile_adjacency(tiles)
    else:
        raise ValueError(f"placement must be one of {PLACEMENTS}")
    edges = [(v, v) for v in range(len(pos))]
    for a, b in pairs:
        proj = float((pos[b] - pos[a]) @ t)
        if proj > tol:
            edges.append((b, a))
        elif proj < -tol:
            edges.append((a, b))
    return slead_code(len(pos), edges, positions=pos, t=t)


def sink_corner(t) -> np.ndarray:
    """Corner of the unit square that information flows towards."""
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    proj = corners @ np.asarray(t, dtype=float)
    return corners[int(np.argmin(proj))]


def default_depletion_target(n: int, t=DEFAULT_T, nu: float = DEFAULT_NU) -> np.ndarray:
    """Point at lattice distance L**nu from the sink corner, along the diagonal.

    ``L = sqrt(n)`` and the lattice spacing is ``1/L`` in unit-square
    coordinates.
    """
    corner = sink_corner(t)
    inward = np.array([0.5, 0.5]) - corner
    inward /= np.linalg.norm(inward)
    L = math.sqrt(n)
    dist = min(L ** nu / L, math.sqrt(2.0))
    return corner + dist * inward


def choose_depletion_site(code: ClassicalCode, target=None, nu: float = DEFAULT_NU,
                          candidates: int = 6) -> int:
    """Among the vertices nearest ``target``, the one whose depletion gives
    the heaviest codeword (lowest index on ties)."""
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    s = code.slead
    if s.num_vertices == 1:
        return 0
    if target is None:
        target = default_depletion_target(s.num_vertices, s.direction, nu)
    dist = np.linalg.norm(s.positions - np.asarray(target, dtype=float), axis=1)
    near = sorted(range(s.num_vertices), key=lambda v: (dist[v], v))[:candidates]
    best_v, best_w = None, -1
    for v in sorted(near):
        w = build_codeword(deplete(code, v), v).weight()
        if w > best_w:
            best_v, best_w = v, w
    return best_v


@dataclass
class PinwheelFactor:
    """A depleted pinwheel slead code with its injected codeword."""
    generation: tuple[int, int]
    perm: tuple[int, ...]
    tiles: list[Tile]
    code: ClassicalCode
    site: int
    codeword: object


def pinwheel_factor(G: int, j: int = 0, perm: Sequence[int] | str = "A", t=DEFAULT_T,
                    nu: float = DEFAULT_NU, target=None,
                    placement: str = "vertex") -> PinwheelFactor:
    sigma = PERMS[perm] if isinstance(perm, str) else tuple(perm)
    tiles = generation(G, j, sigma)
    full = build_pinwheel_code(tiles, t, placement)
    site = choose_depletion_site(full, target, nu)
    code = deplete(full, site)
    return PinwheelFactor((G, j), sigma, tiles, code, site, build_codeword(code, site))


def tiling_to_json(tiles: Sequence[Tile]) -> list[dict]:
    return [{"vertices": t.as_floats(), "label": t.label, "path": list(t.path),
             "orientation": t.orientation} for t in tiles]
