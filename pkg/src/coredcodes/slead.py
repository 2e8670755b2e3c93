"""Self-loop enriched acyclic digraphs (sleads) and the classical codes on them.

Edge ``(u, v)`` means the check on ``v`` reads the spin on ``u``. Every
non-depleted vertex also carries a self-loop: its check reads its own spin.
With a direction ``t``, a check only reaches into its positive half-space,
so ``(x_u - x_v) . t > 0`` for every non-self edge ``(u, v)``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .f2 import BinaryMatrix, BitVector, kernel_basis, rank


class SleadError(ValueError):
    pass


class CycleFound(SleadError):
    def __init__(self, cycle: list[int]):
        self.cycle = cycle
        super().__init__(f"directed cycle through vertices {cycle}")


class MissingSelfLoop(SleadError):
    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has a check but no self-loop")


class HalfSpaceViolation(SleadError):
    def __init__(self, edge: tuple[int, int], projection: float):
        self.edge = edge
        self.projection = projection
        super().__init__(f"edge {edge} has (x_u - x_v).t = {projection:g} <= 0")


class AlreadyDepleted(SleadError):
    pass


class NotDepleted(SleadError):
    pass


@dataclass(frozen=True)
class Slead:
    num_vertices: int
    preds: tuple[tuple[int, ...], ...]
    succs: tuple[tuple[int, ...], ...]
    self_loop: tuple[bool, ...]
    depleted: frozenset[int]
    levels: tuple[int, ...]
    positions: Optional[np.ndarray] = field(default=None, compare=False)
    direction: Optional[np.ndarray] = field(default=None, compare=False)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for v in range(self.num_vertices) for u in self.preds[v]]

    @property
    def sources(self) -> list[int]:
        return [v for v in range(self.num_vertices) if not self.preds[v]]

    @property
    def sinks(self) -> list[int]:
        return [v for v in range(self.num_vertices) if not self.succs[v]]

    @property
    def max_level(self) -> int:
        return max(self.levels, default=0)

    def check_support(self, v: int) -> list[int]:
        """Support of the (original) check on ``v``, self-loop included."""
        return sorted((v, *self.preds[v]))

    @property
    def dimension(self) -> Optional[int]:
        return None if self.positions is None else self.positions.shape[1]


def _find_cycle(n: int, succs: Sequence[Sequence[int]], remaining: set[int]) -> list[int]:
    """Return one directed cycle inside ``remaining`` (vertices Kahn could not peel)."""
    start = min(remaining)
    seen: dict[int, int] = {}
    path: list[int] = []
    v = start
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = next(w for w in succs[v] if w in remaining)
    return path[seen[v]:]


def compute_levels(n: int, preds: Sequence[Sequence[int]],
                   succs: Sequence[Sequence[int]]) -> list[int]:
    """Kahn sweep: sources get level 0, others 1 + max level of predecessors."""
    indeg = [len(p) for p in preds]
    level = [0] * n
    queue = deque(v for v in range(n) if indeg[v] == 0)
    done = 0
    while queue:
        u = queue.popleft()
        done += 1
        for w in succs[u]:
            level[w] = max(level[w], level[u] + 1)
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if done < n:
        remaining = {v for v in range(n) if indeg[v] > 0}
        raise CycleFound(_find_cycle(n, succs, remaining))
    return level


def validate_slead(num_vertices: int, edges: Iterable[tuple[int, int]],
                   positions=None, t=None, depleted: Iterable[int] = (),
                   self_loops: Optional[Iterable[int]] = None) -> Slead:
    """Check the slead conditions and return the validated graph.

    ``edges`` may include self-loops ``(v, v)``. If ``self_loops`` is None,
    the self-loop set is read off ``edges``; otherwise it lists the vertices
    carrying one. Depleted vertices must not carry a self-loop.
    """
    n = num_vertices
    depleted = frozenset(depleted)
    loops: set[int] = set() if self_loops is None else set(self_loops)
    pred_sets: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise SleadError(f"edge {(u, v)} references a missing vertex")
        if u == v:
            loops.add(u)
        else:
            pred_sets[v].add(u)
    for v in range(n):
        if v not in depleted and v not in loops:
            raise MissingSelfLoop(v)
    for u, v in ((u, v) for v in range(n) for u in pred_sets[v]):
        if v in pred_sets[u]:
            raise CycleFound([u, v])

    pos = dirn = None
    if positions is not None:
        pos = np.asarray(positions, dtype=float)
        if pos.shape[0] != n:
            raise SleadError("need one position per vertex")
    if t is not None:
        dirn = np.asarray(t, dtype=float)
        if pos is None:
            raise SleadError("a direction needs vertex positions")
        for v in range(n):
            for u in sorted(pred_sets[v]):
                proj = float((pos[u] - pos[v]) @ dirn)
                if not proj > 0:
                    raise HalfSpaceViolation((u, v), proj)

    preds = tuple(tuple(sorted(p)) for p in pred_sets)
    succ_lists: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for u in preds[v]:
            succ_lists[u].append(v)
    succs = tuple(tuple(s) for s in succ_lists)
    levels = compute_levels(n, preds, succs)
    return Slead(n, preds, succs,
                 tuple(v in loops and v not in depleted for v in range(n)),
                 depleted, tuple(levels), pos, dirn)


def causal_cone(s: Slead, v: int) -> set[int]:
    """All vertices reachable from ``v`` along non-self edges, ``v`` included."""
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in s.succs[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


class ClassicalCode:
    """Linear code given by a parity-check matrix, optionally carried by a slead.

    For slead codes, row ``j`` of ``H`` is the check on ``check_vertices[j]``,
    the j-th non-depleted vertex in index order.
    """

    def __init__(self, H: BinaryMatrix, slead: Optional[Slead] = None,
                 check_vertices: Optional[Sequence[int]] = None):
        self.H = H
        self.slead = slead
        if check_vertices is None:
            check_vertices = range(H.rows)
        self.check_vertices = tuple(check_vertices)

    @classmethod
    def from_slead(cls, s: Slead) -> "ClassicalCode":
        rows = [v for v in range(s.num_vertices) if v not in s.depleted]
        H = BinaryMatrix.from_rows([s.check_support(v) for v in rows], s.num_vertices)
        return cls(H, s, rows)

    @property
    def n(self) -> int:
        return self.H.cols

    @property
    def m(self) -> int:
        return self.H.rows

    @cached_property
    def rank(self) -> int:
        return rank(self.H)

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def k_dual(self) -> int:
        return self.m - self.rank

    @cached_property
    def codewords_basis(self) -> list[BitVector]:
        return kernel_basis(self.H)

    @cached_property
    def d(self) -> Optional[int]:
        """Minimum nonzero codeword weight (None when k = 0)."""
        basis = self.codewords_basis
        if not basis:
            return None
        if len(basis) > 22:
            raise ValueError(f"k = {len(basis)} too large for exhaustive distance")
        return _min_span_weight(basis)

    @cached_property
    def d_dual(self) -> Optional[int]:
        """Minimum distance of the transpose code (None when trivial)."""
        return ClassicalCode(self.H.T).d

    def syndrome(self, x: BitVector) -> BitVector:
        return self.H.mul_vec(x)

    def __repr__(self) -> str:
        return f"ClassicalCode(n={self.n}, m={self.m})"


def _min_span_weight(basis: Sequence[BitVector]) -> int:
    words = np.stack([b.words for b in basis])
    best = None
    # Gray-code walk over all nonzero combinations.
    cur = np.zeros_like(words[0])
    for i in range(1, 1 << len(basis)):
        flip = (i & -i).bit_length() - 1
        cur ^= words[flip]
        w = int(np.bitwise_count(cur).sum())
        if best is None or w < best:
            best = w
    return best


def slead_code(num_vertices: int, edges: Iterable[tuple[int, int]], **kw) -> ClassicalCode:
    """Validate a slead and return its code."""
    return ClassicalCode.from_slead(validate_slead(num_vertices, edges, **kw))


def repetition_chain(n: int, depleted: Iterable[int] = ()) -> ClassicalCode:
    """Chain 0 -> 1 -> ... -> n-1 on the line, optionally with depleted checks."""
    pos = np.arange(n, dtype=float)[:, None]
    edges = [(v, v) for v in range(n)] + [(v, v + 1) for v in range(n - 1)]
    dep = set(depleted)
    edges = [e for e in edges if not (e[0] == e[1] and e[0] in dep)]
    return slead_code(n, edges, positions=pos, t=[-1.0], depleted=dep)


def deplete(code: ClassicalCode, v: int) -> ClassicalCode:
    """Remove the check on ``v`` while keeping its bit."""
    s = code.slead
    if s is None:
        raise SleadError("depletion needs a slead code")
    if v in s.depleted:
        raise AlreadyDepleted(f"vertex {v} is already depleted")
    if not 0 <= v < s.num_vertices:
        raise IndexError(v)
    loops = list(s.self_loop)
    loops[v] = False
    return ClassicalCode.from_slead(replace(s, depleted=s.depleted | {v},
                                            self_loop=tuple(loops)))


def build_codeword(code: ClassicalCode, v_dep: int) -> BitVector:
    """Codeword nucleated at a depleted vertex by a level-ordered sweep."""
    s = code.slead
    if v_dep not in s.depleted:
        raise NotDepleted(f"vertex {v_dep} is not depleted")
    cone = causal_cone(s, v_dep)
    state = np.zeros(s.num_vertices, dtype=np.uint8)
    state[v_dep] = 1
    for u in sorted(cone - {v_dep}, key=lambda w: (s.levels[w], w)):
        if u in s.depleted:
            continue
        parity = 0
        for p in s.preds[u]:
            parity ^= int(state[p])
        if parity:
            state[u] = 1
    return BitVector.from_dense(state)


def stopping_set_check(code: ClassicalCode, C: BitVector) -> bool:
    """True iff ``C`` overlaps every surviving check evenly.

    Checks removed by depletion are exempt.
    """
    if C.n != code.n:
        raise ValueError("length mismatch")
    return not code.H.mul_vec(C).any()


def mediate_edges(code: ClassicalCode, r: float) -> ClassicalCode:
    """Replace non-self edges longer than ``r`` by repetition-code chains.

    New vertices sit evenly on the segment between the endpoints, each with
    a self-loop and a two-body check reading its predecessor in the chain.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    s = code.slead
    if s is None or s.positions is None:
        raise SleadError("mediation needs vertex positions")
    pos = [p for p in s.positions]
    n = s.num_vertices
    edges = [(v, v) for v in range(n) if s.self_loop[v]]
    for u, v in s.edges:
        length = float(np.linalg.norm(s.positions[v] - s.positions[u]))
        q = max(0, math.ceil(length / r - 1e-12) - 1)
        if q == 0:
            edges.append((u, v))
            continue
        chain = [u]
        for i in range(1, q + 1):
            pos.append(s.positions[u] + (s.positions[v] - s.positions[u]) * i / (q + 1))
            chain.append(n)
            edges.append((n, n))
            n += 1
        chain.append(v)
        edges.extend(zip(chain[:-1], chain[1:]))
    return slead_code(n, edges, positions=np.array(pos), t=s.direction,
                      depleted=s.depleted)


def all_levels_below(s: Slead, level: int) -> set[int]:
    return {v for v in range(s.num_vertices) if s.levels[v] < level}


def random_slead(n: int, rng: np.random.Generator, edge_prob: float = 0.3,
                 dim: int = 2) -> Slead:
    """Random geometric slead: random points, edges only along +t.

    Used for property tests; positions are uniform in the unit cube and
    ``t`` is the all-ones direction.
    """
    while True:
        pos = rng.random((n, dim))
        t = np.ones(dim)
        proj = pos @ t
        if len(set(np.round(proj, 12))) == n:
            break
    edges = [(v, v) for v in range(n)]
    for a, b in itertools.permutations(range(n), 2):
        if proj[a] > proj[b] and rng.random() < edge_prob:
            edges.append((a, b))
    return validate_slead(n, edges, positions=pos, t=t)
