"""Hypergraph products of classical codes and generic CSS-code utilities.

Sector convention: sector ``"X"`` is the set of errors detected by ``HX``.
Its logical operators are vectors in ``ker HX`` outside ``rowspace HZ``, and
symmetrically for ``"Z"``. With this convention the X logical of a product
of depleted factors sits on the red qubits ``C1 x {v2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .f2 import (BinaryMatrix, BitVector, hstack, kernel_basis, kron, rank,
                 row_space_contains)
from .slead import ClassicalCode

SECTORS = ("X", "Z")
EXHAUSTIVE_KERNEL_DIM = 26


class BudgetExceeded(RuntimeError):
    pass


class InvalidCodeword(ValueError):
    pass


class NoLogical(ValueError):
    """Raised when a sector encodes nothing."""


@dataclass(frozen=True)
class QubitMeta:
    color: str            # "red" or "blue"
    coords: tuple          # (v1, v2) vertex pair in the factors
    label: int             # index in the uncored product


@dataclass(frozen=True)
class StabMeta:
    sector: str
    coords: tuple
    label: int


@dataclass
class CssCode:
    """CSS code with per-qubit and per-stabilizer metadata.

    ``LX``/``LZ`` hold logical representatives; ``factor_codewords`` keeps the
    classical codewords (C1, C2) when the code came from depleted factors.
    """
    HX: BinaryMatrix
    HZ: BinaryMatrix
    qubit_meta: list[QubitMeta] = field(default_factory=list)
    stabilizer_meta: dict[str, list[StabMeta]] = field(default_factory=dict)
    LX: list[BitVector] = field(default_factory=list)
    LZ: list[BitVector] = field(default_factory=list)
    d_q: Optional[float] = None
    factor_codewords: Optional[tuple[BitVector, BitVector]] = None
    factor_shape: Optional[tuple[int, int, int, int]] = None  # (n1, n2, m1, m2)

    def __post_init__(self):
        if self.HX.cols != self.HZ.cols:
            raise ValueError("HX and HZ act on different qubit counts")
        if not self.qubit_meta:
            self.qubit_meta = [QubitMeta("red", (i,), i) for i in range(self.n_q)]
        if not self.stabilizer_meta:
            self.stabilizer_meta = {
                "X": [StabMeta("X", (j,), j) for j in range(self.HX.rows)],
                "Z": [StabMeta("Z", (j,), j) for j in range(self.HZ.rows)],
            }

    @property
    def n_q(self) -> int:
        return self.HX.cols

    @property
    def k_q(self) -> int:
        return self.n_q - rank(self.HX) - rank(self.HZ)

    def H(self, sector: str) -> BinaryMatrix:
        return {"X": self.HX, "Z": self.HZ}[_check_sector(sector)]

    def H_other(self, sector: str) -> BinaryMatrix:
        return {"X": self.HZ, "Z": self.HX}[_check_sector(sector)]

    def logicals(self, sector: str) -> list[BitVector]:
        return {"X": self.LX, "Z": self.LZ}[_check_sector(sector)]

    def commutes(self) -> bool:
        return (self.HX @ self.HZ.T).is_zero()

    def red_qubits(self) -> list[int]:
        return [i for i, q in enumerate(self.qubit_meta) if q.color == "red"]

    def blue_qubits(self) -> list[int]:
        return [i for i, q in enumerate(self.qubit_meta) if q.color == "blue"]

    def __repr__(self) -> str:
        return f"CssCode(n_q={self.n_q}, mX={self.HX.rows}, mZ={self.HZ.rows})"


def _check_sector(sector: str) -> str:
    if sector not in SECTORS:
        raise ValueError(f"sector must be 'X' or 'Z', got {sector!r}")
    return sector


def logical_basis(H_same: BinaryMatrix, H_other: BinaryMatrix) -> list[BitVector]:
    """Basis of ker(H_same) modulo rowspace(H_other)."""
    basis: list[BitVector] = []
    stack = [H_other.row(i) for i in range(H_other.rows)]
    r = rank(H_other) if H_other.rows else 0
    for v in kernel_basis(H_same):
        trial = BinaryMatrix.from_vectors(stack + [v], H_same.cols)
        r2 = rank(trial)
        if r2 > r:
            stack.append(v)
            basis.append(v)
            r = r2
    return basis


def hypergraph_product(c1: ClassicalCode, c2: ClassicalCode, base_points=None) -> CssCode:
    """Hypergraph product ``HX = [w1 x I | I x w2^T]``, ``HZ = [I x w2 | w1^T x I]``.

    Red qubits ``(v1, v2)`` come first in row-major order, then blue qubits
    ``(c1, c2)`` over check pairs.
    """
    w1, w2 = c1.H, c2.H
    m1, n1 = w1.shape
    m2, n2 = w2.shape
    HX = hstack([kron(w1, BinaryMatrix.identity(n2)), kron(BinaryMatrix.identity(m1), w2.T)])
    HZ = hstack([kron(BinaryMatrix.identity(n1), w2), kron(w1.T, BinaryMatrix.identity(m2))])
    cv1, cv2 = c1.check_vertices, c2.check_vertices
    qmeta = [QubitMeta("red", (a, b), a * n2 + b) for a in range(n1) for b in range(n2)]
    qmeta += [QubitMeta("blue", (cv1[a], cv2[b]), n1 * n2 + a * m2 + b)
              for a in range(m1) for b in range(m2)]
    smeta = {
        "X": [StabMeta("X", (cv1[a], b), a * n2 + b) for a in range(m1) for b in range(n2)],
        "Z": [StabMeta("Z", (a, cv2[b]), a * m2 + b) for a in range(n1) for b in range(m2)],
    }
    code = CssCode(HX, HZ, qmeta, smeta, factor_shape=(n1, n2, m1, m2))
    code.d_q = _product_distance(c1, c2)
    if c1.k == 1 and c2.k == 1 and c1.k_dual == 0 and c2.k_dual == 0:
        C1, C2 = c1.codewords_basis[0], c2.codewords_basis[0]
        v1, v2 = base_points if base_points else (None, None)
        LX, LZ = bare_logicals(code, C1, C2, v1, v2, c1=c1, c2=c2)
        code.LX, code.LZ = [LX], [LZ]
        code.factor_codewords = (C1, C2)
    else:
        code.LX = logical_basis(HX, HZ)
        code.LZ = logical_basis(HZ, HX)
    return code


def _finite(d: Optional[int]) -> float:
    return math.inf if d is None else d


def _product_distance(c1: ClassicalCode, c2: ClassicalCode) -> Optional[float]:
    if c1.k * c2.k + c1.k_dual * c2.k_dual == 0:
        return None
    try:
        vals = [_finite(c1.d), _finite(c2.d), _finite(c1.d_dual), _finite(c2.d_dual)]
    except ValueError:
        return None
    return min(vals)


def bare_logicals(code: CssCode, C1: BitVector, C2: BitVector, v1: Optional[int] = None,
                  v2: Optional[int] = None, c1: Optional[ClassicalCode] = None,
                  c2: Optional[ClassicalCode] = None) -> tuple[BitVector, BitVector]:
    """Bare logicals ``LX = C1 x e_v2`` and ``LZ = e_v1 x C2`` on red qubits.

    Base points default to the lowest-index vertex of each codeword.
    """
    if code.factor_shape is None:
        raise ValueError("bare logicals need a product code")
    n1, n2, _, _ = code.factor_shape
    if C1.n != n1 or C2.n != n2:
        raise InvalidCodeword("codeword lengths do not match the factors")
    for c, C in ((c1, C1), (c2, C2)):
        if c is not None and c.H.mul_vec(C).any():
            raise InvalidCodeword("not a codeword of its factor")
    if not C1.any() or not C2.any():
        raise InvalidCodeword("zero codeword")
    s1, s2 = C1.support(), C2.support()
    v1 = s1[0] if v1 is None else v1
    v2 = s2[0] if v2 is None else v2
    if not C1[v1] or not C2[v2]:
        raise InvalidCodeword("base point outside the codeword support")
    LX = BitVector.from_support(code.n_q, [a * n2 + v2 for a in s1])
    LZ = BitVector.from_support(code.n_q, [v1 * n2 + b for b in s2])
    if code.HX.mul_vec(LX).any() or code.HZ.mul_vec(LZ).any():
        raise InvalidCodeword("codewords do not yield logicals")
    return LX, LZ


def code_params(c: CssCode, budget: int = 10**7) -> tuple[int, int, Optional[float]]:
    """(n_q, k_q, d_q). A stored ``d_q`` is used when present; otherwise the
    distance is searched per sector. ``d_q`` is None when k_q = 0."""
    k = c.k_q
    if k == 0:
        return c.n_q, 0, None
    if c.d_q is not None:
        return c.n_q, k, c.d_q
    d = min(min_logical_weight(c, s, budget=budget) for s in SECTORS)
    return c.n_q, k, d


# minimum-weight logical search -----------------------------------------------

@nb.njit(cache=True)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@nb.njit(cache=True)
def _gray_min_weight(basis, duals):
    K, nw = basis.shape
    cur = np.zeros(nw, dtype=np.uint64)
    best = 1 << 30
    for i in range(1, 1 << K):
        j = 0
        while not (i >> j) & 1:
            j += 1
        w = 0
        for t in range(nw):
            cur[t] ^= basis[j, t]
            w += _popcount64(cur[t])
        if w >= best:
            continue
        for r in range(duals.shape[0]):
            par = np.uint64(0)
            for t in range(nw):
                par ^= cur[t] & duals[r, t]
            if _popcount64(par) & np.uint64(1):
                best = w
                break
    return best


def min_logical_weight(c: CssCode, sector: str, budget: int = 10**7) -> int:
    """Minimum weight of a nontrivial logical in ``sector``.

    Uses a Gray-code sweep over ker(H_sector) when its dimension is at most
    26, else a weight-ordered search capped at ``budget`` candidates.
    Nontriviality is tested through odd overlap with the dual logicals.
    """
    H, Ho = c.H(sector), c.H_other(sector)
    duals = logical_basis(Ho, H)
    if not duals:
        raise NoLogical(f"sector {sector} encodes no logical qubit")
    ker = kernel_basis(H)
    if len(ker) <= EXHAUSTIVE_KERNEL_DIM:
        B = np.stack([v.words for v in ker])
        D = np.stack([v.words for v in duals])
        return int(_gray_min_weight(B, D))
    D = BinaryMatrix.from_vectors(duals, c.n_q)
    tried = 0
    for w in range(1, c.n_q + 1):
        for supp in combinations(range(c.n_q), w):
            tried += 1
            if tried > budget:
                raise BudgetExceeded(f"no logical found within {budget} candidates")
            v = BitVector.from_support(c.n_q, supp)
            if not H.mul_vec(v).any() and D.mul_vec(v).any():
                return w
    raise NoLogical("no logical found")


def is_logical(c: CssCode, sector: str, v: BitVector) -> bool:
    return not c.H(sector).mul_vec(v).any() and not row_space_contains(c.H_other(sector), v)


def symplectic_pairing(c: CssCode) -> np.ndarray:
    """Overlap parities ``LX_i . LZ_j`` as a dense 0/1 matrix."""
    return np.array([[a.dot(b) for b in c.LZ] for a in c.LX], dtype=np.uint8).reshape(len(c.LX), len(c.LZ))


def dressed_logical(c: CssCode, sector: str, rng: np.random.Generator, max_rows: int = 2) -> BitVector:
    """Bare logical of ``sector`` times up to ``max_rows`` random rows of the
    other sector's stabilizers."""
    L = c.logicals(sector)[0]
    Ho = c.H_other(sector)
    if Ho.rows == 0:
        return L
    for j in rng.choice(Ho.rows, size=rng.integers(0, max_rows + 1), replace=True):
        L = L ^ Ho.row(int(j))
    return L


def red_projection(c: CssCode, v: BitVector, axis: int) -> set[int]:
    """Factor vertices (coordinate ``axis``) of the red qubits in supp(v)."""
    return {c.qubit_meta[i].coords[axis] for i in v.support() if c.qubit_meta[i].color == "red"}
