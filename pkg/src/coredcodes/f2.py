"""Bit-packed linear algebra over GF(2).

Rows are packed little-endian into ``uint64`` words: column ``j`` of a row
lives in word ``j // 64`` at bit ``j % 64``. Padding bits past ``cols`` in the
last word are always zero, so word-level equality and popcounts are exact.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

WORD = 64


class DimensionMismatch(ValueError):
    pass


def _nwords(n: int) -> int:
    return (n + WORD - 1) // WORD


def _pack(dense: np.ndarray) -> np.ndarray:
    """Pack a 2-D 0/1 array into (rows, nwords) uint64."""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded.reshape(rows, nw, WORD), axis=2, bitorder="little")
    return packed.view("<u8").reshape(rows, nw).astype(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(as_bytes.reshape(rows, -1), axis=1, bitorder="little")
    return bits[:, :cols]


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1)


class BitVector:
    """Immutable packed vector over GF(2)."""

    __slots__ = ("n", "words")

    def __init__(self, n: int, words: np.ndarray):
        words = np.asarray(words, dtype=np.uint64).reshape(_nwords(n))
        words.flags.writeable = False
        self.n = n
        self.words = words

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, np.zeros(_nwords(n), dtype=np.uint64))

    @classmethod
    def from_dense(cls, bits: Iterable[int]) -> "BitVector":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits,
                         dtype=np.uint8).reshape(1, -1)
        return cls(arr.shape[1], _pack(arr)[0])

    @classmethod
    def from_support(cls, n: int, support: Iterable[int]) -> "BitVector":
        dense = np.zeros(n, dtype=np.uint8)
        idx = np.fromiter(support, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise IndexError("support index out of range")
        dense[idx] = 1
        return cls.from_dense(dense)

    @classmethod
    def unit(cls, n: int, i: int) -> "BitVector":
        return cls.from_support(n, [i])

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words.reshape(1, -1), self.n)[0]

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_dense()).tolist()

    def weight(self) -> int:
        return int(_popcount(self.words))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return int((int(self.words[i // WORD]) >> (i % WORD)) & 1)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionMismatch(f"length {self.n} vs {other.n}")
        return BitVector(self.n, self.words ^ other.words)

    __add__ = __xor__

    def __and__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise DimensionMismatch(f"length {self.n} vs {other.n}")
        return BitVector(self.n, self.words & other.words)

    def dot(self, other: "BitVector") -> int:
        return (self & other).weight() & 1

    def any(self) -> bool:
        return bool(self.words.any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.n, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_dense()))})"


class BinaryMatrix:
    """Immutable packed matrix over GF(2), stored row-major."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: Optional[np.ndarray] = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimension")
        nw = _nwords(cols)
        if words is None:
            words = np.zeros((rows, nw), dtype=np.uint64)
        words = np.asarray(words, dtype=np.uint64).reshape(rows, nw)
        if cols % WORD and nw:
            mask = np.uint64((1 << (cols % WORD)) - 1)
            if (words[:, -1] & ~mask).any():
                raise ValueError("nonzero padding bits")
        words.flags.writeable = False
        self.rows = rows
        self.cols = cols
        self.words = words

    # construction ---------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinaryMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BinaryMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense) -> "BinaryMatrix":
        arr = np.asarray(dense, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[int]], cols: int) -> "BinaryMatrix":
        """Build from per-row column supports (duplicates cancel mod 2)."""
        nw = _nwords(cols)
        words = np.zeros((len(rows), nw), dtype=np.uint64)
        for i, support in enumerate(rows):
            for j in support:
                if not 0 <= j < cols:
                    raise IndexError(f"column {j} out of range for {cols} columns")
                words[i, j // WORD] ^= np.uint64(1 << (j % WORD))
        return cls(len(rows), cols, words)

    @classmethod
    def from_vectors(cls, vectors: Sequence[BitVector], cols: Optional[int] = None) -> "BinaryMatrix":
        if not vectors:
            return cls(0, cols or 0)
        n = vectors[0].n
        return cls(len(vectors), n, np.stack([v.words for v in vectors]))

    # views ----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        return _unpack(self.words, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.words[i].copy())

    def row_support(self, i: int) -> list[int]:
        return self.row(i).support()

    def row_supports(self) -> list[list[int]]:
        r, c = _nonzeros(self)
        return _group(r, c, self.rows)

    def col_supports(self) -> list[list[int]]:
        r, c = _nonzeros(self)
        order = np.argsort(c, kind="stable")
        return _group(c[order], r[order], self.cols)

    def row_weights(self) -> np.ndarray:
        return _popcount(self.words) if self.rows else np.zeros(0, dtype=np.int64)

    def col_weights(self) -> np.ndarray:
        return np.bincount(_nonzeros(self)[1], minlength=self.cols)

    @property
    def T(self) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense().T)

    def delete_rows(self, idx: Iterable[int]) -> "BinaryMatrix":
        keep = np.setdiff1d(np.arange(self.rows), np.fromiter(idx, dtype=np.int64))
        return BinaryMatrix(len(keep), self.cols, self.words[keep])

    def select_rows(self, idx: Sequence[int]) -> "BinaryMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return BinaryMatrix(len(idx), self.cols, self.words[idx])

    def select_cols(self, idx: Sequence[int]) -> "BinaryMatrix":
        return BinaryMatrix.from_dense(self.to_dense()[:, np.asarray(idx, dtype=np.int64)])

    def mul_vec(self, v: BitVector) -> BitVector:
        """Return M v over GF(2)."""
        if v.n != self.cols:
            raise DimensionMismatch(f"vector length {v.n} != cols {self.cols}")
        if self.rows == 0:
            return BitVector.zeros(0)
        parity = (_popcount(self.words & v.words[None, :]) & 1).astype(np.uint8)
        return BitVector.from_dense(parity)

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            return self.mul_vec(other)
        return matmul_f2(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.words, other.words))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def is_zero(self) -> bool:
        return not self.words.any()

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols})"


def _nonzeros(M: BinaryMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the set entries, without a dense copy."""
    r, w = np.nonzero(M.words)
    if r.size == 0:
        return r, r
    bits = np.unpackbits(M.words[r, w].astype("<u8").view(np.uint8).reshape(-1, 8),
                         axis=1, bitorder="little")
    i, b = np.nonzero(bits)
    return r[i], w[i] * WORD + b


def _group(keys: np.ndarray, vals: np.ndarray, size: int) -> list[list[int]]:
    """Split ``vals`` by the sorted ``keys`` into ``size`` lists."""
    bounds = np.searchsorted(keys, np.arange(size + 1))
    vals = vals.tolist()
    return [vals[bounds[i]:bounds[i + 1]] for i in range(size)]


def _from_coords(rows: int, cols: int, r: np.ndarray, c: np.ndarray) -> BinaryMatrix:
    words = np.zeros((rows, _nwords(cols)), dtype=np.uint64)
    c = np.asarray(c, dtype=np.int64)
    np.bitwise_xor.at(words, (np.asarray(r, dtype=np.int64), c // WORD),
                      np.left_shift(np.uint64(1), (c % WORD).astype(np.uint64)))
    return BinaryMatrix(rows, cols, words)


def hstack(blocks: Sequence[BinaryMatrix]) -> BinaryMatrix:
    rows = {b.rows for b in blocks}
    if len(rows) != 1:
        raise DimensionMismatch("row counts differ")
    rs, cs, off = [], [], 0
    for b in blocks:
        r, c = _nonzeros(b)
        rs.append(r)
        cs.append(c + off)
        off += b.cols
    return _from_coords(rows.pop(), off, np.concatenate(rs), np.concatenate(cs))


def vstack(blocks: Sequence[BinaryMatrix]) -> BinaryMatrix:
    cols = {b.cols for b in blocks}
    if len(cols) != 1:
        raise DimensionMismatch("column counts differ")
    return BinaryMatrix(sum(b.rows for b in blocks), cols.pop(),
                        np.vstack([b.words for b in blocks]))


# elimination --------------------------------------------------------------

def _rref_words(words: np.ndarray, cols: int, pivot_limit: Optional[int] = None):
    """Reduced row echelon form of packed rows.

    Pivots are chosen column by column, taking the first row (in current
    order) with that bit set, so the result is deterministic.

    Returns (reduced words, pivot column list).
    """
    a = np.array(words, dtype=np.uint64, copy=True)
    m = a.shape[0]
    limit = cols if pivot_limit is None else pivot_limit
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == m:
            break
        w, b = divmod(c, WORD)
        bit = np.uint64(1 << b)
        col_set = (a[r:, w] & bit) != 0
        hits = np.flatnonzero(col_set)
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        rows_with = np.flatnonzero((a[:, w] & bit) != 0)
        rows_with = rows_with[rows_with != r]
        if rows_with.size:
            a[rows_with] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rref(M: BinaryMatrix) -> tuple[BinaryMatrix, list[int]]:
    """Reduced row echelon form; zero rows are dropped."""
    reduced, pivots = _rref_words(M.words, M.cols)
    return BinaryMatrix(len(pivots), M.cols, reduced[: len(pivots)]), pivots


def rank(M: BinaryMatrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(_rref_words(M.words, M.cols)[1])


def kernel_basis(M: BinaryMatrix) -> list[BitVector]:
    """Basis of {v : M v = 0}, one vector per free column of the RREF.

    The vector for free column ``f`` has a 1 at ``f`` and at each pivot
    column whose reduced row contains ``f``.
    """
    n = M.cols
    if M.rows == 0:
        return [BitVector.unit(n, j) for j in range(n)]
    reduced, pivots = _rref_words(M.words, n)
    dense = _unpack(reduced[: len(pivots)], n) if pivots else np.zeros((0, n), np.uint8)
    pivot_set = set(pivots)
    basis = []
    for f in range(n):
        if f in pivot_set:
            continue
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            if dense[i, f]:
                v[p] = 1
        basis.append(BitVector.from_dense(v))
    return basis


def solve(M: BinaryMatrix, b: BitVector) -> Optional[BitVector]:
    """Some x with M x = b, or None if the system is inconsistent.

    Free variables are set to zero.
    """
    if b.n != M.rows:
        raise DimensionMismatch(f"rhs length {b.n} != rows {M.rows}")
    n = M.cols
    if M.rows == 0:
        return BitVector.zeros(n)
    aug = np.hstack([M.to_dense(), b.to_dense()[:, None]])
    reduced, pivots = _rref_words(_pack(aug), n + 1, pivot_limit=n)
    dense = _unpack(reduced, n + 1)
    r = len(pivots)
    if dense[r:, n].any():
        return None
    x = np.zeros(n, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = dense[i, n]
    return BitVector.from_dense(x)


def row_space_contains(M: BinaryMatrix, v: BitVector) -> bool:
    if v.n != M.cols:
        raise DimensionMismatch(f"vector length {v.n} != cols {M.cols}")
    if not v.any():
        return True
    if M.rows == 0:
        return False
    return rank(vstack([M, BinaryMatrix.from_vectors([v])])) == rank(M)


def matmul_f2(A: BinaryMatrix, B: BinaryMatrix) -> BinaryMatrix:
    if A.cols != B.rows:
        raise DimensionMismatch(f"{A.shape} @ {B.shape}")
    if A.rows == 0 or B.cols == 0:
        return BinaryMatrix(A.rows, B.cols)
    prod = (A.to_dense().astype(np.int64) @ B.to_dense().astype(np.int64)) & 1
    return BinaryMatrix.from_dense(prod)


def kron(A: BinaryMatrix, B: BinaryMatrix) -> BinaryMatrix:
    """Kronecker product built from the nonzero entries of both factors."""
    ra, ca = _nonzeros(A)
    rb, cb = _nonzeros(B)
    r = (ra[:, None] * B.rows + rb[None, :]).ravel()
    c = (ca[:, None] * B.cols + cb[None, :]).ravel()
    return _from_coords(A.rows * B.rows, A.cols * B.cols, r, c)


# alist serialization ------------------------------------------------------

def to_alist(M: BinaryMatrix) -> str:
    """Serialize in the alist sparse format (1-indexed, zero padded)."""
    cols = M.col_supports()
    rows = M.row_supports()
    max_c = max((len(c) for c in cols), default=0)
    max_r = max((len(r) for r in rows), default=0)
    lines = [f"{M.cols} {M.rows}", f"{max_c} {max_r}",
             " ".join(str(len(c)) for c in cols),
             " ".join(str(len(r)) for r in rows)]
    for c in cols:
        lines.append(" ".join(str(i + 1) for i in c + [-1] * (max_c - len(c))))
    for r in rows:
        lines.append(" ".join(str(j + 1) for j in r + [-1] * (max_r - len(r))))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> BinaryMatrix:
    tokens = [int(t) for t in text.split()]
    it = iter(tokens)
    n, m = next(it), next(it)
    max_c, max_r = next(it), next(it)
    col_deg = [next(it) for _ in range(n)]
    row_deg = [next(it) for _ in range(m)]
    for _ in range(n):
        for _ in range(max_c):
            next(it)
    rows = []
    for i in range(m):
        entries = [next(it) for _ in range(max_r)]
        support = [j - 1 for j in entries if j > 0]
        if len(support) != row_deg[i]:
            raise ValueError(f"row {i}: degree {row_deg[i]} but {len(support)} entries")
        rows.append(support)
    M = BinaryMatrix.from_rows(rows, n)
    if list(M.col_weights()) != col_deg and n:
        raise ValueError("column degrees inconsistent with row lists")
    return M
