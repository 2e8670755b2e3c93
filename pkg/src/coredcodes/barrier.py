"""Energy barriers of codewords under single-spin-flip walks.

Energy is the syndrome weight ``|H w|``. All searches flip each spin of the
codeword support exactly once (minimal walks), so states are subsets of the
support. Flipping spin ``i`` changes the energy by the sum over its checks of
``1 - 2 e_c``, which keeps every step proportional to the column weight.
"""

from __future__ import annotations

import math
from typing import Union

import numba as nb
import numpy as np
from numba import types
from numba.typed import Dict

from .f2 import BinaryMatrix, BitVector
from .slead import ClassicalCode

SATURATE = (1 << 63) - 1
DEFAULT_BEAM = 100_000
EXACT_LIMIT = 20


class NotACodeword(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def _as_matrix(code: Union[ClassicalCode, BinaryMatrix]) -> BinaryMatrix:
    return code.H if isinstance(code, ClassicalCode) else code


def _restrict(H: BinaryMatrix, C: BitVector):
    """Columns of ``H`` on supp(C), as CSR over the checks they touch."""
    if C.n != H.cols:
        raise ValueError("codeword length does not match the code")
    if H.mul_vec(C).any():
        raise NotACodeword("H C != 0")
    support = C.support()
    dense = H.to_dense()[:, support]
    touched = np.flatnonzero(dense.any(axis=1))
    sub = dense[touched]
    ptr = np.zeros(len(support) + 1, dtype=np.int64)
    idx: list[int] = []
    for i in range(len(support)):
        rows = np.flatnonzero(sub[:, i])
        idx.extend(rows.tolist())
        ptr[i + 1] = len(idx)
    return support, len(touched), ptr, np.asarray(idx, dtype=np.int64)


def walk_energies(code, C: BitVector, order) -> list[int]:
    """Energy after each flip when the support is flipped in ``order``."""
    H = _as_matrix(code)
    w = np.zeros(H.cols, dtype=np.uint8)
    dense = H.to_dense().astype(np.int64)
    out = []
    for q in order:
        w[q] ^= 1
        out.append(int(((dense @ w) & 1).sum()))
    return out


# greedy frontier search ------------------------------------------------------

@nb.njit(cache=True)
def _greedy_kernel(ptr, idx, d, m, beam, full_start, zobrist):
    nwd = (d + 63) >> 6
    nwm = (m + 63) >> 6
    cap = max(4 * beam, 1024)

    # frontier storage
    fl = np.zeros((cap, nwd), dtype=np.uint64)
    sy = np.zeros((cap, nwm), dtype=np.uint64)
    en = np.zeros(cap, dtype=np.int64)
    bar = np.zeros(cap, dtype=np.int64)
    hs = np.zeros(cap, dtype=np.uint64)
    nf = 0
    if full_start:
        for i in range(d):
            e = 0
            for k in range(ptr[i], ptr[i + 1]):
                c = idx[k]
                sy[nf, c >> 6] ^= np.uint64(1) << np.uint64(c & 63)
                e += 1
            fl[nf, i >> 6] |= np.uint64(1) << np.uint64(i & 63)
            en[nf] = e
            bar[nf] = e
            hs[nf] = zobrist[i]
            nf += 1
        start_level = 1
    else:
        nf = 1
        start_level = 0
    paths = np.ones(cap, dtype=np.float64)

    nfl = np.zeros((cap, nwd), dtype=np.uint64)
    nsy = np.zeros((cap, nwm), dtype=np.uint64)
    nen = np.zeros(cap, dtype=np.int64)
    nbar = np.zeros(cap, dtype=np.int64)
    nhs = np.zeros(cap, dtype=np.uint64)
    npaths = np.zeros(cap, dtype=np.float64)
    delta = np.zeros(d, dtype=np.int64)
    peak = nf

    for level in range(start_level, d):
        lookup = Dict.empty(key_type=types.uint64, value_type=types.int64)
        nn = 0
        for s in range(nf):
            best = 1 << 40
            for i in range(d):
                if (fl[s, i >> 6] >> np.uint64(i & 63)) & np.uint64(1):
                    delta[i] = 1 << 40
                    continue
                dl = 0
                for k in range(ptr[i], ptr[i + 1]):
                    c = idx[k]
                    bit = (sy[s, c >> 6] >> np.uint64(c & 63)) & np.uint64(1)
                    dl += 1 - 2 * np.int64(bit)
                delta[i] = dl
                if dl < best:
                    best = dl
            new_e = en[s] + best
            new_b = max(bar[s], new_e)
            for i in range(d):
                if delta[i] != best:
                    continue
                h = hs[s] ^ zobrist[i]
                if h in lookup:
                    j = lookup[h]
                    if new_b < nbar[j]:
                        nbar[j] = new_b
                    npaths[j] += paths[s]
                    continue
                if nn == cap:
                    # prune to the best `beam` entries by barrier, then continue
                    order = np.argsort(nbar[:nn], kind="mergesort")[:beam]
                    nfl[:beam] = nfl[order]
                    nsy[:beam] = nsy[order]
                    nen[:beam] = nen[order]
                    nbar[:beam] = nbar[order]
                    nhs[:beam] = nhs[order]
                    npaths[:beam] = npaths[order]
                    nn = beam
                    lookup = Dict.empty(key_type=types.uint64, value_type=types.int64)
                    for j in range(nn):
                        lookup[nhs[j]] = j
                nfl[nn] = fl[s]
                nfl[nn, i >> 6] |= np.uint64(1) << np.uint64(i & 63)
                nsy[nn] = sy[s]
                for k in range(ptr[i], ptr[i + 1]):
                    c = idx[k]
                    nsy[nn, c >> 6] ^= np.uint64(1) << np.uint64(c & 63)
                nen[nn] = new_e
                nbar[nn] = new_b
                nhs[nn] = h
                npaths[nn] = paths[s]
                lookup[h] = nn
                nn += 1
        if nn > beam:
            order = np.argsort(nbar[:nn], kind="mergesort")[:beam]
        else:
            order = np.arange(nn)
        nf = len(order)
        for j in range(nf):
            o = order[j]
            fl[j] = nfl[o]
            sy[j] = nsy[o]
            en[j] = nen[o]
            bar[j] = nbar[o]
            hs[j] = nhs[o]
            paths[j] = npaths[o]
        if nf > peak:
            peak = nf
    result = bar[0]
    for s in range(nf):
        if bar[s] < result:
            result = bar[s]
    return result, peak


def greedy_barrier_bound(code, C: BitVector, beam: int = DEFAULT_BEAM,
                         full_start: bool = False, seed: int = 0,
                         return_stats: bool = False):
    """Upper bound on the energy barrier of codeword ``C`` by greedy search.

    From each frontier state only the successors of least energy are kept;
    identical states reached along different histories are merged, and the
    frontier is capped at ``beam`` entries of lowest running barrier.
    ``full_start`` seeds the frontier with every single flip instead of the
    empty state.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    H = _as_matrix(code)
    support, m, ptr, idx = _restrict(H, C)
    d = len(support)
    if d == 0:
        return (0, {"peak_frontier": 1}) if return_stats else 0
    zob = np.random.default_rng(seed).integers(0, 2**63, size=d, dtype=np.uint64) * np.uint64(2) + np.uint64(1)
    result, peak = _greedy_kernel(ptr, idx, d, m, int(beam), bool(full_start), zob)
    if return_stats:
        return int(result), {"peak_frontier": int(peak)}
    return int(result)


# exact search on small supports ---------------------------------------------

def _subset_energies(H: BinaryMatrix, C: BitVector) -> tuple[np.ndarray, int]:
    support, m, ptr, idx = _restrict(H, C)
    d = len(support)
    if d > EXACT_LIMIT:
        raise BudgetExceeded(f"|supp(C)| = {d} exceeds {EXACT_LIMIT}")
    nw = max(1, (m + 63) // 64)
    cols = np.zeros((d, nw), dtype=np.uint64)
    for i in range(d):
        for c in idx[ptr[i]:ptr[i + 1]]:
            cols[i, c // 64] ^= np.uint64(1 << (c % 64))
    syn = np.zeros((1 << d, nw), dtype=np.uint64)
    for b in range(d):
        syn[1 << b: 1 << (b + 1)] = syn[: 1 << b] ^ cols[b]
    energy = np.bitwise_count(syn).sum(axis=1).astype(np.int64)
    return energy, d


def _popcount_layers(d: int) -> list[np.ndarray]:
    states = np.arange(1 << d, dtype=np.int64)
    pc = np.bitwise_count(states.astype(np.uint64)).astype(np.int64)
    return [states[pc == k] for k in range(d + 1)]


def exact_barrier(code, C: BitVector) -> int:
    """Exact minimax energy over all orderings of supp(C).

    Bottleneck dynamic program over the sub-hypercube: each subset keeps the
    best achievable running maximum among walks reaching it.
    """
    energy, d = _subset_energies(_as_matrix(code), C)
    best = np.full(1 << d, np.iinfo(np.int64).max, dtype=np.int64)
    best[0] = 0
    for layer in _popcount_layers(d)[1:]:
        cand = np.full(len(layer), np.iinfo(np.int64).max, dtype=np.int64)
        for b in range(d):
            has = (layer >> b) & 1 == 1
            cand[has] = np.minimum(cand[has], best[layer[has] ^ (1 << b)])
        best[layer] = np.maximum(cand, energy[layer])
    return int(best[(1 << d) - 1])


def path_multiplicity(code, C: BitVector, energy_cap: int) -> int:
    """Number of orderings of supp(C) whose energy never exceeds ``energy_cap``.

    Saturates at 2**63 - 1.
    """
    energy, d = _subset_energies(_as_matrix(code), C)
    count = np.zeros(1 << d, dtype=np.uint64)
    count[0] = 1 if energy[0] <= energy_cap else 0
    sat = np.uint64(SATURATE)
    for layer in _popcount_layers(d)[1:]:
        acc = np.zeros(len(layer), dtype=np.uint64)
        for b in range(d):
            has = (layer >> b) & 1 == 1
            add = count[layer[has] ^ (1 << b)]
            s = acc[has] + add
            over = (s < add) | (s > sat)
            s[over] = sat
            acc[has] = s
        acc[energy[layer] > energy_cap] = 0
        count[layer] = acc
    return int(count[(1 << d) - 1])


def newman_moore(L: int) -> BinaryMatrix:
    """Periodic Newman-Moore checks f = 1 + x + y on an L x L torus.

    Spin (x, y) has index ``x * L + y``; the check at (x, y) reads
    (x, y), (x + 1, y) and (x, y + 1).
    """
    rows = [[((x + dx) % L) * L + (y + dy) % L for dx, dy in ((0, 0), (1, 0), (0, 1))]
            for x in range(L) for y in range(L)]
    return BinaryMatrix.from_rows(rows, L * L)


def newman_moore_codeword(L: int) -> BitVector:
    """Sierpinski codeword seeded by the row (1 + x).

    Row y is (1 + x)^(y + 1) mod (x^L - 1). It closes periodically whenever
    the seed has even weight and L = 2^k - 1.
    """
    row = np.zeros(L, dtype=np.uint8)
    row[0] = row[1 % L] = 1
    grid = np.zeros((L, L), dtype=np.uint8)
    for y in range(L):
        grid[:, y] = row
        row = row ^ np.roll(row, -1)
    C = BitVector.from_dense(grid.reshape(-1))
    if newman_moore(L).mul_vec(C).any():
        raise NotACodeword(f"seed does not close for L = {L}")
    return C


def log_bound_ok(sizes, bounds, c: float | None = None) -> bool:
    """True if bounds never outgrow ``c * log2(L + 1)``; ``c`` defaults to the
    ratio at the smallest size."""
    ratio = [b / math.log2(L + 1) for L, b in zip(sizes, bounds)]
    c = ratio[0] if c is None else c
    return all(r <= c + 1e-12 for r in ratio)
