"""Rejection-free kinetic Monte Carlo for one CSS sector.

Each qubit flip is a transition with energy change ``Delta_q`` (in units of
violated checks) and detailed-balance rate ``p(Delta_q)``. Time advances by
an exponential draw with the total rate, then a transition is picked in
proportion to its rate.

Two layers live here:

* Python reference code: three rate trackers (array, Fenwick, binning) and
  the naive and sparse step loops. These accept an injected decision stream
  and keep operation counters, and serve as oracles in tests.
* A numba kernel (:class:`KmcSimulator`) implementing the
  sparse loop with any of the three trackers for production runs.

Total rates in the reference runners are exact (correctly rounded sums), so
independent trackers produce bit-identical clocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numba as nb
import numpy as np

from .f2 import BinaryMatrix, BitVector

METROPOLIS = "metropolis"
GLAUBER = "glauber"
DYNAMICS = (METROPOLIS, GLAUBER)
TRACKERS = ("array", "fenwick", "binning")
RESYNC_INTERVAL = 1 << 20
_MASK64 = (1 << 64) - 1


class EmptyTracker(RuntimeError):
    pass


# rates ---------------------------------------------------------------------

def rate(delta: float, beta: float, dynamics: str = METROPOLIS) -> float:
    """Detailed-balance flip rate for an energy change ``delta``."""
    if dynamics == METROPOLIS:
        return 1.0 if delta <= 0 else math.exp(-beta * delta)
    if dynamics == GLAUBER:
        # (1 - tanh(x/2)) / 2 written as a logistic to avoid cancellation
        x = beta * delta
        if x >= 0:
            z = math.exp(-x)
            return z / (1.0 + z)
        return 1.0 / (1.0 + math.exp(x))
    raise ValueError(f"unknown dynamics {dynamics!r}")


def rate_table(s: int, beta: float, dynamics: str = METROPOLIS) -> np.ndarray:
    """Rates for integer ``delta`` in ``[-s, s]``; entry ``delta + s``."""
    return np.array([rate(d, beta, dynamics) for d in range(-s, s + 1)], dtype=np.float64)


# random numbers -------------------------------------------------------------

class SplitMix64:
    """Counter-based 64-bit generator (Steele, Lea and Flood)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def shot_seed(seed: int, shot: int) -> int:
    """Per-shot stream seed ``seed XOR shot`` (64-bit)."""
    return (seed ^ shot) & _MASK64


def _exact_scaled(count: int, p: float) -> list[float]:
    """Terms whose exact sum is ``count * p`` (binary expansion of count)."""
    out, k = [], 0
    while count:
        if count & 1:
            out.append(math.ldexp(p, k))
        count >>= 1
        k += 1
    return out


# model ------------------------------------------------------------------------

class SectorModel:
    """Sparse adjacency of one sector's check matrix.

    Attributes ``q_ptr/q_idx`` list the checks I_q on each qubit,
    ``c_ptr/c_idx`` the qubits of each check and ``n_ptr/n_idx`` the
    stabilizer-connected neighbours N_q (excluding q).
    """

    def __init__(self, H: BinaryMatrix):
        self.H = H
        self.m, self.n = H.shape
        cols = H.col_supports()
        rows = H.row_supports()
        self.q_ptr, self.q_idx = _csr(cols)
        self.c_ptr, self.c_idx = _csr(rows)
        neigh = []
        for q in range(self.n):
            nb_set = set()
            for u in cols[q]:
                nb_set.update(rows[u])
            nb_set.discard(q)
            neigh.append(sorted(nb_set))
        self.n_ptr, self.n_idx = _csr(neigh)
        self.degrees = np.diff(self.q_ptr)
        max_row = max((len(r) for r in rows), default=0)
        max_col = int(self.degrees.max()) if self.n else 0
        self.s = max(max_row, max_col, 1)

    def checks(self, q: int) -> np.ndarray:
        return self.q_idx[self.q_ptr[q]:self.q_ptr[q + 1]]

    def neighbours(self, q: int) -> np.ndarray:
        return self.n_idx[self.n_ptr[q]:self.n_ptr[q + 1]]

    def syndrome(self, w: np.ndarray) -> np.ndarray:
        return self.H.mul_vec(BitVector.from_dense(w)).to_dense()


def _csr(lists: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(lists) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in lists])
    idx = np.fromiter((v for x in lists for v in x), dtype=np.int64, count=int(ptr[-1]))
    return ptr, idx


@dataclass
class KmcState:
    w: np.ndarray
    e: np.ndarray
    E: int = 0
    t: float = 0.0
    steps: int = 0

    @classmethod
    def ground(cls, model: SectorModel) -> "KmcState":
        return cls(np.zeros(model.n, dtype=np.uint8), np.zeros(model.m, dtype=np.uint8))

    def error_density(self) -> float:
        return float(self.w.mean()) if len(self.w) else 0.0


# reference trackers ---------------------------------------------------------

class ArrayTracker:
    """Flat array of rates with a linear-scan sampler."""

    def __init__(self, n: int, s: int, beta: float, dynamics: str = METROPOLIS):
        self.s = s
        self.table = rate_table(s, beta, dynamics)
        self.deltas = np.zeros(n, dtype=np.int64)
        self.r = np.zeros(n)
        self.R = 0.0
        self.touches = 0

    def init(self, deltas: Iterable[int]) -> None:
        self.r[:] = 0.0
        self.R = 0.0
        for q, d in enumerate(deltas):
            self.update(q, int(d))

    def update(self, q: int, delta: int) -> None:
        self.touches += 1
        self.R -= self.r[q]
        self.deltas[q] = delta
        self.r[q] = self.table[delta + self.s]
        self.R += self.r[q]

    def total(self) -> float:
        return self.R

    def exact_total(self) -> float:
        return math.fsum(self.r)

    def sample(self, u: float) -> int:
        target = u * self.R
        if not self.R > 0:
            raise EmptyTracker("total rate is zero")
        cur = 0.0
        for q in range(len(self.r)):
            cur += self.r[q]
            if target <= cur and self.r[q] > 0:
                return q
        return int(np.flatnonzero(self.r)[-1])

    def resync(self) -> float:
        fresh = self.exact_total()
        drift = abs(self.R - fresh) / fresh if fresh else abs(self.R)
        self.R = fresh
        return drift

    def probabilities(self) -> np.ndarray:
        return self.r / self.r.sum()


class FenwickTracker(ArrayTracker):
    """Binary indexed tree over rates: O(log n) update and prefix search."""

    def __init__(self, n: int, s: int, beta: float, dynamics: str = METROPOLIS):
        super().__init__(n, s, beta, dynamics)
        self.tree = np.zeros(n + 1)
        self.top = 1 << (max(n, 1).bit_length() - 1)

    def init(self, deltas: Iterable[int]) -> None:
        self.tree[:] = 0.0
        super().init(deltas)

    def update(self, q: int, delta: int) -> None:
        old = self.r[q]
        super().update(q, delta)
        diff = self.r[q] - old
        i = q + 1
        while i < len(self.tree):
            self.tree[i] += diff
            i += i & -i
            self.touches += 1

    def sample(self, u: float) -> int:
        if not self.R > 0:
            raise EmptyTracker("total rate is zero")
        target = u * self.R
        pos, step = 0, self.top
        n = len(self.r)
        while step:
            nxt = pos + step
            if nxt <= n and self.tree[nxt] < target:
                pos = nxt
                target -= self.tree[nxt]
            step >>= 1
        return min(pos, n - 1)

    def resync(self) -> float:
        drift = super().resync()
        self.tree[1:] = self.r
        n = len(self.r)
        for i in range(1, n + 1):
            j = i + (i & -i)
            if j <= n:
                self.tree[j] += self.tree[i]
        return drift


class BinningTracker:
    """Transitions grouped by integer energy change.

    ``bins[b]`` lists the transitions with ``Delta = b - s``; ``locations[q]``
    is the position of q inside its bin. Removal swaps with the back entry.
    """

    def __init__(self, n: int, s: int, beta: float, dynamics: str = METROPOLIS):
        self.s = s
        self.table = rate_table(s, beta, dynamics)
        self.energies = np.zeros(n, dtype=np.int64)
        self.locations = np.zeros(n, dtype=np.int64)
        self.bins: list[list[int]] = [[] for _ in range(2 * s + 1)]
        self.r = np.zeros(2 * s + 1)
        self.R = 0.0
        self.touches = 0
        self._present = np.zeros(n, dtype=bool)

    def init(self, deltas: Iterable[int]) -> None:
        self.bins = [[] for _ in range(2 * self.s + 1)]
        self.r[:] = 0.0
        self.R = 0.0
        self._present[:] = False
        for q, d in enumerate(deltas):
            self._add(q, int(d))

    def _add(self, q: int, delta: int) -> None:
        b = delta + self.s
        self.energies[q] = delta
        self.locations[q] = len(self.bins[b])
        self.bins[b].append(q)
        p = self.table[b]
        self.r[b] += p
        self.R += p
        self._present[q] = True
        self.touches += 1

    def _remove(self, q: int) -> None:
        b = self.energies[q] + self.s
        tail = self.bins[b]
        if len(tail) > 1:
            last = tail[-1]
            loc = self.locations[q]
            self.locations[last] = loc
            tail[loc] = last
        tail.pop()
        p = self.table[b]
        self.r[b] -= p
        self.R -= p
        self._present[q] = False
        self.touches += 1

    def update(self, q: int, delta: int) -> None:
        if self._present[q]:
            self._remove(q)
        self._add(q, delta)

    @property
    def deltas(self) -> np.ndarray:
        return self.energies

    def total(self) -> float:
        return self.R

    def exact_total(self) -> float:
        terms = []
        for b, members in enumerate(self.bins):
            terms.extend(_exact_scaled(len(members), self.table[b]))
        return math.fsum(terms)

    def sample(self, u: float) -> int:
        if not self.R > 0:
            raise EmptyTracker("total rate is zero")
        target = u * self.R
        cur = 0.0
        last = -1
        for b in range(len(self.bins)):
            if not self.bins[b]:
                continue
            last = b
            if target <= cur + self.r[b]:
                k = int((target - cur) / self.table[b])
                return self.bins[b][min(max(k, 0), len(self.bins[b]) - 1)]
            cur += self.r[b]
        return self.bins[last][-1]

    def resync(self) -> float:
        fresh = self.exact_total()
        drift = abs(self.R - fresh) / fresh if fresh else abs(self.R)
        for b, members in enumerate(self.bins):
            self.r[b] = len(members) * self.table[b]
        self.R = fresh
        return drift

    def probabilities(self) -> np.ndarray:
        p = self.table[self.energies + self.s]
        return p / p.sum()


def make_tracker(kind: str, n: int, s: int, beta: float, dynamics: str = METROPOLIS):
    cls = {"array": ArrayTracker, "fenwick": FenwickTracker, "binning": BinningTracker}.get(kind)
    if cls is None:
        raise ValueError(f"unknown tracker {kind!r}")
    return cls(n, s, beta, dynamics)


# reference step loops -------------------------------------------------------

@dataclass
class OpCounter:
    steps: int = 0
    syndrome_touches: int = 0
    delta_reads: int = 0
    tracker_updates: int = 0
    per_step_max: int = 0

    def per_step(self) -> float:
        total = self.syndrome_touches + self.delta_reads + self.tracker_updates
        return total / max(self.steps, 1)


class DecisionStream:
    """Source of (time uniform, transition choice) pairs.

    With ``injected`` the transitions are read verbatim; otherwise they are
    drawn from the tracker with a seeded generator.
    """

    def __init__(self, seed: int = 0, injected: Optional[Sequence[tuple[float, int]]] = None):
        self.rng = SplitMix64(seed)
        self.injected = list(injected) if injected is not None else None
        self.pos = 0

    def next(self, tracker) -> tuple[float, int]:
        if self.injected is not None:
            u_t, q = self.injected[self.pos]
            self.pos += 1
            return float(u_t), int(q)
        u_t = 1.0 - self.rng.uniform()
        return u_t, tracker.sample(self.rng.uniform())

    def exhausted(self) -> bool:
        return self.injected is not None and self.pos >= len(self.injected)


def _energy(model: SectorModel, w: np.ndarray) -> tuple[np.ndarray, int]:
    e = model.syndrome(w)
    return e, int(e.sum())


def run_naive(model: SectorModel, beta: float, T_target: float = math.inf,
              max_steps: Optional[int] = None, dynamics: str = METROPOLIS,
              stream: Optional[DecisionStream] = None, tracker: str = "array",
              exact_rates: bool = True) -> KmcState:
    """Dense reference loop: recompute the syndrome and every transition's
    energy change from scratch after each flip."""
    stream = stream or DecisionStream()
    st = KmcState.ground(model)
    tr = make_tracker(tracker, model.n, model.s, beta, dynamics)
    tr.init(np.asarray(model.H.col_weights(), dtype=np.int64))
    while st.t < T_target and (max_steps is None or st.steps < max_steps):
        if stream.exhausted():
            break
        R = tr.exact_total() if exact_rates else tr.total()
        u_t, q = stream.next(tr)
        st.t += math.log(1.0 / u_t) / R
        st.w[q] ^= 1
        st.e, st.E = _energy(model, st.w)
        for p in range(model.n):
            w2 = st.w.copy()
            w2[p] ^= 1
            _, E2 = _energy(model, w2)
            tr.update(p, E2 - st.E)
        st.steps += 1
    return st


def run_sparse(model: SectorModel, beta: float, T_target: float = math.inf,
               max_steps: Optional[int] = None, dynamics: str = METROPOLIS,
               stream: Optional[DecisionStream] = None, tracker: str = "binning",
               exact_rates: bool = True, counter: Optional[OpCounter] = None,
               check_every: int = 0) -> KmcState:
    """Sparse reference loop touching only I_q and N_q after a flip.

    ``check_every > 0`` asserts ``e = H w`` and ``E = |e|`` at that period.
    """
    stream = stream or DecisionStream()
    counter = counter if counter is not None else OpCounter()
    st = KmcState.ground(model)
    tr = make_tracker(tracker, model.n, model.s, beta, dynamics)
    tr.init(model.degrees)
    qp, qi, npt, ni = model.q_ptr, model.q_idx, model.n_ptr, model.n_idx
    while st.t < T_target and (max_steps is None or st.steps < max_steps):
        if stream.exhausted():
            break
        R = tr.exact_total() if exact_rates else tr.total()
        u_t, q = stream.next(tr)
        st.t += math.log(1.0 / u_t) / R
        st.w[q] ^= 1
        touches = 0
        for u in qi[qp[q]:qp[q + 1]]:
            st.E += 1 - 2 * int(st.e[u])
            st.e[u] ^= 1
            touches += 1
        # q itself: its own energy change flips sign
        tr.update(q, -int(tr.deltas[q]))
        updates = 1
        for p in ni[npt[q]:npt[q + 1]]:
            d = 0
            for v in qi[qp[p]:qp[p + 1]]:
                d += 1 - 2 * int(st.e[v])
                touches += 1
            tr.update(int(p), d)
            updates += 1
        st.steps += 1
        counter.steps += 1
        counter.syndrome_touches += touches
        counter.tracker_updates += updates
        counter.per_step_max = max(counter.per_step_max, touches + updates)
        if check_every and st.steps % check_every == 0:
            e, E = _energy(model, st.w)
            assert np.array_equal(e, st.e) and E == st.E, "syndrome bookkeeping drifted"
    return st


# numba fast path ------------------------------------------------------------

@nb.njit(cache=True, inline="always")
def _splitmix(rng):
    rng[0] += np.uint64(0x9E3779B97F4A7C15)
    z = rng[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True, inline="always")
def _uniform(rng):
    return np.float64(_splitmix(rng) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True, inline="always")
def _bin_move(q, d, s, tab, delta, bins, counts, loc, sub):
    """Move transition q from its bin to the bin of energy change d.

    Returns the change in total rate."""
    b = delta[q] + s
    last_i = counts[b] - 1
    last = bins[b, last_i]
    l = loc[q]
    bins[b, l] = last
    loc[last] = l
    counts[b] = last_i
    sub[b] -= tab[b]
    b2 = d + s
    loc[q] = counts[b2]
    bins[b2, counts[b2]] = q
    counts[b2] += 1
    sub[b2] += tab[b2]
    delta[q] = d
    return tab[b2] - tab[b]


@nb.njit(cache=True, inline="always")
def _rate_move(kind, q, d, s, tab, delta, rates, tree):
    """Array/Fenwick update of transition q; returns the change in total rate."""
    new = tab[d + s]
    diff = new - rates[q]
    rates[q] = new
    delta[q] = d
    if kind == 1:
        n = rates.shape[0]
        i = q + 1
        while i <= n:
            tree[i] += diff
            i += i & (-i)
    return diff


@nb.njit(cache=True, inline="always")
def _bin_sample(u, R, s, tab, bins, counts, sub):
    target = u * R
    cur = 0.0
    last = -1
    for b in range(2 * s + 1):
        c = counts[b]
        if c == 0:
            continue
        last = b
        if target <= cur + sub[b]:
            k = np.int64((target - cur) / tab[b])
            if k >= c:
                k = c - 1
            if k < 0:
                k = 0
            return bins[b, k]
        cur += sub[b]
    return bins[last, counts[last] - 1]


@nb.njit(cache=True, inline="always")
def _rate_sample(kind, u, R, rates, tree, top):
    target = u * R
    n = rates.shape[0]
    if kind == 1:
        pos = 0
        step = top
        while step > 0:
            nxt = pos + step
            if nxt <= n and tree[nxt] < target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        if pos >= n:
            pos = n - 1
        return pos
    cur = 0.0
    for q in range(n):
        cur += rates[q]
        if target <= cur:
            return q
    return n - 1


@nb.njit(cache=True)
def _tracker_resync(kind, s, tab, rates, tree, counts, sub, fR):
    old = fR[1]
    tot = 0.0
    if kind == 2:
        for b in range(2 * s + 1):
            sub[b] = counts[b] * tab[b]
            tot += sub[b]
    else:
        n = rates.shape[0]
        for q in range(n):
            tot += rates[q]
        if kind == 1:
            for i in range(1, n + 1):
                tree[i] = rates[i - 1]
            for i in range(1, n + 1):
                j = i + (i & (-i))
                if j <= n:
                    tree[j] += tree[i]
    fR[1] = tot
    if tot > 0:
        return abs(old - tot) / tot
    return abs(old)


@nb.njit(cache=True)
def _run_kernel(kind, qp, qi, npt, ni, tab, s, w, e, iE, fR, delta, rates, tree, top,
                bins, counts, loc, sub, rng, T_target, max_steps, apply_crossing,
                resync_every, occ, code):
    """Advance the state in place. fR = [t, R, max drift]; iE = [E, steps]."""
    track = occ.shape[0] > 0
    t = fR[0]
    R = fR[1]
    E = iE[0]
    steps = iE[1]
    state = code[0]
    taken = 0
    while t < T_target and taken < max_steps:
        u_t = 1.0 - _uniform(rng)
        dt = np.log(1.0 / u_t) / R
        if not apply_crossing and t + dt >= T_target:
            # memoryless clock: stop exactly at the target, discard the draw
            if track:
                occ[state] += T_target - t
            t = T_target
            break
        if track:
            occ[state] += dt
        t += dt
        u = _uniform(rng)
        if kind == 2:
            q = _bin_sample(u, R, s, tab, bins, counts, sub)
        else:
            q = _rate_sample(kind, u, R, rates, tree, top)
        w[q] ^= 1
        if track:
            state ^= np.int64(1) << q
        for k in range(qp[q], qp[q + 1]):
            c = qi[k]
            E += 1 - 2 * np.int64(e[c])
            e[c] ^= 1
        if kind == 2:
            R += _bin_move(q, -delta[q], s, tab, delta, bins, counts, loc, sub)
        else:
            R += _rate_move(kind, q, -delta[q], s, tab, delta, rates, tree)
        for k in range(npt[q], npt[q + 1]):
            p = ni[k]
            d = 0
            for j in range(qp[p], qp[p + 1]):
                d += 1 - 2 * np.int64(e[qi[j]])
            if d != delta[p]:
                if kind == 2:
                    R += _bin_move(p, d, s, tab, delta, bins, counts, loc, sub)
                else:
                    R += _rate_move(kind, p, d, s, tab, delta, rates, tree)
        steps += 1
        taken += 1
        if resync_every > 0 and steps % resync_every == 0:
            fR[1] = R
            dr = _tracker_resync(kind, s, tab, rates, tree, counts, sub, fR)
            R = fR[1]
            if dr > fR[2]:
                fR[2] = dr
    fR[0] = t
    fR[1] = R
    iE[0] = E
    iE[1] = steps
    code[0] = state
    return taken


class KmcSimulator:
    """Resumable fast trajectory for one sector.

    The simulator starts in the ground state. :meth:`advance_to` and
    :meth:`advance_steps` continue the same trajectory. ``apply_crossing``
    mirrors the reference loop, which applies the flip whose clock crosses
    the target. When it is off, the run halts exactly at the target and
    drops the pending draw, which the exponential clock allows without
    bias.
    """

    def __init__(self, model: SectorModel, beta: float, seed: int = 0,
                 tracker: str = "binning", dynamics: str = METROPOLIS,
                 resync_every: int = RESYNC_INTERVAL, track_occupancy: bool = False):
        if tracker not in TRACKERS:
            raise ValueError(f"unknown tracker {tracker!r}")
        self.model = model
        self.beta = beta
        self.kind = TRACKERS.index(tracker)
        self.s = model.s
        self.tab = rate_table(model.s, beta, dynamics)
        n, m, s = model.n, model.m, model.s
        self.w = np.zeros(n, dtype=np.uint8)
        self.e = np.zeros(m, dtype=np.uint8)
        self.iE = np.zeros(2, dtype=np.int64)
        self.fR = np.zeros(3, dtype=np.float64)
        self.delta = model.degrees.astype(np.int64).copy()
        self.rates = self.tab[self.delta + s].copy()
        self.tree = np.zeros(n + 1)
        self.top = 1 << (max(n, 1).bit_length() - 1)
        width = n if self.kind == 2 else 1
        self.bins = np.zeros((2 * s + 1, width), dtype=np.int64)
        self.counts = np.zeros(2 * s + 1, dtype=np.int64)
        self.loc = np.zeros(n, dtype=np.int64)
        self.sub = np.zeros(2 * s + 1)
        if self.kind == 2:
            for q in range(n):
                b = self.delta[q] + s
                self.loc[q] = self.counts[b]
                self.bins[b, self.counts[b]] = q
                self.counts[b] += 1
        _tracker_resync(self.kind, s, self.tab, self.rates, self.tree, self.counts, self.sub, self.fR)
        self.rng = np.array([seed & _MASK64], dtype=np.uint64)
        self.resync_every = int(resync_every)
        if track_occupancy:
            if n > 24:
                raise ValueError("occupancy tracking needs n <= 24")
            self.occ = np.zeros(1 << n)
        else:
            self.occ = np.zeros(0)
        self.code = np.zeros(1, dtype=np.int64)

    def _run(self, T: float, steps: int, apply_crossing: bool) -> int:
        return int(_run_kernel(self.kind, self.model.q_ptr, self.model.q_idx, self.model.n_ptr,
                               self.model.n_idx, self.tab, self.s, self.w, self.e, self.iE,
                               self.fR, self.delta, self.rates, self.tree, self.top, self.bins,
                               self.counts, self.loc, self.sub, self.rng, float(T), int(steps),
                               bool(apply_crossing), self.resync_every, self.occ, self.code))

    def advance_to(self, T: float, apply_crossing: bool = False) -> int:
        return self._run(T, np.iinfo(np.int64).max, apply_crossing)

    def advance_steps(self, steps: int) -> int:
        return self._run(math.inf, steps, True)

    def resync(self) -> float:
        """Recompute rate subtotals and the total from the Delta table."""
        return float(_tracker_resync(self.kind, self.s, self.tab, self.rates, self.tree,
                                     self.counts, self.sub, self.fR))

    @property
    def t(self) -> float:
        return float(self.fR[0])

    @property
    def E(self) -> int:
        return int(self.iE[0])

    @property
    def steps(self) -> int:
        return int(self.iE[1])

    @property
    def total_rate(self) -> float:
        return float(self.fR[1])

    @property
    def max_drift(self) -> float:
        return float(self.fR[2])

    def state(self) -> KmcState:
        return KmcState(self.w.copy(), self.e.copy(), self.E, self.t, self.steps)


def kmc_run(model: SectorModel, beta: float, T_target: float, tracker: str = "binning",
            seed: int = 0, dynamics: str = METROPOLIS) -> KmcState:
    """Run from the ground state to the first sampled time ``t >= T_target``."""
    if T_target < 0:
        raise ValueError("T_target must be >= 0")
    sim = KmcSimulator(model, beta, seed, tracker, dynamics)
    sim.advance_to(T_target, apply_crossing=True)
    return sim.state()


def boltzmann(model: SectorModel, beta: float) -> np.ndarray:
    """Exact Boltzmann weights over all 2^n states (bit q of the index is w_q)."""
    if model.n > 20:
        raise ValueError("exact enumeration needs n <= 20")
    H = model.H.to_dense().astype(np.int64)
    states = ((np.arange(1 << model.n)[:, None] >> np.arange(model.n)) & 1).astype(np.int64)
    E = ((states @ H.T) & 1).sum(axis=1)
    p = np.exp(-beta * (E - E.min()))
    return p / p.sum()
