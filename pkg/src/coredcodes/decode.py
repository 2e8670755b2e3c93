"""BP-OSD decoding, an exhaustive maximum-likelihood oracle, prior
calibration and logical-failure classification for one CSS sector."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .f2 import BinaryMatrix, BitVector, DimensionMismatch, kernel_basis, row_space_contains, solve
from .product import CssCode, logical_basis

LLR_CLAMP = 30.0
P_FLOOR = 1e-6
P_CEIL = 0.5 - 1e-6
DEFAULT_ITERS = 100
DEFAULT_OSD_ORDER = 10
ML_LIMIT = 20


class BudgetExceeded(RuntimeError):
    pass


class DegenerateData(ValueError):
    pass


class SyndromeNonzero(ValueError):
    pass


@dataclass
class DecoderPriors:
    """Per-qubit flip probabilities; ``tau`` is set when fitted."""
    p: np.ndarray
    source: str = "uniform"
    tau: Optional[np.ndarray] = None

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if np.any(self.p <= 0) or np.any(self.p > 0.5):
            raise ValueError("priors must lie in (0, 0.5]")

    @classmethod
    def uniform(cls, n: int, p: float) -> "DecoderPriors":
        return cls(np.full(n, p))

    def llr(self) -> np.ndarray:
        return np.clip(np.log((1.0 - self.p) / self.p), -LLR_CLAMP, LLR_CLAMP)

    def to_json(self) -> str:
        tau = self.tau if self.tau is not None else [None] * len(self.p)
        rows = [{"qubit": i, "tau": (None if t is None or not np.isfinite(t) else float(t)),
                 "p": float(p)} for i, (t, p) in enumerate(zip(tau, self.p))]
        return json.dumps({"source": self.source, "priors": rows}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "DecoderPriors":
        data = json.loads(text)
        rows = sorted(data["priors"], key=lambda r: r["qubit"])
        tau = np.array([np.inf if r["tau"] is None else r["tau"] for r in rows])
        return cls(np.array([r["p"] for r in rows]), data.get("source", "file"), tau)


@dataclass
class DecodeResult:
    correction: BitVector
    converged: bool
    osd_used: bool
    weight: int
    iterations: int = 0


# belief propagation ---------------------------------------------------------

def scaling_schedule(iters: int) -> np.ndarray:
    """Min-sum scaling ``alpha_i = 1 - 2**-ceil(i/2)`` for i = 1..iters."""
    i = np.arange(1, iters + 1)
    return 1.0 - 2.0 ** (-np.ceil(i / 2.0))


@nb.njit(cache=True)
def _min_sum(c_ptr, c_idx, v_ptr, v_edge, llr, syn, alphas, clamp):
    """Flooding min-sum. Edges are numbered in check order; ``v_edge`` lists
    each variable's edges. Returns (posterior, hard, converged, iterations)."""
    m = c_ptr.shape[0] - 1
    n = v_ptr.shape[0] - 1
    ne = c_idx.shape[0]
    v2c = np.empty(ne)
    c2v = np.zeros(ne)
    for k in range(ne):
        v2c[k] = llr[c_idx[k]]
    post = llr.copy()
    hard = np.zeros(n, dtype=np.uint8)
    it = 0
    for it in range(1, alphas.shape[0] + 1):
        a = alphas[it - 1]
        for c in range(m):
            sgn = 1.0 if syn[c] == 0 else -1.0
            min1 = np.inf
            min2 = np.inf
            arg = -1
            for k in range(c_ptr[c], c_ptr[c + 1]):
                x = v2c[k]
                if x < 0:
                    sgn = -sgn
                ax = abs(x)
                if ax < min1:
                    min2 = min1
                    min1 = ax
                    arg = k
                elif ax < min2:
                    min2 = ax
            for k in range(c_ptr[c], c_ptr[c + 1]):
                mag = min2 if k == arg else min1
                s_ = sgn
                if v2c[k] < 0:
                    s_ = -s_
                val = a * s_ * mag
                if val > clamp:
                    val = clamp
                elif val < -clamp:
                    val = -clamp
                c2v[k] = val
        for v in range(n):
            tot = llr[v]
            for j in range(v_ptr[v], v_ptr[v + 1]):
                tot += c2v[v_edge[j]]
            post[v] = tot
            hard[v] = 1 if tot < 0 else 0
            for j in range(v_ptr[v], v_ptr[v + 1]):
                k = v_edge[j]
                x = tot - c2v[k]
                if x > clamp:
                    x = clamp
                elif x < -clamp:
                    x = -clamp
                v2c[k] = x
        ok = True
        for c in range(m):
            par = syn[c]
            for k in range(c_ptr[c], c_ptr[c + 1]):
                par ^= hard[c_idx[k]]
            if par:
                ok = False
                break
        if ok:
            return post, hard, True, it
    return post, hard, False, it


@nb.njit(cache=True)
def _osd(Hd, syn, order, cost, lam):
    """OSD-0 plus combination sweep over the first ``lam`` free columns.

    Columns are visited in ``order``; ``cost[j]`` is the soft cost of setting
    bit j. Returns (solution, solvable).
    """
    m, n = Hd.shape
    A = np.empty((m, n), dtype=np.uint8)
    for j in range(n):
        for r in range(m):
            A[r, j] = Hd[r, order[j]]
    b = syn.copy()
    pivots = np.empty(min(m, n), dtype=np.int64)
    is_piv = np.zeros(n, dtype=np.uint8)
    row = 0
    for j in range(n):
        if row == m:
            break
        pr = -1
        for r in range(row, m):
            if A[r, j]:
                pr = r
                break
        if pr < 0:
            continue
        if pr != row:
            for c in range(n):
                tmp = A[pr, c]
                A[pr, c] = A[row, c]
                A[row, c] = tmp
            tmp = b[pr]
            b[pr] = b[row]
            b[row] = tmp
        for r in range(m):
            if r != row and A[r, j]:
                for c in range(j, n):
                    A[r, c] ^= A[row, c]
                b[r] ^= b[row]
        pivots[row] = j
        is_piv[j] = 1
        row += 1
    rk = row
    solvable = True
    for r in range(rk, m):
        if b[r]:
            solvable = False
    free = np.empty(n - rk, dtype=np.int64)
    f = 0
    for j in range(n):
        if not is_piv[j]:
            free[f] = j
            f += 1
    L = min(lam, n - rk)
    pcost = np.empty(n)
    for j in range(n):
        pcost[j] = cost[order[j]]

    best_x = np.zeros(n, dtype=np.uint8)
    xs = np.empty(rk, dtype=np.uint8)
    best = np.inf
    # pattern (-1,-1) = OSD-0, (i,-1) = single, (i,j) = pair
    for i1 in range(-1, L):
        for i2 in range(-1, L):
            if i2 >= 0 and (i1 < 0 or i2 <= i1):
                continue
            c_tot = 0.0
            for r in range(rk):
                v = b[r]
                if i1 >= 0:
                    v ^= A[r, free[i1]]
                if i2 >= 0:
                    v ^= A[r, free[i2]]
                xs[r] = v
                if v:
                    c_tot += pcost[pivots[r]]
            if i1 >= 0:
                c_tot += pcost[free[i1]]
            if i2 >= 0:
                c_tot += pcost[free[i2]]
            if c_tot < best:
                best = c_tot
                best_x[:] = 0
                for r in range(rk):
                    best_x[pivots[r]] = xs[r]
                if i1 >= 0:
                    best_x[free[i1]] = 1
                if i2 >= 0:
                    best_x[free[i2]] = 1
    out = np.zeros(n, dtype=np.uint8)
    for j in range(n):
        out[order[j]] = best_x[j]
    return out, solvable


class BpOsdDecoder:
    """Reusable decoder for a fixed check matrix."""

    def __init__(self, H: BinaryMatrix, iters: int = DEFAULT_ITERS,
                 osd_order: int = DEFAULT_OSD_ORDER, alphas: Optional[np.ndarray] = None):
        self.H = H
        self.m, self.n = H.shape
        self.iters = iters
        self.osd_order = osd_order
        self.alphas = scaling_schedule(iters) if alphas is None else np.asarray(alphas, float)
        rows = H.row_supports()
        self.c_ptr = np.zeros(self.m + 1, dtype=np.int64)
        self.c_ptr[1:] = np.cumsum([len(r) for r in rows])
        self.c_idx = np.array([v for r in rows for v in r], dtype=np.int64)
        edge_lists: list[list[int]] = [[] for _ in range(self.n)]
        for k, v in enumerate(self.c_idx):
            edge_lists[v].append(k)
        self.v_ptr = np.zeros(self.n + 1, dtype=np.int64)
        self.v_ptr[1:] = np.cumsum([len(x) for x in edge_lists])
        self.v_edge = np.array([k for x in edge_lists for k in x], dtype=np.int64)
        self.dense = H.to_dense().astype(np.uint8)

    def decode(self, syndrome: BitVector, priors: DecoderPriors) -> DecodeResult:
        if syndrome.n != self.m:
            raise DimensionMismatch(f"syndrome length {syndrome.n} != {self.m} checks")
        if len(priors.p) != self.n:
            raise DimensionMismatch("priors length does not match the code")
        syn = syndrome.to_dense().astype(np.uint8)
        if not syn.any():
            return DecodeResult(BitVector.zeros(self.n), True, False, 0, 0)
        llr = priors.llr()
        post, hard, conv, it = _min_sum(self.c_ptr, self.c_idx, self.v_ptr, self.v_edge,
                                        llr, syn, self.alphas, LLR_CLAMP)
        if conv:
            x = BitVector.from_dense(hard)
            return DecodeResult(x, True, False, x.weight(), int(it))
        # most likely flipped first; ties broken by column index
        order = np.lexsort((np.arange(self.n), post)).astype(np.int64)
        sol, ok = _osd(self.dense, syn, order, post, self.osd_order)
        x = BitVector.from_dense(sol)
        return DecodeResult(x, False, True, x.weight(), int(it))


def bp_osd_decode(H: BinaryMatrix, syndrome: BitVector, priors: DecoderPriors,
                  iters: int = DEFAULT_ITERS, osd_order: int = DEFAULT_OSD_ORDER) -> DecodeResult:
    """One-shot BP-OSD decode (builds a :class:`BpOsdDecoder`)."""
    if syndrome.n != H.rows:
        raise DimensionMismatch(f"syndrome length {syndrome.n} != {H.rows} checks")
    return BpOsdDecoder(H, iters, osd_order).decode(syndrome, priors)


# maximum likelihood oracle ---------------------------------------------------

def error_log_prob(x: BitVector, priors: DecoderPriors) -> float:
    """Log-probability of the error pattern ``x`` under independent priors."""
    d = x.to_dense().astype(bool)
    return float(np.log(priors.p[d]).sum() + np.log1p(-priors.p[~d]).sum())


@dataclass
class MlResult:
    correction: BitVector
    class_probabilities: dict
    tie: bool
    best_class: tuple
    best_log_prob: float = 0.0
    mpe_classes: tuple = ()

    @property
    def mpe_tie(self) -> bool:
        """True when the single most probable error occurs in several classes."""
        return len(self.mpe_classes) > 1


def ml_decode_oracle(H: BinaryMatrix, Hopp: BinaryMatrix, L: Optional[Sequence[BitVector]],
                     syndrome: BitVector, priors: DecoderPriors,
                     details: bool = False):
    """Most probable logical class for ``syndrome``, with its most probable
    representative.

    ``L`` are the opposite-sector logicals whose overlaps label the classes;
    when None they are derived from ``Hopp``. Classes whose summed
    probabilities agree to 1e-12 relative are reported as a tie.
    """
    n = H.cols
    if n > ML_LIMIT:
        raise BudgetExceeded(f"n = {n} exceeds {ML_LIMIT}")
    if L is None:
        L = logical_basis(Hopp, H)
    x0 = solve(H, syndrome)
    if x0 is None:
        raise ValueError("syndrome is not in the image of H")
    ker = kernel_basis(H)
    base = x0.to_dense().astype(np.int64)
    K = np.array([v.to_dense() for v in ker], dtype=np.int64).reshape(len(ker), n)
    coeffs = ((np.arange(1 << len(ker))[:, None] >> np.arange(len(ker))) & 1)
    sols = (base[None, :] + coeffs @ K) & 1
    p = priors.p
    logw = sols @ np.log(p) + (1 - sols) @ np.log1p(-p)
    Lm = np.array([v.to_dense() for v in L], dtype=np.int64).reshape(len(L), n)
    cls = (sols @ Lm.T) & 1
    keys = [tuple(r) for r in cls]
    probs: dict = {}
    wmax = logw.max()
    for k, lw in zip(keys, logw):
        probs[k] = probs.get(k, 0.0) + math.exp(lw - wmax)
    tot = sum(probs.values())
    probs = {k: v / tot for k, v in probs.items()}
    best_p = max(probs.values())
    best_classes = sorted(k for k, v in probs.items() if abs(v - best_p) <= 1e-12 * best_p)
    best = best_classes[0]
    idx = [i for i, k in enumerate(keys) if k == best]
    i_best = max(idx, key=lambda i: (logw[i], -i))
    x = BitVector.from_dense(sols[i_best])
    if details:
        top = logw.max()
        mpe = tuple(sorted({keys[i] for i in range(len(keys)) if logw[i] >= top - 1e-9}))
        return MlResult(x, probs, len(best_classes) > 1, best, float(top), mpe)
    return x


# priors calibration ------------------------------------------------------------

def fit_tau(times: np.ndarray, p_hat: np.ndarray, shots: Optional[int] = None,
            iterations: int = 4) -> float:
    """Relaxation time from ``1 - 2 p(t) = exp(-t / tau)``.

    Weighted least squares through the origin of ``ln(1 - 2 p_hat)`` on
    ``t``. Weights are the inverse delta-method variances under the current
    fit. With ``shots`` known, the second-order bias of the logarithm,
    ``-2 p (1 - p) / (shots (1 - 2 p)^2)``, is removed before each refit.
    Points with ``p_hat >= 1/2`` are dropped. Returns inf when nothing
    flipped.
    """
    times = np.asarray(times, float)
    p_hat = np.asarray(p_hat, float)
    ok = (p_hat < 0.5) & (times > 0)
    if not np.any(p_hat[ok] > 0):
        return math.inf
    y0 = np.log1p(-2.0 * p_hat[ok])
    t = times[ok]
    slope = float(np.dot(t, y0) / np.dot(t, t))
    if slope >= 0:
        return math.inf
    tau = -1.0 / slope
    for _ in range(iterations):
        pm = np.clip(0.5 * (1.0 - np.exp(-t / tau)), 1e-12, 0.5 - 1e-9)
        w = (1.0 - 2.0 * pm) ** 2 / (pm * (1.0 - pm))
        y = y0 if shots is None else y0 + 2.0 * pm * (1.0 - pm) / (shots * (1.0 - 2.0 * pm) ** 2)
        slope = float(np.sum(w * t * y) / np.sum(w * t * t))
        if slope >= 0:
            return math.inf
        tau = -1.0 / slope
    return tau


def calibrate_priors(flips: np.ndarray, times: Sequence[float], t_decode: float,
                     strict: bool = False) -> DecoderPriors:
    """Fit per-qubit relaxation times and evaluate priors at ``t_decode``.

    ``flips`` has shape (shots, len(times), n) with 0/1 entries. The
    amplitude is fixed at 1/2. Qubits that never flip get the floor prior;
    with ``strict`` that raises :class:`DegenerateData` instead.
    """
    flips = np.asarray(flips)
    times = np.asarray(times, float)
    if flips.ndim != 3 or flips.shape[1] != len(times):
        raise ValueError("flips must have shape (shots, len(times), n)")
    if len(times) < 2:
        raise DegenerateData("need at least two sample times")
    p_hat = flips.mean(axis=0)
    n = p_hat.shape[1]
    tau = np.array([fit_tau(times, p_hat[:, q], flips.shape[0]) for q in range(n)])
    if strict and np.all(np.isinf(tau)):
        raise DegenerateData("no flips observed")
    with np.errstate(divide="ignore"):
        p = 0.5 * (1.0 - np.exp(-t_decode / tau))
    p = np.clip(p, P_FLOOR, P_CEIL)
    return DecoderPriors(p, "calibrated", tau)


# failure classification --------------------------------------------------------

class FailureChecker:
    """Classifies residual errors of one sector.

    A residual with zero syndrome fails when it lies outside the row space of
    the other sector's stabilizers, detected by odd overlap with a dual
    logical.
    """

    def __init__(self, code: CssCode, sector: str):
        self.H = code.H(sector)
        duals = logical_basis(code.H_other(sector), self.H)
        self.duals = (np.array([v.to_dense() for v in duals], dtype=np.uint8)
                      .reshape(len(duals), code.n_q))

    def __call__(self, residual: np.ndarray) -> bool:
        r = np.asarray(residual, dtype=np.uint8)
        return bool(((self.duals.astype(np.int64) @ r) & 1).any())


def is_logical_failure(c: CssCode, sector: str, residual: BitVector) -> bool:
    """True iff the zero-syndrome ``residual`` acts as a nontrivial logical."""
    if c.H(sector).mul_vec(residual).any():
        raise SyndromeNonzero("residual has a nonzero syndrome")
    return not row_space_contains(c.H_other(sector), residual)
