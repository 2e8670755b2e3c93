"""Measurement-based deletion ("coring") of CSS codes.

Each round measures out Z-type generators, then X-type generators, then drops
single-qubit generators together with their qubit. A qubit ``i`` in the
deletable set is measured out in sector A when exactly one A-type generator
acts on it: that generator is discarded and the qubit's column disappears
from every B-type generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .f2 import BinaryMatrix, BitVector
from .product import SECTORS, CssCode, NoLogical, min_logical_weight


@dataclass
class RoundTally:
    n_Z: int
    n_X: int
    n_T: int

    @property
    def total(self) -> int:
        return self.n_Z + self.n_X + self.n_T


@dataclass
class CoringReport:
    removed_qubits: set = field(default_factory=set)
    removed_stabilizers: set = field(default_factory=set)
    rounds: int = 0
    tallies: list[RoundTally] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "removed_qubits": sorted(self.removed_qubits),
            "removed_stabilizers": sorted([list(s) for s in self.removed_stabilizers]),
            "tallies": [{"n_Z": t.n_Z, "n_X": t.n_X, "n_T": t.n_T} for t in self.tallies],
        }


class _Working:
    """Mutable adjacency view of a CSS code (rows as sets of live qubits)."""

    def __init__(self, code: CssCode):
        self.rows = {s: [set(r) for r in code.H(s).row_supports()] for s in SECTORS}
        self.alive_rows = {s: set(range(len(self.rows[s]))) for s in SECTORS}
        self.qubit_rows = {s: [set() for _ in range(code.n_q)] for s in SECTORS}
        for s in SECTORS:
            for j, r in enumerate(self.rows[s]):
                for q in r:
                    self.qubit_rows[s][q].add(j)
        self.alive_qubits = set(range(code.n_q))

    def remove_row(self, sector: str, j: int) -> None:
        for q in self.rows[sector][j]:
            self.qubit_rows[sector][q].discard(j)
        self.rows[sector][j] = set()
        self.alive_rows[sector].discard(j)

    def remove_qubit(self, q: int) -> None:
        for s in SECTORS:
            for j in self.qubit_rows[s][q]:
                self.rows[s][j].discard(q)
            self.qubit_rows[s][q] = set()
        self.alive_qubits.discard(q)


def _measure(work: _Working, A: str, D: Iterable[int], report: CoringReport,
             meta: CssCode) -> int:
    count = 0
    for q in sorted(D):
        if q not in work.alive_qubits or len(work.qubit_rows[A][q]) != 1:
            continue
        (j,) = work.qubit_rows[A][q]
        work.remove_row(A, j)
        work.remove_qubit(q)
        report.removed_stabilizers.add((A, meta.stabilizer_meta[A][j].label))
        report.removed_qubits.add(meta.qubit_meta[q].label)
        count += 1
    return count


def _remove_trivial(work: _Working, report: CoringReport, meta: CssCode) -> int:
    count = 0
    for s in SECTORS:
        for j in sorted(work.alive_rows[s]):
            if j not in work.alive_rows[s]:
                continue
            support = work.rows[s][j]
            if len(support) == 1:
                (q,) = support
                work.remove_row(s, j)
                work.remove_qubit(q)
                report.removed_stabilizers.add((s, meta.stabilizer_meta[s][j].label))
                report.removed_qubits.add(meta.qubit_meta[q].label)
                count += 1
    # generators emptied by qubit removals carry no information
    for s in SECTORS:
        for j in sorted(work.alive_rows[s]):
            if not work.rows[s][j]:
                work.remove_row(s, j)
                report.removed_stabilizers.add((s, meta.stabilizer_meta[s][j].label))
    return count


def core(c: CssCode, D: Optional[Iterable[int]] = None,
         max_rounds: Optional[int] = None) -> tuple[CssCode, CoringReport]:
    """Run deletion rounds until one removes nothing.

    ``D`` holds current qubit indices of ``c``; it defaults to the blue
    qubits. Logical representatives are restricted to surviving qubits.
    """
    D = set(c.blue_qubits() if D is None else D)
    if any(not 0 <= q < c.n_q for q in D):
        raise ValueError("deletable set contains an invalid qubit")
    work = _Working(c)
    report = CoringReport()
    limit = c.n_q + 1 if max_rounds is None else max_rounds
    while report.rounds < limit:
        tally = RoundTally(_measure(work, "Z", D, report, c),
                           _measure(work, "X", D, report, c),
                           _remove_trivial(work, report, c))
        report.rounds += 1
        report.tallies.append(tally)
        if tally.total == 0:
            break
    return _rebuild(c, work), report


def _rebuild(c: CssCode, work: _Working) -> CssCode:
    keep = sorted(work.alive_qubits)
    new_index = {q: i for i, q in enumerate(keep)}
    mats, smeta = {}, {}
    for s in SECTORS:
        live = sorted(work.alive_rows[s])
        mats[s] = BinaryMatrix.from_rows([[new_index[q] for q in work.rows[s][j]] for j in live],
                                         len(keep))
        smeta[s] = [c.stabilizer_meta[s][j] for j in live]

    def restrict(v: BitVector) -> BitVector:
        return BitVector.from_dense(v.to_dense()[keep]) if keep else BitVector.zeros(0)

    out = CssCode(mats["X"], mats["Z"], [c.qubit_meta[q] for q in keep], smeta,
                  factor_codewords=c.factor_codewords, factor_shape=c.factor_shape)
    out.LX = [restrict(v) for v in c.LX]
    out.LZ = [restrict(v) for v in c.LZ]
    return out


def protected_labels(c: CssCode) -> set[int]:
    """Labels of red qubits in C1 x C2, which coring must never remove."""
    if c.factor_codewords is None or c.factor_shape is None:
        return set()
    C1, C2 = c.factor_codewords
    n2 = c.factor_shape[1]
    return {a * n2 + b for a in C1.support() for b in C2.support()}


def verify_preservation(before: CssCode, after: CssCode, check_distance: bool = True,
                        budget: int = 10**7) -> dict:
    """Compare dimension, per-sector distance and protected red qubits.

    Returns a dict with the measured values and a ``violations`` list that
    is empty when everything is preserved.
    """
    out = {"k_before": before.k_q, "k_after": after.k_q, "violations": []}
    if out["k_before"] != out["k_after"]:
        out["violations"].append("k changed")
    if check_distance and out["k_before"] > 0 and out["k_after"] > 0:
        for s in SECTORS:
            try:
                d0 = min_logical_weight(before, s, budget)
                d1 = min_logical_weight(after, s, budget)
            except NoLogical:
                continue
            out[f"d{s}_before"], out[f"d{s}_after"] = d0, d1
            if d0 != d1:
                out["violations"].append(f"d{s} changed")
    surviving = {q.label for q in after.qubit_meta}
    lost = protected_labels(before) - surviving
    out["protected_lost"] = sorted(lost)
    if lost:
        out["violations"].append("protected red qubits removed")
    return out


def surviving_factor_vertices(c: CssCode, axis: int) -> set[int]:
    """Factor vertices that label at least one surviving red qubit."""
    return {q.coords[axis] for q in c.qubit_meta if q.color == "red"}


def stopping_set_violations(c: CssCode) -> list[int]:
    """Surviving blue qubits in the protected inclusion acted on by an odd
    number of surviving X generators drawn from the same inclusion.

    A blue qubit (c1, c2) lies in the inclusion of C2 at base column v1 when
    c2 reads supp(C2). Rows of HX at (c1, v2) with v2 in supp(C2) play the
    role of the direct stabilizers of that inclusion.
    """
    if c.factor_codewords is None:
        return []
    _, C2 = c.factor_codewords
    supp2 = set(C2.support())
    bad = []
    cols = c.HX.col_supports()
    for i, q in enumerate(c.qubit_meta):
        if q.color != "blue":
            continue
        direct = [j for j in cols[i] if c.stabilizer_meta["X"][j].coords[1] in supp2]
        if len(direct) % 2:
            bad.append(q.label)
    return bad
