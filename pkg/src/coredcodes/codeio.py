"""JSON and alist serialization for classical slead codes and CSS codes.

A classical code is one JSON document. A CSS code is stored as two alist
files (``HX``, ``HZ``) next to a JSON metadata file that names them.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .f2 import BinaryMatrix, BitVector, from_alist, to_alist
from .product import CssCode, QubitMeta, StabMeta
from .slead import ClassicalCode, validate_slead

PathLike = Union[str, Path]


def classical_to_dict(code: ClassicalCode, extra: dict | None = None) -> dict:
    out: dict = {"kind": "classical", "n": code.n}
    s = code.slead
    if s is not None:
        out["edges"] = [list(e) for e in s.edges if e[0] != e[1]]
        out["self_loops"] = [v for v in range(s.num_vertices) if s.self_loop[v]]
        out["depleted"] = sorted(s.depleted)
        out["levels"] = list(s.levels)
        if s.positions is not None:
            out["positions"] = s.positions.tolist()
        if s.direction is not None:
            out["t"] = s.direction.tolist()
    else:
        out["rows"] = code.H.row_supports()
        out["check_vertices"] = list(code.check_vertices)
    if extra:
        out.update(extra)
    return out


def classical_from_dict(data: dict) -> ClassicalCode:
    if data.get("kind", "classical") != "classical":
        raise ValueError("not a classical code description")
    if "edges" in data:
        edges = [tuple(e) for e in data["edges"]]
        s = validate_slead(data["n"], edges, positions=data.get("positions"), t=data.get("t"),
                           depleted=data.get("depleted", ()),
                           self_loops=data.get("self_loops", []))
        return ClassicalCode.from_slead(s)
    return ClassicalCode(BinaryMatrix.from_rows(data["rows"], data["n"]), None,
                         data.get("check_vertices"))


def save_classical(code: ClassicalCode, path: PathLike, extra: dict | None = None) -> None:
    Path(path).write_text(json.dumps(classical_to_dict(code, extra)))


def load_classical(path: PathLike) -> ClassicalCode:
    return classical_from_dict(json.loads(Path(path).read_text()))


def _vec(v: BitVector) -> dict:
    return {"n": v.n, "support": v.support()}


def _unvec(d: dict) -> BitVector:
    return BitVector.from_support(d["n"], d["support"])


def save_css(code: CssCode, path: PathLike) -> Path:
    """Write ``<stem>.json`` plus ``<stem>_HX.alist`` and ``<stem>_HZ.alist``."""
    path = Path(path)
    stem = path.with_suffix("")
    hx, hz = Path(f"{stem}_HX.alist"), Path(f"{stem}_HZ.alist")
    hx.write_text(to_alist(code.HX))
    hz.write_text(to_alist(code.HZ))
    meta = {
        "kind": "css",
        "n_q": code.n_q,
        "HX": hx.name,
        "HZ": hz.name,
        "qubits": [{"color": q.color, "coords": list(q.coords), "label": q.label}
                   for q in code.qubit_meta],
        "stabilizers": {s: [{"coords": list(m.coords), "label": m.label} for m in ms]
                        for s, ms in code.stabilizer_meta.items()},
        "LX": [_vec(v) for v in code.LX],
        "LZ": [_vec(v) for v in code.LZ],
        "d_q": code.d_q if code.d_q is None or np.isfinite(code.d_q) else "inf",
        "factor_codewords": None if code.factor_codewords is None
        else [_vec(v) for v in code.factor_codewords],
        "factor_shape": None if code.factor_shape is None else list(code.factor_shape),
    }
    path.with_suffix(".json").write_text(json.dumps(meta))
    return path.with_suffix(".json")


def load_css(path: PathLike) -> CssCode:
    path = Path(path)
    meta = json.loads(path.read_text())
    if meta.get("kind") != "css":
        raise ValueError(f"{path} is not a CSS code description")
    HX = from_alist((path.parent / meta["HX"]).read_text())
    HZ = from_alist((path.parent / meta["HZ"]).read_text())
    qmeta = [QubitMeta(q["color"], tuple(q["coords"]), q["label"]) for q in meta["qubits"]]
    smeta = {s: [StabMeta(s, tuple(m["coords"]), m["label"]) for m in ms]
             for s, ms in meta["stabilizers"].items()}
    d_q = meta.get("d_q")
    code = CssCode(HX, HZ, qmeta, smeta,
                   [_unvec(v) for v in meta["LX"]], [_unvec(v) for v in meta["LZ"]],
                   float("inf") if d_q == "inf" else d_q,
                   None if meta.get("factor_codewords") is None
                   else tuple(_unvec(v) for v in meta["factor_codewords"]),
                   None if meta.get("factor_shape") is None else tuple(meta["factor_shape"]))
    return code
