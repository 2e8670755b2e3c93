"""Command-line entry point (``coredcodes <subcommand> ...``)."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np


def _load_any(path):
    """Load a classical or CSS code from its JSON description."""
    from .codeio import classical_from_dict, load_css
    data = json.loads(Path(path).read_text())
    if data.get("kind") == "css":
        return load_css(path)
    return classical_from_dict(data)


def _load_css(path):
    from .product import CssCode
    code = _load_any(path)
    if not isinstance(code, CssCode):
        raise SystemExit(f"{path}: expected a CSS code")
    return code


def _seed(a) -> int:
    return 0 if a.seed is None else a.seed


def cmd_build(a):
    from .codeio import save_classical
    from .pinwheel import pinwheel_factor, tiling_to_json
    from .slead import repetition_chain
    if a.family == "rep":
        code = repetition_chain(a.length, a.deplete)
        extra = {"family": "rep"}
    else:
        f = pinwheel_factor(a.generation[0], a.generation[1], a.perm, tuple(a.t), a.nu,
                            placement=a.placement)
        code = f.code
        extra = {"family": "pinwheel", "generation": list(a.generation), "perm": a.perm,
                 "nu": a.nu, "depletion_site": int(f.site)}
        if a.tiling:
            Path(a.tiling).write_text(json.dumps(tiling_to_json(f.tiles)))
    save_classical(code, a.out, extra)
    print(json.dumps({"n": code.n, "m": code.m, "k": code.k, "out": a.out}))


def cmd_product(a):
    from .codeio import load_classical, save_css
    from .product import hypergraph_product
    c1 = load_classical(a.first)
    c2 = load_classical(a.second or a.first)
    q = hypergraph_product(c1, c2)
    save_css(q, a.out)
    print(json.dumps({"n_q": q.n_q, "k_q": q.k_q, "d_q": q.d_q, "out": a.out}))


def cmd_core(a):
    from .codeio import save_css
    from .coring import core
    code = _load_css(a.inp)
    D = None if a.deletable == "blue" else json.loads(Path(a.deletable).read_text())
    cored, report = core(code, D)
    save_css(cored, a.out)
    if a.report:
        Path(a.report).write_text(json.dumps(report.to_dict(), indent=1))
    print(json.dumps({"n_before": code.n_q, "n_after": cored.n_q, "k": cored.k_q,
                      "rounds": report.rounds}))


def cmd_barrier(a):
    from .barrier import EXACT_LIMIT, exact_barrier, greedy_barrier_bound, path_multiplicity
    from .f2 import BitVector
    from .product import CssCode
    code = _load_any(a.code)
    if isinstance(code, CssCode):
        H, C = code.H(a.sector), code.logicals(a.sector)[0]
    else:
        from .slead import build_codeword
        H = code
        dep = sorted(code.slead.depleted) if code.slead is not None else []
        C = build_codeword(code, dep[0]) if dep else code.codewords_basis()[0]
    if a.codeword:
        n = H.cols if hasattr(H, "cols") else H.n
        C = BitVector.from_support(n, json.loads(Path(a.codeword).read_text()))
    bound = greedy_barrier_bound(H, C, beam=a.beam, seed=_seed(a))
    exact, mult = "", ""
    if a.exact and C.weight() <= EXACT_LIMIT:
        exact = exact_barrier(H, C)
        mult = path_multiplicity(H, C, exact)
    n = code.n_q if isinstance(code, CssCode) else code.n
    row = {"n": n, "L": C.weight(), "bound": bound, "exact": exact, "multiplicity": mult}
    if a.out:
        with open(a.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(row))
            w.writeheader()
            w.writerow(row)
    print(json.dumps(row))


def cmd_kmc(a):
    from .kmc import KmcSimulator, SectorModel
    code = _load_css(a.code)
    model = SectorModel(code.H(a.sector))
    sim = KmcSimulator(model, a.beta, _seed(a), tracker=a.tracker, dynamics=a.dynamics)
    rows = []
    for i in range(1, a.snapshots + 1):
        if a.steps is not None:
            sim.advance_steps(a.steps * i // a.snapshots - sim.steps)
        else:
            sim.advance_to(a.time * i / a.snapshots)
        rows.append((sim.steps, sim.t, sim.E, float(sim.w.mean())))
    if a.out:
        with open(a.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "t", "E", "error_density"])
            w.writerows(rows)
    print(json.dumps({"steps": sim.steps, "t": sim.t, "E": sim.E,
                      "error_density": rows[-1][3]}))


def cmd_calibrate(a):
    from .harness import calibrate
    code = _load_css(a.code)
    pm = calibrate(code, a.sector, a.beta, a.horizon, a.shots, a.samples, _seed(a))
    pri = pm.at(a.at if a.at is not None else a.horizon)
    Path(a.out).write_text(pri.to_json())
    print(json.dumps({"median_tau": float(np.median(pm.tau)), "out": a.out}))


def cmd_lifetime(a):
    from .harness import ExperimentConfig, lifetime_ensemble
    text = Path(a.config).read_text() if a.config else "{}"
    over = {"betas": a.beta, "shots": a.shots, "seed": a.seed, "sector": a.sector,
            "t_ec": a.t_ec, "out_csv": a.out_csv, "out_json": a.out_json,
            "family": a.family, "perm": a.perm, "code_path": a.code,
            "generation": a.generation, "priors": a.priors}
    if a.code:
        over["family"] = "file"
    cfg = ExperimentConfig.from_json(text, **over)
    for r in lifetime_ensemble(cfg, workers=a.workers):
        print(json.dumps(r.summary()))


def cmd_export(a):
    from .pinwheel import PERMS, generation, tiling_to_json
    tiles = generation(a.generation[0], a.generation[1], PERMS[a.perm])
    Path(a.out).write_text(json.dumps(tiling_to_json(tiles)))
    print(json.dumps({"tiles": len(tiles), "out": a.out}))


def _read_syndrome(path, m):
    raw = Path(path).read_bytes()
    text = raw.strip()
    if text and set(text) <= set(b"01\n ,"):
        bits = [int(ch) for ch in text.decode() if ch in "01"]
    elif len(raw) == m:
        bits = list(raw)
    elif len(raw) == (m + 7) // 8:
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:m].tolist()
    else:
        raise SystemExit(f"{path}: cannot read a {m}-bit syndrome")
    if len(bits) != m:
        raise SystemExit(f"{path}: syndrome has {len(bits)} bits, expected {m}")
    return bits


def cmd_decode(a):
    from .decode import BpOsdDecoder, DecoderPriors
    from .f2 import BitVector
    code = _load_css(a.code)
    H = code.H(a.sector)
    syn = BitVector.from_dense(_read_syndrome(a.syndrome, H.rows))
    if a.priors:
        pri = DecoderPriors.from_json(Path(a.priors).read_text())
    else:
        pri = DecoderPriors.uniform(code.n_q, a.p)
    res = BpOsdDecoder(H, a.iters, a.osd_order).decode(syn, pri)
    print(json.dumps({"correction": res.correction.support(), "converged": res.converged,
                      "osd_used": res.osd_used, "weight": res.weight}))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coredcodes")
    p.add_argument("--seed", type=int, help="master seed for all randomness (default 0)")
    sub = p.add_subparsers(dest="cmd", required=True)

    def pinwheel_flags(sp):
        sp.add_argument("--generation", type=int, nargs=2, default=[1, 0], metavar=("G", "j"))
        sp.add_argument("--perm", choices=["A", "B"], default="A")
        sp.add_argument("--t", type=float, nargs=2, default=[-1.0, -1.0], metavar=("dx", "dy"))
        sp.add_argument("--nu", type=float, default=0.6)

    b = sub.add_parser("build", help="build a classical slead code")
    b.add_argument("--family", choices=["pinwheel", "rep"], default="pinwheel")
    pinwheel_flags(b)
    b.add_argument("--placement", choices=["vertex", "incenter"], default="vertex")
    b.add_argument("--length", type=int, default=3)
    b.add_argument("--deplete", type=int, nargs="*", default=[0])
    b.add_argument("--tiling", help="also write the tiling as JSON")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    pr = sub.add_parser("product", help="hypergraph product of classical codes")
    pr.add_argument("first")
    pr.add_argument("second", nargs="?")
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_product)

    c = sub.add_parser("core", help="measurement-based deletion")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--deletable", default="blue", help="'blue' or a JSON list of qubits")
    c.add_argument("--out", required=True)
    c.add_argument("--report")
    c.set_defaults(func=cmd_core)

    br = sub.add_parser("barrier", help="energy barrier of a codeword or logical")
    br.add_argument("--code", required=True)
    br.add_argument("--sector", choices=["X", "Z"], default="X")
    br.add_argument("--codeword", help="JSON list giving the support to walk to")
    br.add_argument("--beam", type=int, default=100_000)
    br.add_argument("--exact", action="store_true")
    br.add_argument("--out")
    br.set_defaults(func=cmd_barrier)

    k = sub.add_parser("kmc", help="thermal trajectory with periodic snapshots")
    k.add_argument("--code", required=True)
    k.add_argument("--sector", choices=["X", "Z"], default="X")
    k.add_argument("--beta", type=float, required=True)
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--steps", type=int)
    g.add_argument("--time", type=float)
    k.add_argument("--tracker", choices=["binning", "fenwick", "array"], default="binning")
    k.add_argument("--dynamics", choices=["metropolis", "glauber"], default="metropolis")
    k.add_argument("--snapshots", type=int, default=100)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kmc)

    ca = sub.add_parser("calibrate", help="fit per-qubit relaxation priors")
    ca.add_argument("--code", required=True)
    ca.add_argument("--sector", choices=["X", "Z"], default="X")
    ca.add_argument("--beta", type=float, required=True)
    ca.add_argument("--horizon", type=float, required=True)
    ca.add_argument("--shots", type=int, default=256)
    ca.add_argument("--samples", type=int, default=20)
    ca.add_argument("--at", type=float, help="time at which p is reported")
    ca.add_argument("--out", required=True)
    ca.set_defaults(func=cmd_calibrate)

    lf = sub.add_parser("lifetime", help="memory-lifetime ensemble")
    lf.add_argument("--config", help="JSON experiment config")
    lf.add_argument("--code", help="CSS code JSON (overrides the family)")
    lf.add_argument("--family", choices=["pinwheel", "rep"])
    lf.add_argument("--generation", type=int, nargs=2)
    lf.add_argument("--perm", choices=["A", "B"])
    lf.add_argument("--beta", type=float, nargs="+")
    lf.add_argument("--shots", type=int)
    lf.add_argument("--sector", choices=["X", "Z"])
    lf.add_argument("--t-ec", dest="t_ec", type=float)
    lf.add_argument("--priors", choices=["calibrated", "uniform"])
    lf.add_argument("--workers", type=int)
    lf.add_argument("--out-csv", dest="out_csv")
    lf.add_argument("--out-json", dest="out_json")
    lf.set_defaults(func=cmd_lifetime)

    ex = sub.add_parser("export", help="write a pinwheel tiling as JSON triangles")
    ex.add_argument("--generation", type=int, nargs=2, default=[1, 0], metavar=("G", "j"))
    ex.add_argument("--perm", choices=["A", "B"], default="A")
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=cmd_export)

    d = sub.add_parser("decode", help="BP-OSD decode one syndrome")
    d.add_argument("--code", required=True)
    d.add_argument("--sector", choices=["X", "Z"], default="X")
    d.add_argument("--syndrome", required=True)
    d.add_argument("--priors")
    d.add_argument("--p", type=float, default=0.05)
    d.add_argument("--iters", type=int, default=100)
    d.add_argument("--osd-order", dest="osd_order", type=int, default=10)
    d.set_defaults(func=cmd_decode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
