"""Memory-lifetime experiments.

A trial starts in the trivial ground state and runs thermal dynamics on one
sector. At every multiple of ``T_ec`` the syndrome is decoded and the
residual (true error plus correction) is classified; no recovery is ever
applied. The trial's lifetime is the time of the first failing readout.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .coring import core
from .decode import (DEFAULT_ITERS, DEFAULT_OSD_ORDER, P_CEIL, P_FLOOR, BpOsdDecoder,
                     DecoderPriors, FailureChecker, fit_tau)
from .f2 import BitVector
from .kmc import METROPOLIS, KmcSimulator, SectorModel, shot_seed
from .product import CssCode, hypergraph_product

WORKERS_ENV = "COREDCODES_WORKERS"
DEFAULT_SHOTS = 256
CALIBRATION_SHOTS = 256
PILOT_DIVISOR = 128


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a lifetime ensemble."""
    family: str = "pinwheel"            # "pinwheel", "rep" or "file"
    generation: tuple = (1, 0)
    perm: str = "A"
    nu: float = 0.6
    t: tuple = (-1.0, -1.0)
    placement: str = "vertex"
    rep_length: int = 3
    code_path: Optional[str] = None
    betas: list = field(default_factory=lambda: [6.3])
    t_ec: object = "auto"               # float or "auto"
    pilot_shots: int = 8
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    sector: str = "X"
    iters: int = DEFAULT_ITERS
    osd_order: int = DEFAULT_OSD_ORDER
    priors: str = "calibrated"          # "calibrated" or "uniform"
    uniform_p: float = 0.05
    calibration_shots: int = CALIBRATION_SHOTS
    cumulative_priors: bool = True
    max_intervals: int = 10_000
    dynamics: str = METROPOLIS
    out_csv: Optional[str] = None
    out_json: Optional[str] = None

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if any(b <= 0 for b in self.betas):
            raise ValueError("beta must be > 0")
        if self.t_ec != "auto" and not float(self.t_ec) > 0:
            raise ValueError("T_ec must be > 0")
        if self.sector not in ("X", "Z"):
            raise ValueError("sector must be X or Z")
        self.generation = tuple(self.generation)
        self.t = tuple(self.t)

    @classmethod
    def from_json(cls, text: str, **overrides) -> "ExperimentConfig":
        data = json.loads(text)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1)


def build_cored_code(cfg: ExperimentConfig) -> CssCode:
    """Cored hypergraph product of two copies of the configured factor."""
    if cfg.family == "file":
        from .codeio import load_css
        return load_css(cfg.code_path)
    if cfg.family == "rep":
        from .slead import repetition_chain
        f = repetition_chain(cfg.rep_length, [0])
    elif cfg.family == "pinwheel":
        from .pinwheel import pinwheel_factor
        f = pinwheel_factor(cfg.generation[0], cfg.generation[1], cfg.perm, cfg.t, cfg.nu,
                            placement=cfg.placement).code
    else:
        raise ValueError(f"unknown family {cfg.family!r}")
    cored, _ = core(hypergraph_product(f, f))
    return cored


# priors ---------------------------------------------------------------------

@dataclass
class PriorModel:
    """Time-dependent priors ``p_q(t) = (1 - exp(-t / tau_q)) / 2``, or a
    constant when ``tau`` is None."""
    tau: Optional[np.ndarray] = None
    constant: Optional[np.ndarray] = None

    def at(self, t: float) -> DecoderPriors:
        if self.tau is None:
            return DecoderPriors(self.constant, "uniform")
        with np.errstate(divide="ignore"):
            p = 0.5 * (1.0 - np.exp(-t / self.tau))
        return DecoderPriors(np.clip(p, P_FLOOR, P_CEIL), "calibrated", self.tau)


def sample_flips(code: CssCode, sector: str, beta: float, times: Sequence[float], shots: int,
                 seed: int = 0, dynamics: str = METROPOLIS) -> np.ndarray:
    """Qubit flip indicators of shape (shots, len(times), n)."""
    model = SectorModel(code.H(sector))
    out = np.zeros((shots, len(times), model.n), dtype=np.uint8)
    for s in range(shots):
        sim = KmcSimulator(model, beta, shot_seed(seed, s), dynamics=dynamics)
        for i, t in enumerate(times):
            sim.advance_to(t)
            out[s, i] = sim.w
    return out


def calibrate(code: CssCode, sector: str, beta: float, horizon: float,
              shots: int = CALIBRATION_SHOTS, samples: int = 20, seed: int = 0,
              dynamics: str = METROPOLIS) -> PriorModel:
    """Fit per-qubit relaxation times from ``shots`` fresh trajectories
    sampled at ``samples`` evenly spaced times up to ``horizon``."""
    times = np.linspace(horizon / samples, horizon, samples)
    flips = sample_flips(code, sector, beta, times, shots, seed ^ 0xCA1B, dynamics)
    p_hat = flips.mean(axis=0)
    tau = np.array([fit_tau(times, p_hat[:, q], shots) for q in range(p_hat.shape[1])])
    return PriorModel(tau=tau)


# trials ---------------------------------------------------------------------

@dataclass
class TrialRecord:
    lifetime: float
    decodes: int
    censored: bool
    max_surviving_density: float
    final_density: float


def lifetime_trial(code: CssCode, sector: str, beta: float, T_ec: float,
                   decoder: Optional[BpOsdDecoder] = None,
                   priors: Optional[PriorModel] = None, seed: int = 0,
                   max_intervals: int = 10_000, cumulative_priors: bool = True,
                   dynamics: str = METROPOLIS,
                   checker: Optional[FailureChecker] = None) -> TrialRecord:
    """Run one trajectory until its first failing readout.

    Readout k happens at time ``k * T_ec``. Priors are evaluated at the
    elapsed time (``cumulative_priors``) or at ``T_ec``. A trial that
    survives ``max_intervals`` readouts is returned as censored at the
    last readout time.
    """
    if not T_ec > 0:
        raise ValueError("T_ec must be > 0")
    H = code.H(sector)
    decoder = decoder or BpOsdDecoder(H)
    checker = checker or FailureChecker(code, sector)
    priors = priors or PriorModel(constant=np.full(code.n_q, 0.05))
    sim = KmcSimulator(SectorModel(H), beta, seed, dynamics=dynamics)
    fixed = None if cumulative_priors else priors.at(T_ec)
    max_density = 0.0
    density = 0.0
    for k in range(1, max_intervals + 1):
        t = k * T_ec
        sim.advance_to(t)
        density = float(sim.w.mean())
        pri = fixed if fixed is not None else priors.at(t)
        res = decoder.decode(BitVector.from_dense(sim.e), pri)
        residual = sim.w ^ res.correction.to_dense()
        if checker(residual):
            return TrialRecord(t, k, False, max_density, density)
        max_density = max(max_density, density)
    return TrialRecord(max_intervals * T_ec, max_intervals, True, max_density, density)


@dataclass
class LifetimeRecord:
    beta: float
    T_ec: float
    trials: list

    @property
    def lifetimes(self) -> np.ndarray:
        return np.array([t.lifetime for t in self.trials])

    @property
    def censored(self) -> int:
        return sum(t.censored for t in self.trials)

    @property
    def mean(self) -> float:
        return float(self.lifetimes.mean())

    @property
    def stderr(self) -> float:
        x = self.lifetimes
        return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0

    def summary(self) -> dict:
        return {
            "beta": self.beta, "T_ec": self.T_ec, "shots": len(self.trials),
            "mean": self.mean, "stderr": self.stderr, "censored": self.censored,
            "estimator": ("censored trials enter at their cap (lower bound)"
                          if self.censored else "plain mean"),
            "max_surviving_density": max((t.max_surviving_density for t in self.trials),
                                         default=0.0),
        }


def _trial_job(args):
    code, sector, beta, T_ec, priors, seed, cfg = args
    dec = BpOsdDecoder(code.H(sector), cfg["iters"], cfg["osd_order"])
    return lifetime_trial(code, sector, beta, T_ec, dec, priors, seed, cfg["max_intervals"],
                          cfg["cumulative_priors"], cfg["dynamics"])


def run_trials(code: CssCode, sector: str, beta: float, T_ec: float, priors: PriorModel,
               shots: int, seed: int, iters: int = DEFAULT_ITERS,
               osd_order: int = DEFAULT_OSD_ORDER, max_intervals: int = 10_000,
               cumulative_priors: bool = True, dynamics: str = METROPOLIS,
               workers: Optional[int] = None) -> list[TrialRecord]:
    """Independent shots with seeds ``seed XOR shot``; parallel when
    ``workers`` (or the worker environment variable) exceeds 1."""
    workers = workers or int(os.environ.get(WORKERS_ENV, "1"))
    opts = {"iters": iters, "osd_order": osd_order, "max_intervals": max_intervals,
            "cumulative_priors": cumulative_priors, "dynamics": dynamics}
    jobs = [(code, sector, beta, T_ec, priors, shot_seed(seed, s), opts) for s in range(shots)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_trial_job, jobs))
    dec = BpOsdDecoder(code.H(sector), iters, osd_order)
    chk = FailureChecker(code, sector)
    return [lifetime_trial(code, sector, beta, T_ec, dec, priors, s, max_intervals,
                           cumulative_priors, dynamics, chk)
            for (_, _, _, _, _, s, _) in jobs]


# T_ec selection ---------------------------------------------------------------

def t_ec_from_pilot(pilot_mean: float) -> float:
    """Readout interval giving about 128 intervals per pilot lifetime."""
    if not pilot_mean > 0:
        raise ValueError("pilot lifetime must be positive")
    return pilot_mean / PILOT_DIVISOR


def pilot_lifetime(code: CssCode, sector: str, beta: float, pilot_shots: int = 8,
                   seed: int = 0, priors: Optional[PriorModel] = None,
                   dynamics: str = METROPOLIS, t0: Optional[float] = None) -> float:
    """Mean lifetime from a coarse-then-fine pilot.

    The coarse pass grows its readout interval 64-fold until a failure is seen,
    which brackets the time scale. The fine pass then reads out 256 times
    per coarse estimate.
    """
    if pilot_shots < 4:
        raise ValueError("pilot_shots must be >= 4")
    dec = BpOsdDecoder(code.H(sector))
    chk = FailureChecker(code, sector)
    priors = priors or PriorModel(constant=np.full(code.n_q, 0.05))
    t = t0 if t0 is not None else 1.0 / code.n_q
    while True:
        rec = lifetime_trial(code, sector, beta, t, dec, priors, seed ^ 0x9E37, 64,
                             dynamics=dynamics, checker=chk)
        if not rec.censored:
            break
        t *= 64.0
    coarse = rec.lifetime
    fine = coarse / 256.0
    trials = [lifetime_trial(code, sector, beta, fine, dec, priors, shot_seed(seed, s),
                             1 << 16, dynamics=dynamics, checker=chk)
              for s in range(pilot_shots)]
    return float(np.mean([r.lifetime for r in trials]))


def auto_t_ec(code: CssCode, beta: float, pilot_shots: int = 8, sector: str = "X",
              seed: int = 0, priors: Optional[PriorModel] = None,
              dynamics: str = METROPOLIS) -> float:
    return t_ec_from_pilot(pilot_lifetime(code, sector, beta, pilot_shots, seed, priors,
                                          dynamics))


# ensembles --------------------------------------------------------------------

def lifetime_ensemble(cfg: ExperimentConfig, code: Optional[CssCode] = None,
                      workers: Optional[int] = None,
                      t_ec: Optional[dict] = None) -> list[LifetimeRecord]:
    """Run the configured shots at every beta and write CSV/JSON outputs.

    ``t_ec`` maps beta to a readout interval fixed elsewhere, so that a
    family of code sizes can share one interval per temperature (pilot on
    the smallest member, then pass the result here). Without it, a fixed
    ``cfg.t_ec`` is used or an automatic pilot runs on ``code``.
    """
    code = code or build_cored_code(cfg)
    records = []
    for beta in cfg.betas:
        if t_ec is not None and beta in t_ec:
            T_ec = float(t_ec[beta])
        elif cfg.t_ec == "auto":
            T_ec = auto_t_ec(code, beta, cfg.pilot_shots, cfg.sector, cfg.seed,
                             dynamics=cfg.dynamics)
        else:
            T_ec = float(cfg.t_ec)
        if cfg.priors == "calibrated":
            priors = calibrate(code, cfg.sector, beta, horizon=PILOT_DIVISOR * T_ec,
                               shots=cfg.calibration_shots, seed=cfg.seed, dynamics=cfg.dynamics)
        else:
            priors = PriorModel(constant=np.full(code.n_q, cfg.uniform_p))
        trials = run_trials(code, cfg.sector, beta, T_ec, priors, cfg.shots, cfg.seed,
                            cfg.iters, cfg.osd_order, cfg.max_intervals,
                            cfg.cumulative_priors, cfg.dynamics, workers)
        records.append(LifetimeRecord(beta, T_ec, trials))
    if cfg.out_csv:
        write_csv(records, cfg.out_csv)
    if cfg.out_json:
        Path(cfg.out_json).write_text(json.dumps(
            {"config": dataclasses.asdict(cfg), "n_q": code.n_q,
             "results": [r.summary() for r in records]}, indent=1))
    return records


def write_csv(records: Sequence[LifetimeRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beta", "T_ec", "shot", "lifetime", "censored", "decodes",
                    "max_surviving_density"])
        for r in records:
            for i, t in enumerate(r.trials):
                w.writerow([r.beta, r.T_ec, i, repr(t.lifetime), int(t.censored), t.decodes,
                            repr(t.max_surviving_density)])


def summarize_csv(path) -> dict:
    """Recompute per-beta mean and standard error from a lifetime CSV."""
    groups: dict = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            groups.setdefault(float(row["beta"]), []).append(float(row["lifetime"]))
    out = {}
    for beta, xs in groups.items():
        x = np.array(xs)
        out[beta] = {"mean": float(x.mean()),
                     "stderr": float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0}
    return out
