import json

import numpy as np
import pytest

from coredcodes.harness import (ExperimentConfig, LifetimeRecord, PriorModel, TrialRecord,
                                auto_t_ec, build_cored_code, calibrate, lifetime_ensemble,
                                lifetime_trial, pilot_lifetime, run_trials, sample_flips,
                                summarize_csv, t_ec_from_pilot)

FLAT = PriorModel(constant=np.full(13, 0.05))


def test_config_validation_and_json():
    with pytest.raises(ValueError):
        ExperimentConfig(shots=0)
    with pytest.raises(ValueError):
        ExperimentConfig(betas=[0.0])
    with pytest.raises(ValueError):
        ExperimentConfig(t_ec=-1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(sector="Y")
    cfg = ExperimentConfig(family="rep", betas=[1.0, 2.0], t_ec=0.5, shots=3)
    back = ExperimentConfig.from_json(cfg.to_json(), shots=5)
    assert back.shots == 5 and back.betas == [1.0, 2.0] and back.t_ec == 0.5


def test_build_cored_code_families():
    assert build_cored_code(ExperimentConfig(family="rep", rep_length=3)).n_q == 13
    assert build_cored_code(ExperimentConfig(generation=(1, 0))).n_q == 181
    with pytest.raises(ValueError):
        build_cored_code(ExperimentConfig(family="torus"))


def test_large_beta_survives(cored13):
    recs = run_trials(cored13, "X", 50.0, 1.0, FLAT, shots=16, seed=0, max_intervals=100)
    assert all(r.censored and r.decodes == 100 for r in recs)
    assert all(r.lifetime == 100.0 for r in recs)


def test_zero_beta_fails_fast(cored13):
    recs = run_trials(cored13, "X", 0.0, 1.0, FLAT, shots=16, seed=0)
    assert all(not r.censored for r in recs)
    assert np.mean([r.decodes for r in recs]) < 5


def test_failure_time_is_readout_time(cored13):
    r = lifetime_trial(cored13, "Z", 1.0, 0.25, priors=FLAT, seed=3)
    assert r.lifetime == pytest.approx(r.decodes * 0.25)
    assert 0.0 <= r.max_surviving_density <= 1.0


def test_trials_are_reproducible(cored13):
    a = run_trials(cored13, "X", 1.5, 0.1, FLAT, shots=8, seed=11)
    b = run_trials(cored13, "X", 1.5, 0.1, FLAT, shots=8, seed=11)
    assert [x.lifetime for x in a] == [x.lifetime for x in b]
    c = run_trials(cored13, "X", 1.5, 0.1, FLAT, shots=8, seed=12)
    assert [x.lifetime for x in a] != [x.lifetime for x in c]


def test_parallel_matches_serial(cored13):
    a = run_trials(cored13, "X", 1.5, 0.1, FLAT, shots=6, seed=2, workers=1)
    b = run_trials(cored13, "X", 1.5, 0.1, FLAT, shots=6, seed=2, workers=2)
    assert [x.lifetime for x in a] == [x.lifetime for x in b]


def test_fixed_and_cumulative_priors_both_run(cored13):
    pm = PriorModel(tau=np.full(13, 3.0))
    for cumulative in (True, False):
        r = lifetime_trial(cored13, "X", 1.0, 0.1, priors=pm, seed=1,
                           cumulative_priors=cumulative)
        assert r.decodes >= 1
    assert pm.at(0.1).p[0] < pm.at(10.0).p[0]


def test_identical_trials_summary():
    rec = LifetimeRecord(1.0, 2.0, [TrialRecord(8.0, 4, False, 0.1, 0.2)] * 5)
    s = rec.summary()
    assert s["mean"] == 8.0 and s["stderr"] == 0.0 and s["censored"] == 0


def test_censored_summary_is_flagged():
    rec = LifetimeRecord(1.0, 1.0, [TrialRecord(5.0, 5, True, 0.0, 0.0),
                                    TrialRecord(2.0, 2, False, 0.0, 0.0)])
    s = rec.summary()
    assert s["censored"] == 1 and "censored" in s["estimator"]


def test_t_ec_from_pilot():
    assert t_ec_from_pilot(12800.0) == 100.0
    assert t_ec_from_pilot(2.0) > t_ec_from_pilot(1.0)
    with pytest.raises(ValueError):
        t_ec_from_pilot(0.0)


def test_pilot_needs_four_shots(cored13):
    with pytest.raises(ValueError):
        pilot_lifetime(cored13, "X", 1.0, pilot_shots=3)


def test_auto_t_ec_gives_about_a_hundred_intervals(cored13):
    T = auto_t_ec(cored13, 2.0, pilot_shots=8, seed=1)
    recs = run_trials(cored13, "X", 2.0, T, FLAT, shots=64, seed=7)
    assert np.mean([r.decodes for r in recs]) >= 100


def test_sample_flips_and_calibration(cored13):
    times = [0.5, 1.0, 2.0]
    flips = sample_flips(cored13, "X", 1.0, times, shots=4, seed=0)
    assert flips.shape == (4, 3, 13) and set(np.unique(flips)) <= {0, 1}
    pm = calibrate(cored13, "X", 1.0, horizon=5.0, shots=32, samples=10)
    assert pm.tau.shape == (13,) and np.all(pm.tau > 0)


def test_ensemble_outputs(tmp_path, cored13):
    cfg = ExperimentConfig(family="rep", betas=[1.0, 2.0], t_ec=0.05, shots=6, seed=4,
                           priors="uniform", out_csv=str(tmp_path / "l.csv"),
                           out_json=str(tmp_path / "l.json"))
    recs = lifetime_ensemble(cfg)
    summary = json.loads((tmp_path / "l.json").read_text())
    assert summary["n_q"] == 13 and len(summary["results"]) == 2
    again = summarize_csv(tmp_path / "l.csv")
    for r in recs:
        assert again[r.beta]["mean"] == pytest.approx(r.mean, rel=1e-12)
        assert again[r.beta]["stderr"] == pytest.approx(r.stderr, rel=1e-12)
    shared = lifetime_ensemble(cfg, code=cored13, t_ec={1.0: 0.05, 2.0: 0.05})
    assert [r.lifetimes.tolist() for r in shared] == [r.lifetimes.tolist() for r in recs]
