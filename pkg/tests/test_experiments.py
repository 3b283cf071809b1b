import csv
import json
import math

import numpy as np
import pytest

from apair.experiments import (
    SUMMARY_COLUMNS,
    ExperimentConfig,
    concentration_levels,
    lambda_q_trial,
    run_sweep,
    run_trials,
    synthesis_norm,
    verify_lp_inequality,
    verify_strong_inequality,
)
from apair.group import GroupSpec, IndexSet, Signal, random_signal
from apair.operators import dense_norm, exact_annihilation_constant, top_singular_witness

Z16 = GroupSpec(16)


def test_concentration_examples():
    z4 = GroupSpec(4)
    d0 = Signal.delta(z4, 0)
    r = concentration_levels(d0, IndexSet(z4, [0]), IndexSet.full(z4), 1.0)
    assert r.eps_T == 0 and r.eps_Omega == pytest.approx(0, abs=1e-15)
    r = concentration_levels(d0, IndexSet(z4, [0]), IndexSet(z4, [0]), 2.0)
    assert r.eps_T == 0
    assert r.eps_Omega == pytest.approx(math.sqrt(3) / 2, rel=1e-14)
    with pytest.raises(ValueError):
        concentration_levels(Signal.zeros(z4), IndexSet(z4, [0]), IndexSet(z4, [0]), 2.0)


def test_concentration_bound_holds_with_exact_constant():
    rng = np.random.default_rng(0)
    for k in range(1000):
        g = [Z16, GroupSpec(4, 2), GroupSpec(8)][k % 3]
        n = g.cardinality
        S = IndexSet(g, rng.choice(n, rng.integers(1, n), replace=False))
        Sigma = IndexSet(g, rng.choice(n, rng.integers(1, n), replace=False))
        C = exact_annihilation_constant(dense_norm(S, Sigma))
        r = concentration_levels(random_signal(g, k), S, Sigma, C)
        assert 0 <= r.eps_T <= 1 and 0 <= r.eps_Omega <= 1 + 1e-12
        assert r.satisfied


def test_strong_inequality_examples():
    S, Sigma = IndexSet(Z16, [0, 1, 2]), IndexSet(Z16, [0, 1, 5])
    assert verify_strong_inequality(Signal.zeros(Z16), S, Sigma, 3.0).slack == 0
    D = exact_annihilation_constant(dense_norm(S, Sigma))
    slacks = [verify_strong_inequality(random_signal(Z16, s), S, Sigma, D + 1).slack for s in range(200)]
    assert min(slacks) >= -1e-9
    # the top singular witness is extremal: zero slack with the sharp constant
    w = top_singular_witness(S, Sigma)
    tight = verify_strong_inequality(w, S, Sigma, D)
    assert tight.slack == pytest.approx(0, abs=1e-12)
    assert tight.slack <= min(verify_strong_inequality(random_signal(Z16, s), S, Sigma, D).slack
                              for s in range(200))


def test_lp_inequality_checker():
    E, S = IndexSet(Z16, [0, 5]), IndexSet(Z16, [1, 2])
    for seed in range(100):
        chk = verify_lp_inequality(random_signal(Z16, seed), E, S, 1.0)
        assert chk.slack >= -1e-9
    with pytest.raises(ValueError):
        verify_lp_inequality(random_signal(Z16, 0), IndexSet(Z16, range(4)), IndexSet(Z16, range(4)), 1.0)


def test_lambda_q_single_character():
    tr = lambda_q_trial(Z16, 4.0, seed=0, sigma_size=1)
    assert tr.synthesis_norm == pytest.approx(0.5, rel=1e-12)
    assert tr.analysis_norm == pytest.approx(0.5, rel=1e-12)
    assert tr.duality_gap <= 1e-12
    assert tr.extras["unnormalized_synthesis"] == pytest.approx(2.0)


def test_lambda_q_defaults_and_errors():
    tr = lambda_q_trial(Z16, 4.0, seed=3)
    assert len(tr.Sigma) == 4
    assert tr.extras["kind"] == "lower"
    with pytest.raises(ValueError):
        lambda_q_trial(Z16, 2.0, seed=0)
    with pytest.raises(ValueError):
        lambda_q_trial(Z16, 4.0, seed=0, sigma_size=17)


def test_synthesis_norm_monotone_in_sigma():
    full = synthesis_norm(IndexSet.full(Z16), 4.0, seed=1)
    # sup ||g||_4/||g||_2 over all g is attained at a delta: 1
    assert full == pytest.approx(1.0, rel=1e-9)
    rng = np.random.default_rng(2)
    for _ in range(5):
        Sigma = IndexSet(Z16, rng.choice(16, rng.integers(1, 12), replace=False))
        assert synthesis_norm(Sigma, 4.0, seed=1) <= full + 1e-12


def test_sweep_is_deterministic(tmp_path):
    cfg = ExperimentConfig(Z16, trials=3, seed=5, output_path=str(tmp_path / "a"))
    j1, c1 = run_sweep(cfg, "ms-vs-exact")
    cfg2 = ExperimentConfig(Z16, trials=3, seed=5, output_path=str(tmp_path / "b"), threads=3)
    j2, c2 = run_sweep(cfg2, "ms-vs-exact")
    assert j1.read_bytes() == j2.read_bytes()
    assert c1.read_bytes() == c2.read_bytes()
    one = ExperimentConfig(Z16, trials=1, seed=5, output_path=str(tmp_path / "c"))
    j3, _ = run_sweep(one, "ms-vs-exact")
    assert j3.read_text().splitlines()[0] == j1.read_text().splitlines()[0]


def test_sweep_record_schema(tmp_path):
    cfg = ExperimentConfig(Z16, trials=4, seed=0, output_path=str(tmp_path / "s"))
    jsonl, csv_path = run_sweep(cfg, "energy-vs-exact")
    for i, line in enumerate(jsonl.read_text().splitlines()):
        rec = json.loads(line)
        assert list(rec) == ["trial", "seed", "group", "sets", "values", "flags"]
        assert rec["trial"] == i and rec["seed"] == i
        assert rec["flags"]["dominance_ok"]
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == SUMMARY_COLUMNS


def test_ms_sweep_dominance():
    recs = run_trials(ExperimentConfig(Z16, trials=60, seed=100), "ms-vs-exact")
    for r in recs:
        if r["flags"]["condition"]:
            assert r["values"]["exact_constant"] <= r["values"]["ghobber_jaming_constant"] + 1e-9
            assert r["flags"]["sigma_below_ms"]


def test_recovery_sweep_rates():
    recs = run_trials(ExperimentConfig(GroupSpec(32), trials=20, seed=7), "recovery-rate")
    for r in recs:
        if r["flags"]["condition"]:
            assert r["values"]["empirical_rate"] <= r["values"]["contraction_rate"] + 1e-6


def test_bourgain_sweep_small():
    recs = run_trials(ExperimentConfig(Z16, trials=2, seed=1, parameters={"q": 4.0}), "bourgain")
    for r in recs:
        assert r["values"]["duality_gap"] <= 0.05


def test_sweep_errors(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(Z16, trials=0, seed=1)
    with pytest.raises(ValueError):
        run_trials(ExperimentConfig(Z16, trials=1, seed=1), "nope")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        run_sweep(ExperimentConfig(Z16, trials=1, seed=1, output_path=str(blocker / "out")), "ms-vs-exact")
