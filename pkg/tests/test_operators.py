import math

import numpy as np
import pytest

import oracles
from apair.group import INF, GroupMismatchError, GroupSpec, IndexSet, Signal, dft, random_signal
from apair.operators import (
    annihilation_report,
    apply_PQ,
    apply_QP,
    dense_norm,
    exact_annihilation_constant,
    kernel_witness,
    operator_norm,
    top_singular_witness,
    weak_annihilation_batch,
    weak_annihilation_check,
)


def _rand_pair(rng, spec, max_size=None):
    n = spec.cardinality
    m = max_size or n
    S = IndexSet(spec, rng.choice(n, rng.integers(1, m + 1), replace=False))
    Sigma = IndexSet(spec, rng.choice(n, rng.integers(1, m + 1), replace=False))
    return S, Sigma


def test_apply_pq_examples():
    g = GroupSpec(8)
    f = random_signal(g, 0)
    full = IndexSet.full(g)
    assert np.allclose(apply_PQ(f, full, full).values, f.values)
    assert np.allclose(apply_PQ(f, IndexSet.empty(g), full).values, 0)
    # support in S and spectrum in Sigma: the constant signal
    one = Signal(g, np.ones(8))
    assert np.allclose(apply_PQ(one, full, IndexSet(g, [0])).values, one.values)
    with pytest.raises(GroupMismatchError):
        apply_PQ(f, IndexSet(GroupSpec(4), [0]), full)


def test_projections_idempotent():
    g = GroupSpec(4, 2)
    rng = np.random.default_rng(3)
    S, Sigma = _rand_pair(rng, g)
    f = random_signal(g, 5)
    once = apply_QP(f, IndexSet.full(g), Sigma)
    twice = apply_QP(once, IndexSet.full(g), Sigma)
    assert np.allclose(once.values, twice.values, atol=1e-14)
    once = apply_PQ(f, S, IndexSet.full(g))
    assert np.allclose(apply_PQ(once, S, IndexSet.full(g)).values, once.values)


def test_operator_norm_examples():
    g = GroupSpec(8)
    assert operator_norm(IndexSet.full(g), IndexSet.full(g)).value == pytest.approx(1.0, abs=1e-12)
    z4 = GroupSpec(4)
    assert operator_norm(IndexSet(z4, [0]), IndexSet(z4, [0])).value == pytest.approx(0.5, abs=1e-15)
    S = IndexSet(g, [0, 1])
    Sigma = IndexSet(g, [0, 1])
    power = operator_norm(S, Sigma, method="power")
    assert power.method == "lanczos" and power.converged
    assert abs(power.value - oracles.dense_sigma(8, 1, S, Sigma)) <= 1e-9


def test_operator_norm_rejects_bad_input():
    g = GroupSpec(8)
    with pytest.raises(ValueError):
        operator_norm(IndexSet(g, [0]), IndexSet(g, [0]), tol=0)
    with pytest.raises(ValueError):
        operator_norm(IndexSet(g, [0]), IndexSet(g, [0]), method="magic")


def test_dense_cap(monkeypatch):
    g = GroupSpec(64)
    monkeypatch.setenv("APAIR_MAX_DENSE", "32")
    with pytest.raises(ValueError, match="APAIR_MAX_DENSE"):
        operator_norm(IndexSet(g, [0]), IndexSet(g, [0]), method="dense")


def test_nonconvergence_is_reported():
    g = GroupSpec(64)
    S, Sigma = IndexSet(g, range(40)), IndexSet(g, range(30))
    est = operator_norm(S, Sigma, method="power", max_iter=3)
    assert not est.converged
    assert est.iterations < 10 and est.residual > 1e-3
    # the fallback value is still a lower bound
    assert est.value <= oracles.dense_sigma(64, 1, S, Sigma) + 1e-12


def test_power_matches_dense_oracle_and_adjoint():
    rng = np.random.default_rng(20)
    for k in range(40):
        g = [GroupSpec(8), GroupSpec(16), GroupSpec(4, 2), GroupSpec(3, 3)][k % 4]
        S, Sigma = _rand_pair(rng, g)
        ref = oracles.dense_sigma(g.N, g.d, S, Sigma)
        assert abs(dense_norm(S, Sigma) - ref) <= 1e-12
        t = operator_norm(S, Sigma, method="power", side="time")
        f = operator_norm(S, Sigma, method="power", side="freq")
        assert abs(t.value - ref) <= 1e-9
        assert abs(f.value - t.value) <= 1e-9


def test_monotone_under_enlargement():
    rng = np.random.default_rng(21)
    g = GroupSpec(16)
    for _ in range(30):
        S, Sigma = _rand_pair(rng, g, 8)
        bigger = S.union(IndexSet(g, rng.choice(16, 3, replace=False)))
        assert dense_norm(bigger, Sigma) >= dense_norm(S, Sigma) - 1e-12
        bigger = Sigma.union(IndexSet(g, rng.choice(16, 3, replace=False)))
        assert dense_norm(S, bigger) >= dense_norm(S, Sigma) - 1e-12


def test_exact_annihilation_constant():
    assert exact_annihilation_constant(0.0) == 1.0
    assert exact_annihilation_constant(0.5) == pytest.approx(1 / math.sqrt(0.75), rel=1e-15)
    assert exact_annihilation_constant(1.0) == INF
    with pytest.raises(ValueError):
        exact_annihilation_constant(1.1)
    with pytest.raises(ValueError):
        exact_annihilation_constant(-0.1)


def test_strong_inequality_with_exact_constant():
    rng = np.random.default_rng(22)
    g = GroupSpec(16)
    for k in range(30):
        S, Sigma = _rand_pair(rng, g, 6)
        C = exact_annihilation_constant(dense_norm(S, Sigma))
        fs = [random_signal(g, 1000 + 10 * k + j) for j in range(5)] + [top_singular_witness(S, Sigma)]
        for f in fs:
            tail = np.linalg.norm(f.values[~S.mask]) + np.linalg.norm(dft(f).values[~Sigma.mask])
            assert f.norm() <= C * tail + 1e-9


def test_top_singular_witness_attains_sigma():
    g = GroupSpec(16)
    S, Sigma = IndexSet(g, [0, 1, 2]), IndexSet(g, [0, 1, 15])
    w = top_singular_witness(S, Sigma)
    assert np.all(w.values[~S.mask] == 0)
    assert abs(w.norm() - 1) < 1e-12
    ratio = np.linalg.norm(dft(w).values[Sigma.mask])
    assert ratio == pytest.approx(dense_norm(S, Sigma), abs=1e-12)


def test_weak_check_examples():
    z5 = GroupSpec(5)
    r = weak_annihilation_check(IndexSet(z5, [0, 1]), IndexSet(z5, [0, 1, 2]))
    assert r.annihilating and r.min_singular > 1e-8
    z4 = GroupSpec(4)
    S = IndexSet(z4, [0, 2])
    r = weak_annihilation_check(S, S)
    assert not r.annihilating
    w = kernel_witness(S, S)
    assert w.norm() > 0
    assert np.allclose(w.values[~S.mask], 0)
    assert np.allclose(dft(w).values[~S.mask], 0, atol=1e-12)
    assert weak_annihilation_check(IndexSet.empty(z4), S).annihilating
    assert not weak_annihilation_check(S, IndexSet.full(z4)).annihilating


def test_weak_check_agrees_with_kernel_brute_force():
    # a kernel signal exists iff the stacked constraint matrix has a null vector
    rng = np.random.default_rng(23)
    g = GroupSpec(8)
    M = oracles.fourier_matrix(8, 1)
    for _ in range(60):
        S, Sigma = _rand_pair(rng, g, 6)
        block = M[np.ix_(Sigma.complement().indices, S.indices)]
        has_kernel = block.shape[0] < block.shape[1] or np.linalg.matrix_rank(block, tol=1e-9) < block.shape[1]
        assert weak_annihilation_check(S, Sigma).annihilating == (not has_kernel)


def test_weak_batch_matches_single():
    rng = np.random.default_rng(24)
    g = GroupSpec(7)
    Ss = np.array([rng.choice(7, 2, replace=False) for _ in range(20)])
    Us = np.array([rng.choice(7, 4, replace=False) for _ in range(20)])
    ok, smin = weak_annihilation_batch(g, Ss, Us)
    for a, b, o, m in zip(Ss, Us, ok, smin):
        single = weak_annihilation_check(IndexSet(g, a), IndexSet(g, b))
        assert single.annihilating == o
        assert single.min_singular == pytest.approx(m, abs=1e-12)


def test_annihilation_report_bounds_dominate():
    rng = np.random.default_rng(25)
    for k in range(40):
        g = [GroupSpec(16), GroupSpec(4, 2)][k % 2]
        S, Sigma = _rand_pair(rng, g, 5)
        rep = annihilation_report(S, Sigma)
        assert rep.exact_constant == exact_annihilation_constant(rep.sigma.value)
        ids = [b.theorem_id for b in rep.theorem_bounds]
        assert "ghobber-jaming" in ids and "matolcsi-szucs" in ids
        for b in rep.theorem_bounds:
            if b.condition_satisfied:
                assert b.constant + 1 >= rep.exact_constant - 1e-9
        d = rep.to_dict()
        assert set(d) == {"sigma", "exact_constant", "theorem_bounds"}
