"""Acceptance criteria 1 to 10 at their stated tolerances.

Each test records one ``[PASS]``/``[FAIL]`` line; the lines are printed as
the test runs and again in the pytest terminal summary.
"""

import time

import numpy as np
import pytest

from specc import experiments
from specc.linalg import subspace_distance, top_k_eigen
from specc.metrics import nvi
from specc.selection import make_folds, project_p, select_k
from specc.simulate import planted_partition
from specc.spca import FitConfig, spca_eig_step, v_to_occam

from conftest import nvi_oracle, random_binary_membership, random_symmetric

RESULTS = {}


def record(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {name}: {detail}"
    RESULTS[number] = line
    print(line)
    assert passed, line


def lstsq_oracle(A, V):
    K = V.shape[1]
    coef, *_ = np.linalg.lstsq(np.kron(V, V), A.ravel(), rcond=None)
    return V @ coef.reshape(K, K) @ V.T


def test_criterion_01_fixed_point():
    res = experiments.fixed_point(instances=5, n=200, K=3)
    dev = max(res.details["deviations"])
    record(1, "fixed point", res.passed, f"max deviation {dev:.2e} (<= 1e-10), {res.seconds:.2f}s (< 5s)")


def test_criterion_02_one_step_recovery():
    res = experiments.theorem1(trials=50)
    d = res.details
    record(2, "one-step recovery", res.passed,
           f"{d['hits']}/{d['trials']} exact (>= 49), c1 = {d['c1']:.3f}, {res.seconds:.1f}s (< 30s)")


def test_criterion_03_identifiability():
    rng = np.random.default_rng(3)
    support_ok, worst = 0, 0.0
    for _ in range(20):
        n, K = int(rng.integers(40, 200)), int(rng.integers(2, 6))
        V = experiments.random_pure_basis(n, K, rng)
        P = V @ experiments.random_symmetric_b(K, rng) @ V.T
        perm = rng.permutation(K)
        W = (V * rng.uniform(0.1, 10.0, K))[:, perm]
        Wt = W / np.linalg.norm(W, axis=0)
        lam = 0.5 * experiments.min_support_ratio(Wt)
        out = spca_eig_step(P, Wt, lam)
        # the rescaled, permuted basis is itself a sparse eigenbasis with V's support
        support_ok += np.array_equal(out != 0, (V != 0)[:, perm])
        theta, Z, B = v_to_occam(W, P)
        Wrec = theta[:, None] * Z
        worst = max(worst, float(np.max(np.abs(Wrec @ B @ Wrec.T - P))))
    record(3, "rescaling/permutation support + reconstruction", support_ok == 20 and worst <= 1e-8,
           f"support identical on {support_ok}/20, max reconstruction error {worst:.2e} (<= 1e-8)")


def test_criterion_04_projection_estimator():
    rng = np.random.default_rng(4)
    fro, idem, inv = 0.0, 0.0, 0.0
    for seed in range(20):
        A = np.triu(rng.random((100, 100)) < 0.1, 1).astype(float)
        A = A + A.T
        V = np.abs(rng.standard_normal((100, 3)))
        P = project_p(A, V)
        fro = max(fro, float(np.linalg.norm(P - lstsq_oracle(A, V))))
        idem = max(idem, float(np.max(np.abs(project_p(P, V) - P))))
        G = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        inv = max(inv, float(np.max(np.abs(project_p(A, V @ G) - P))))
    record(4, "projection estimator", fro <= 1e-8 and idem <= 1e-10 and inv <= 1e-10,
           f"oracle {fro:.1e} (<= 1e-8), idempotence {idem:.1e}, basis invariance {inv:.1e} (<= 1e-10)")


def test_criterion_05_nvi_oracle():
    rng = np.random.default_rng(5)
    err, sym_ok, perm_ok = 0.0, True, True
    for _ in range(100):
        n, K = int(rng.integers(4, 51)), int(rng.integers(1, 5))
        x, y = random_binary_membership(n, K, rng), random_binary_membership(n, K, rng)
        v = nvi(x, y)
        err = max(err, abs(v - nvi_oracle(x, y)))
        sym_ok &= nvi(y, x) == v
        perm_ok &= nvi(x[:, rng.permutation(K)], y[:, rng.permutation(K)]) == v
    record(5, "NVI brute-force equivalence", err <= 1e-12 and sym_ok and perm_ok,
           f"max |nvi - oracle| {err:.1e} (<= 1e-12), symmetry exact {sym_ok}, permutation exact {perm_ok}")


def test_criterion_06_simulation_recovery():
    t0 = time.perf_counter()
    means = {}
    for algo in ("eig", "cd"):
        for overlap in (0.0, 0.1):
            means[(algo, overlap)] = float(np.mean(experiments.scenario_recovery(0.0, overlap, algo)))
    secs = time.perf_counter() - t0
    ok = all(m >= 0.95 for m in means.values()) and secs < 300
    text = ", ".join(f"{a} p={o}: {m:.4f}" for (a, o), m in means.items())
    record(6, "recovery at rho=0", ok, f"mean NVI {text} (>= 0.95), {secs:.0f}s (< 300s)")


def test_criterion_07_karate():
    res = experiments.karate("eig")
    d = res.details
    record(7, "karate", res.passed, f"overlap {d['overlap_count']} (== 0), NVI {d['nvi']:.6f} (== 1), "
           f"lambda {d['lam']:g}, {res.seconds:.2f}s (< 10s)")


def test_criterion_08_polblogs():
    res = experiments.polblogs(algorithm="cd")
    d = res.details
    if "error" in d:
        detail = f"fixture unavailable: {d['error']}"
    else:
        detail = (f"LCC {d['n']} (== 1222), overlap {d['overlap_count']} (<= 60), "
                  f"misclustering {d['misclustering']} (<= 80), {res.seconds:.1f}s (< 120s)")
    record(8, "polblogs", res.passed, detail)


def test_criterion_09_eigensolver():
    rng = np.random.default_rng(9)
    val_err, sub_err = 0.0, 0.0
    for i in range(20):
        n, k = int(rng.integers(20, 201)), int(rng.integers(1, 6))
        if i % 2:
            A, _ = planted_partition(n, 3, 0.3, 0.05, seed=i)
            A = A.toarray()
        else:
            A = random_symmetric(n, rng)
        ep = top_k_eigen(A, k, tol=1e-10)
        w, U = np.linalg.eigh(A)
        idx = np.argsort(-np.abs(w))[:k]
        val_err = max(val_err, float(np.max(np.abs(np.sort(ep.values) - np.sort(w[idx])))))
        sub_err = max(sub_err, subspace_distance(ep.vectors, U[:, idx]))
    record(9, "eigensolver", val_err <= 1e-8 and sub_err <= 1e-6,
           f"eigenvalue error {val_err:.1e} (<= 1e-8), subspace distance {sub_err:.1e} (<= 1e-6)")


def test_criterion_10_k_selection():
    t0 = time.perf_counter()
    picks = []
    for seed in range(20):
        g, _ = planted_partition(150, 3, 0.9, 0.02, seed=seed)
        k, _ = select_k(g, range(1, 6), plan=make_folds(150, 10, seed), cfg=FitConfig(seed=seed))
        picks.append(k)
    secs = time.perf_counter() - t0
    hits = picks.count(3)
    record(10, "K selection", hits >= 18 and secs < 300,
           f"K=3 on {hits}/20 draws (>= 18), picks {picks}, {secs:.0f}s (< 300s)")


@pytest.fixture(scope="module", autouse=True)
def _summary(request):
    yield
    request.config._specc_acceptance = [RESULTS[k] for k in sorted(RESULTS)]
