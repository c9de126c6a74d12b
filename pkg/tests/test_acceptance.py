"""Acceptance checks, one per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest

from spinlattice import dynamics, gns, toric
from spinlattice.experiments import run_experiment
from spinlattice.lattice import Region
from spinlattice.models import bounded_norm, heisenberg_xxz, ising
from spinlattice.sampling import ginibre, random_density_matrix, random_local_operator, spawn
from spinlattice.states import DensityState, polarization, polarization_gap
from spinlattice.tensorcore import LocalOperator, commutator, embed, operator_norm, pauli

XXZ_PARAMS = {"model": "xxz", "Jx": 1.0, "Jy": 1.0, "Jz": 0.5, "h": 0.3}


def report(capsys, n, title, ok, detail, elapsed, limit):
    passed = bool(ok) and elapsed < limit
    line = f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail} [{elapsed:.1f}s / {limit}s]"
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


def test_criterion_01_pauli_algebra(capsys):
    start = time.perf_counter()
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    sig = [pauli(a) for a in "xyz"]
    worst = 0.0
    for a, b in itertools.product(range(3), repeat=2):
        rhs = sum(2j * eps.get((a, b, c), 0) * sig[c] for c in range(3))
        worst = max(worst, float(np.max(np.abs(sig[a] @ sig[b] - sig[b] @ sig[a] - rhs))))
    elapsed = time.perf_counter() - start
    report(capsys, 1, "Pauli commutators", worst <= 1e-15, f"max deviation {worst:.1e} over 9 pairs", elapsed, 1)


def test_criterion_02_gns(capsys):
    start = time.perf_counter()
    vector = np.diag([1.0, 0.0]).astype(complex)
    mixed = np.diag([0.3, 0.7]).astype(complex)
    rep_v, rep_m = gns.gns_construct(2, vector), gns.gns_construct(2, mixed)
    dims = (rep_v.gns_dim, gns.commutant_dimension(rep_v), rep_m.gns_dim, gns.commutant_dimension(rep_m))
    ops = [ginibre(2, r) for r in spawn(2, 100)]
    residual = max(gns.reconstruction_residual(rep, rho, ops) for rep, rho in ((rep_v, vector), (rep_m, mixed)))
    ok = dims == (2, 1, 4, 4) and residual <= 1e-10
    elapsed = time.perf_counter() - start
    detail = f"(gns, commutant) = {dims[:2]} and {dims[2:]}, reconstruction residual {residual:.1e}"
    report(capsys, 2, "GNS dimensions", ok, detail, elapsed, 5)


def test_criterion_03_purity_irreducibility(capsys):
    start = time.perf_counter()
    exceptions = 0
    n_pure = 0
    for r in spawn(3, 200):
        rho = random_density_matrix(2, r)
        is_pure = float(np.linalg.norm(rho @ rho - rho, 2)) <= 1e-9
        cdim = gns.commutant_dimension(gns.gns_construct(2, rho))
        exceptions += is_pure != (cdim == 1)
        n_pure += is_pure
    elapsed = time.perf_counter() - start
    detail = f"{exceptions} exceptions in 200 states ({n_pure} pure)"
    report(capsys, 3, "purity iff irreducible", exceptions == 0, detail, elapsed, 10)


def test_criterion_04_kms(capsys):
    start = time.perf_counter()
    config = {
        "experiment": "kms-check",
        "model": {**XXZ_PARAMS, "L": 8},
        "grid": {"beta": [0.5, 1.0, 2.0], "t": [0.0, 0.3, 1.0]},
        "options": {"samples": 50},
        "seed": 4,
    }
    out = run_experiment(config, 1)
    gibbs = max(r[4] for r in out.rows if r[0] == "gibbs")
    mixed = max(r[4] for r in out.rows if r[0] == "mixed")
    elapsed = time.perf_counter() - start
    ok = gibbs <= 1e-8 and mixed > 1e-2
    detail = f"Gibbs max residual {gibbs:.1e}, maximally mixed witness {mixed:.3g}"
    report(capsys, 4, "KMS condition", ok, detail, elapsed, 120)


def test_criterion_05_free_energy(capsys):
    start = time.perf_counter()
    config = {"experiment": "free-energy", "model": {**XXZ_PARAMS, "L": 3}, "options": {"samples": 500}, "seed": 5}
    out = run_experiment(config, 1)
    residual = max(r[5] for r in out.rows)
    f_gibbs = out.rows[0][4]
    min_gap = min(r[3] - f_gibbs for r in out.rows)
    elapsed = time.perf_counter() - start
    ok = residual <= 1e-9 and min_gap >= -1e-9 and out.ok
    detail = f"identity residual {residual:.1e}, min F(rho) - F(rho_beta) = {min_gap:.3g}"
    report(capsys, 5, "free-energy identity", ok, detail, elapsed, 30)


def test_criterion_06_ground_state(capsys):
    start = time.perf_counter()
    config = {"experiment": "ground-check", "model": {**XXZ_PARAMS, "L": 6}, "options": {"samples": 500}, "seed": 6}
    out = run_experiment(config, 1).payload
    elapsed = time.perf_counter() - start
    ok = out["ground_residual"] >= -1e-9 and out["excited_witness_residual"] < -1e-3
    detail = f"ground residual {out['ground_residual']:.3g}, excited witness {out['excited_witness_residual']:.3g}"
    report(capsys, 6, "ground-state criterion", ok, detail, elapsed, 60)


def test_criterion_07_passivity(capsys):
    start = time.perf_counter()
    config = {
        "experiment": "passivity",
        "model": {**XXZ_PARAMS, "L": 6},
        "grid": {"beta": [0.5, 2.0]},
        "options": {"samples": 500},
        "seed": 7,
    }
    out = run_experiment(config, 1)
    worst = min(r[2] for r in out.rows)
    elapsed = time.perf_counter() - start
    report(capsys, 7, "passivity", worst >= -1e-8, f"smallest value {worst:.3g} over 1000 checks", elapsed, 60)


def test_criterion_08_lieb_robinson(capsys):
    start = time.perf_counter()
    phi = heisenberg_xxz(1.0, 1.0, 0.5, 0.3)
    window = Region.chain(10)
    a = LocalOperator.pauli_string({(0,): "z"})
    bs = {(x,): LocalOperator.pauli_string({(x,): "z"}) for x in range(1, 10)}
    grid = [round(0.1 * k, 10) for k in range(21)]
    params = dynamics.lr_params(phi, lam=1.0, N=2)
    sweep = dynamics.commutator_sweep(phi, window, a, bs, grid, params)
    violations = sum(r.empirical > r.bound_rough for r in sweep)
    at_one = [r.empirical for r in sorted(sweep, key=lambda r: r.dist) if r.t == 1.0]
    decays = all(x > y for x, y in zip(at_one, at_one[1:]))
    est = dynamics.velocity_estimate(sweep, 0.1, params)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and decays and est.resolved and est.v_emp <= est.v_bound
    v_emp = f"{est.v_emp:.3g}" if est.resolved else est.reason
    detail = f"{violations} bound violations, decay at t=1 {decays}, v_emp {v_emp} <= v_bound {est.v_bound:.4g}"
    report(capsys, 8, "Lieb-Robinson sweep", ok, detail, elapsed, 300)


def test_criterion_09_volume_convergence(capsys):
    start = time.perf_counter()
    phi = heisenberg_xxz(1.0, 1.0, 0.5, 0.3)
    windows = [Region.interval(-r, r) for r in range(1, 6)]
    deltas = dynamics.volume_convergence(phi, LocalOperator.pauli_string({(0,): "z"}), 0.5, windows)
    decreasing = all(x > y for x, y in zip(deltas, deltas[1:]))
    # the largest window is the proxy, so its own delta is zero by construction;
    # the last informative delta is the one for the next-largest window
    final = deltas[-2]
    elapsed = time.perf_counter() - start
    ok = decreasing and final < 1e-6
    detail = "deltas " + ", ".join(f"{d:.3g}" for d in deltas) + f"; final delta {final:.3g} vs 1e-6"
    report(capsys, 9, "volume convergence", ok, detail, elapsed, 120)


def test_criterion_10_taylor_soundness(capsys):
    start = time.perf_counter()
    phi = heisenberg_xxz(1.0, 1.0, 0.5, 0.3)
    window = Region.chain(6)
    # admissible times: tail ratio 2|t| ||Phi|| e^{lam (N - 1)} / lam < 1 at lam = 1/(N - 1) = 1
    t_max = 1.0 / (2 * bounded_norm(phi.restricted(window)) * math.e)
    worst_margin = math.inf
    failures = 0
    for r in spawn(10, 100):
        a = random_local_operator(window, r, 2)
        t = float(r.uniform(-0.95, 0.95)) * t_max
        order = int(r.integers(0, 9))
        res = dynamics.taylor_evolve(phi, a, t, order, window=window)
        exact = dynamics.heisenberg_evolve(phi, window, a, t)
        err = operator_norm(embed(res.operator, window).matrix - exact.matrix)
        failures += err > res.error_bound + 1e-10
        worst_margin = min(worst_margin, res.error_bound - err)
    elapsed = time.perf_counter() - start
    detail = f"{failures} unsound cases of 100, smallest margin {worst_margin:.3g}"
    report(capsys, 10, "Taylor error bound", failures == 0, detail, elapsed, 120)


def test_criterion_11_toric_code(capsys):
    start = time.perf_counter()
    l2, l3 = toric.ToricLattice(2), toric.ToricLattice(3)
    degs = (
        toric.ground_space_dimension(l2, "projector"),
        toric.ground_space_dimension(l2, "eigensolve"),
        toric.ground_space_dimension(l3, "gf2"),
    )
    oracle = toric.code_space_state(l2)
    mismatches = 0
    count = 0
    for p in toric.pauli_strings_up_to_weight(l2, 4):
        count += 1
        mismatches += abs(toric.ground_expectation(l2, p) - oracle.expect(p.to_local())) > 1e-10
    noncommuting = 0
    for lat in (l2, l3):
        verts = [(x, y) for y in range(lat.L) for x in range(lat.L)]
        for v, f in itertools.product(verts, repeat=2):
            c = commutator(toric.star_operator(lat, v), toric.plaquette_operator(lat, f))
            noncommuting += bool(np.any(c.matrix))
    elapsed = time.perf_counter() - start
    ok = degs == (4, 4, 4) and mismatches == 0 and noncommuting == 0
    detail = f"degeneracy {degs}, {mismatches} oracle mismatches in {count} strings, {noncommuting} non-commuting pairs"
    report(capsys, 11, "toric code", ok, detail, elapsed, 180)


def test_criterion_12_polarization(capsys):
    start = time.perf_counter()
    gaps = {L: polarization_gap(L) for L in (3, 5, 7)}
    up, down = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    flipped = polarization(DensityState.product(Region.interval(-1, 1), [up, down, up]))
    elapsed = time.perf_counter() - start
    ok = all(g == (1.0, -1.0) for g in gaps.values()) and abs(flipped - 1 / 3) <= 1e-15
    report(capsys, 12, "polarization", ok, f"gaps {gaps}, single flip {flipped!r}", elapsed, 1)


def test_criterion_13_clustering(capsys):
    start = time.perf_counter()
    res = dynamics.clustering_sweep(
        ising(h=0.0, J=1.0, g=3.0), Region.chain(10), lambda s: LocalOperator.pauli_string({s: "z"})
    )
    elapsed = time.perf_counter() - start
    ok = res.gap > 0.5 and res.mu_fit is not None and res.mu_fit > 0 and res.monotone
    mu = f"{res.mu_fit:.4g}" if res.mu_fit is not None else "none"
    detail = f"gap {res.gap:.4g}, mu_fit {mu}, monotone for dist >= 2 {res.monotone}"
    report(capsys, 13, "exponential clustering", ok, detail, elapsed, 120)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
