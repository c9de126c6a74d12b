"""Experiment definitions behind the command line runner.

Each experiment maps a validated config dict to an :class:`Outcome`: either
a table (fixed column order) or a JSON payload, plus an invariant verdict.
Random draws come from ``SeedSequence(seed).spawn``, one child per sample, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from . import dynamics, gns, toric
from .lattice import Region
from .models import Interaction, heisenberg_xxz, ising, local_hamiltonian
from .sampling import ginibre, random_density_matrix, random_local_operator, random_local_unitary, spawn
from .states import (
    DensityState,
    free_energy,
    gibbs_free_energy,
    gibbs_state,
    ground_state_residual,
    kms_residual,
    passivity_check,
    relative_entropy,
)
from .tensorcore import LocalOperator, Spectrum

DEFAULT_TOLERANCES = {
    "kms": 1e-8,
    "free_energy": 1e-9,
    "ground": 1e-9,
    "passivity": 1e-8,
    "lr": 1e-12,
    "reconstruction": 1e-10,
}

DEFAULT_MODELS = {
    "clustering": {"model": "ising", "h": 0.0, "J": 1.0, "g": 3.0, "L": 10},
    "toric": {"model": "toric", "L": 2},
    "gns": {"model": "none"},
    "free-energy": {"model": "xxz", "Jx": 1.0, "Jy": 1.0, "Jz": 0.5, "h": 0.3, "L": 3},
}
XXZ_DEFAULT = {"model": "xxz", "Jx": 1.0, "Jy": 1.0, "Jz": 0.5, "h": 0.3, "L": 8}


def load_schema() -> dict:
    text = resources.files("spinlattice").joinpath("schema/config.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_config(config: Any) -> None:
    """Raise ``jsonschema.ValidationError`` for anything the schema rejects."""
    jsonschema.validate(config, load_schema())


def default_config(experiment: str) -> dict:
    model = dict(DEFAULT_MODELS.get(experiment, XXZ_DEFAULT))
    if experiment in ("ground-check", "passivity"):
        model["L"] = 6
    if experiment == "lr-sweep" or experiment == "velocity":
        model["L"] = 8
    return {"experiment": experiment, "model": model, "seed": 0}


@dataclass
class Outcome:
    columns: Optional[List[str]] = None
    rows: List[tuple] = field(default_factory=list)
    payload: Optional[Dict[str, Any]] = None
    summary: Dict[str, Any] = field(default_factory=dict)
    ok: bool = True
    message: str = ""

    @property
    def kind(self) -> str:
        return "csv" if self.columns is not None else "json"


# helpers ---------------------------------------------------------------------


def build_model(desc: dict) -> Tuple[Interaction, Region]:
    kind = desc["model"]
    L = int(desc.get("L", 8))
    if kind == "xxz":
        phi = heisenberg_xxz(desc.get("Jx", 1.0), desc.get("Jy", 1.0), desc.get("Jz", 1.0), desc.get("h", 0.0))
    elif kind == "ising":
        phi = ising(desc.get("h", 1.0), desc.get("J", 0.0), desc.get("g", 0.0))
    else:
        raise ValueError(f"model {kind!r} has no chain interaction")
    return phi, Region.chain(L)


def _tol(config: dict, name: str) -> float:
    return float(config.get("tolerances", {}).get(name, DEFAULT_TOLERANCES[name]))


def _opt(config: dict, name: str, default):
    return config.get("options", {}).get(name, default)


def _grid(config: dict, name: str, default):
    return list(config.get("grid", {}).get(name, default))


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _site_op(site, axis: str) -> LocalOperator:
    return LocalOperator.pauli_string({site: axis})


# experiments -----------------------------------------------------------------


def run_kms_check(config: dict, jobs: int) -> Outcome:
    phi, window = build_model(config["model"])
    h = local_hamiltonian(phi, window)
    betas = _grid(config, "beta", [0.5, 1.0, 2.0])
    ts = _grid(config, "t", [0.0, 0.3, 1.0])
    n = int(_opt(config, "samples", 50))
    size = int(_opt(config, "support", 2))
    pairs = [
        (random_local_operator(window, r, size, hermitian=True), random_local_operator(window, r, size, hermitian=True))
        for r in spawn(config.get("seed", 0), n)
    ]
    states = {("gibbs", b): gibbs_state(h, b) for b in betas}
    states[("mixed", 1.0)] = DensityState.maximally_mixed(window)
    spec = Spectrum(h)
    cells = [(label, b, t, k) for (label, b) in states for t in ts for k in range(n)]

    def cell(c):
        label, b, t, k = c
        a, bb = pairs[k]
        return (label, b, t, k, kms_residual(h, b, a, bb, t, omega=states[(label, b)], spectrum=spec))

    rows = _pmap(cell, cells, jobs)
    worst = max(r[4] for r in rows if r[0] == "gibbs")
    tol = _tol(config, "kms")
    summary = {"residual": worst, "beta": betas, "t": ts, "dim": h.dim, "seed": config.get("seed", 0)}
    return Outcome(
        ["state", "beta", "t", "pair", "residual"],
        rows,
        summary=summary,
        ok=worst <= tol,
        message=f"largest Gibbs residual {worst:.3g} (tolerance {tol:g})",
    )


def run_free_energy(config: dict, jobs: int) -> Outcome:
    phi, window = build_model(config["model"])
    h = local_hamiltonian(phi, window)
    betas = _grid(config, "beta", [1.0])
    n = int(_opt(config, "samples", 500))
    dim = phi.site_dim ** len(window)
    rhos = [DensityState(window, random_density_matrix(dim, r)) for r in spawn(config.get("seed", 0), n)]
    tol = _tol(config, "free_energy")
    rows = []
    ok = True
    for b in betas:
        gibbs = gibbs_state(h, b)
        phi_b = gibbs_free_energy(h, b)
        f_gibbs = free_energy(gibbs, h, b)
        ok &= abs(f_gibbs - phi_b) <= tol

        def cell(k):
            s_rel = relative_entropy(gibbs, rhos[k])
            f = free_energy(rhos[k], h, b)
            return (b, k, s_rel, f, f_gibbs, abs(s_rel - b * (f - phi_b)))

        chunk = _pmap(cell, list(range(n)), jobs)
        ok &= all(r[5] <= tol and r[3] >= r[4] - tol for r in chunk)
        rows.extend(chunk)
    worst = max(r[5] for r in rows)
    summary = {"residual": worst, "beta": betas, "dim": dim, "seed": config.get("seed", 0)}
    return Outcome(
        ["beta", "sample", "relative_entropy", "free_energy", "gibbs_free_energy", "residual"],
        rows,
        summary=summary,
        ok=bool(ok),
        message=f"largest identity residual {worst:.3g}",
    )


def excited_state_witness(phi: Interaction, window: Region) -> float:
    """``-i w(A* delta(A))`` for ``w`` the first excited state and ``A = |E0><E1|``."""
    spec = Spectrum(local_hamiltonian(phi, window))
    psi0, psi1 = spec.vectors[:, 0], spec.vectors[:, 1]
    excited = DensityState.pure(window, psi1)
    lowering = LocalOperator(window, np.outer(psi0, psi1.conj()))
    return ground_state_residual(excited, phi, [lowering])


def run_ground_check(config: dict, jobs: int) -> Outcome:
    phi, window = build_model(config["model"])
    spec = Spectrum(local_hamiltonian(phi, window))
    ground = DensityState.pure(window, spec.vectors[:, 0])
    n = int(_opt(config, "samples", 500))
    size = int(_opt(config, "support", 2))
    samples = [random_local_operator(window, r, size) for r in spawn(config.get("seed", 0), n)]
    values = _pmap(lambda a: ground_state_residual(ground, phi, [a]), samples, jobs)
    residual = min(values)
    witness = excited_state_witness(phi, window)
    tol = _tol(config, "ground")
    payload = {
        "ground_residual": residual,
        "excited_witness_residual": witness,
        "gap": float(spec.energies[1] - spec.energies[0]),
        "samples": n,
    }
    return Outcome(payload=payload, ok=residual >= -tol, message=f"ground residual {residual:.3g}")


def run_passivity(config: dict, jobs: int) -> Outcome:
    phi, window = build_model(config["model"])
    h = local_hamiltonian(phi, window)
    betas = _grid(config, "beta", [0.5, 2.0])
    n = int(_opt(config, "samples", 500))
    size = int(_opt(config, "support", 2))
    unitaries = [random_local_unitary(window, r, size) for r in spawn(config.get("seed", 0), n)]
    rows = []
    for b in betas:
        omega = gibbs_state(h, b)
        values = _pmap(lambda u: passivity_check(omega, phi, [u]), unitaries, jobs)
        rows.extend((b, k, v) for k, v in enumerate(values))
    worst = min(r[2] for r in rows)
    tol = _tol(config, "passivity")
    summary = {"residual": worst, "beta": betas, "dim": h.dim, "seed": config.get("seed", 0)}
    return Outcome(
        ["beta", "sample", "value"], rows, summary=summary, ok=worst >= -tol, message=f"smallest value {worst:.3g}"
    )


def _sweep(config: dict, jobs: int):
    phi, window = build_model(config["model"])
    axis = _opt(config, "observable", "z")
    origin = window.sites[0]
    dists = _grid(config, "dist", list(range(1, len(window))))
    b_family = {}
    for d in dists:
        site = (origin[0] + d,)
        if site not in window:
            raise ValueError(f"distance {d} leaves the window")
        b_family[site] = _site_op(site, axis)
    ts = _grid(config, "t", [round(0.1 * k, 10) for k in range(21)])
    params = dynamics.lr_params(phi, float(_opt(config, "lambda", 1.0)), int(_opt(config, "N", phi.site_dim)))
    records = dynamics.commutator_sweep(phi, window, _site_op(origin, axis), b_family, ts, params, jobs)
    return records, params


def run_lr_sweep(config: dict, jobs: int) -> Outcome:
    records, params = _sweep(config, jobs)
    tol = _tol(config, "lr")
    rows = [(r.t, r.dist, r.empirical, r.bound_rough, r.bound_sharp) for r in records]
    bad = sum(r.empirical > r.bound_rough + tol for r in records)
    return Outcome(
        ["t", "dist", "empirical", "bound_rough", "bound_sharp"],
        rows,
        summary={"violations": bad, "lambda": params.lam, "phi_norm_lambda": params.phi_norm_lambda},
        ok=bad == 0,
        message=f"{bad} records above the rough bound",
    )


def run_velocity(config: dict, jobs: int) -> Outcome:
    records, params = _sweep(config, jobs)
    est = dynamics.velocity_estimate(records, float(_opt(config, "threshold", 0.1)), params)
    payload = {
        "v_emp": est.v_emp,
        "v_bound": est.v_bound,
        "threshold": est.threshold,
        "resolved": est.resolved,
        "crossings": {str(d): t for d, t in sorted(est.crossings.items())},
    }
    if not est.resolved:
        payload["reason"] = est.reason
    ok = not est.resolved or est.v_emp <= est.v_bound
    return Outcome(payload=payload, ok=ok, message=est.reason or f"v_emp {est.v_emp:.4g}")


def run_clustering(config: dict, jobs: int) -> Outcome:
    phi, window = build_model(config["model"])
    axis = _opt(config, "observable", "z")
    res = dynamics.clustering_sweep(phi, window, lambda s: _site_op(s, axis))
    payload = {
        "mu_fit": res.mu_fit,
        "gap": res.gap,
        "degenerate": res.degenerate,
        "monotone": res.monotone,
        "points": [[d, c] for d, c in res.points],
    }
    return Outcome(payload=payload, message="ground state degenerate, fit skipped" if res.degenerate else "")


def run_gns(config: dict, jobs: int) -> Outcome:
    D = int(_opt(config, "D", 2))
    weights = np.array(_opt(config, "weights", [1.0] + [0.0] * (D - 1)), dtype=float)
    if len(weights) != D or weights.sum() <= 0:
        raise ValueError("weights must list D nonnegative numbers with a positive sum")
    rho = np.diag(weights / weights.sum()).astype(complex)
    rep = gns.gns_construct(D, rho)
    n = int(_opt(config, "samples", 100))
    ops = [ginibre(D, r) for r in spawn(config.get("seed", 0), n)]
    residual = gns.reconstruction_residual(rep, rho, ops)
    is_pure, cdim = gns.purity_irreducibility_crosscheck(D, rho)
    tol = _tol(config, "reconstruction")
    payload = {
        "D": D,
        "gns_dim": rep.gns_dim,
        "commutant_dim": cdim,
        "is_pure": is_pure,
        "reconstruction_residual": residual,
    }
    return Outcome(payload=payload, ok=residual <= tol, message=f"reconstruction residual {residual:.3g}")


def _json_scalar(c: complex):
    return c.real if c.imag == 0 else f"{format(c.real, '.17g')}{c.imag:+.17g}j"


def run_toric(config: dict, jobs: int) -> Outcome:
    lat = toric.ToricLattice(int(config["model"].get("L", 2)))
    queries = list(_opt(config, "queries", []))
    want_degeneracy = bool(_opt(config, "degeneracy", not queries))
    payload: Dict[str, Any] = {}
    ok = True
    if want_degeneracy:
        deg = toric.ground_space_dimension(lat)
        if lat.n_edges <= toric.DENSE_MAX_EDGES:
            ok = deg == toric.ground_space_dimension(lat, "projector")
        payload["degeneracy"] = deg
    if queries:
        values = _pmap(lambda q: toric.ground_expectation(lat, toric.parse_pauli(lat, q)), queries, jobs)
        payload["queries"] = {q: _json_scalar(v) for q, v in zip(queries, values)}
    return Outcome(payload=payload, ok=ok, message="" if ok else "dense and GF(2) counts disagree")


def run_convergence(config: dict, jobs: int) -> Outcome:
    phi, _ = build_model({**config["model"], "L": 1})
    radii = _grid(config, "radius", [1, 2, 3, 4, 5])
    t = float(_grid(config, "t", [0.5])[0])
    windows = [Region.interval(-r, r) for r in radii]
    deltas = dynamics.volume_convergence(phi, _site_op((0,), _opt(config, "observable", "z")), t, windows)
    rows = [(r, t, d) for r, d in zip(radii, deltas)]
    head = deltas[:-1]
    ok = all(x > y for x, y in zip(head, head[1:]))
    return Outcome(["radius", "t", "delta"], rows, summary={"strictly_decreasing": ok}, ok=ok, message=f"last proxy delta {head[-1] if head else 0:.3g}")


EXPERIMENTS: Dict[str, Callable[[dict, int], Outcome]] = {
    "kms-check": run_kms_check,
    "free-energy": run_free_energy,
    "ground-check": run_ground_check,
    "passivity": run_passivity,
    "lr-sweep": run_lr_sweep,
    "velocity": run_velocity,
    "clustering": run_clustering,
    "gns": run_gns,
    "toric": run_toric,
    "convergence": run_convergence,
}


def run_experiment(config: dict, jobs: int = 1) -> Outcome:
    validate_config(config)
    return EXPERIMENTS[config["experiment"]](config, jobs)
