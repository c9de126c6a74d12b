"""Finite-volume Heisenberg dynamics, Lieb-Robinson bounds and decay fits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import GuardError, SupportError
from .lattice import Region, Site, fattening, region_distance
from .models import (
    Interaction,
    bounded_norm,
    derivation_apply,
    interaction_norm,
    local_hamiltonian,
)
from .tensorcore import (
    LocalOperator,
    Spectrum,
    commutator,
    conditional_expectation,
    embed,
    operator_norm,
)

MAX_WINDOW_DIM = 2**14
_LOG_MAX = math.log(np.finfo(float).max)


def _check_window(phi: Interaction, window: Region) -> None:
    if phi.site_dim ** len(window) > MAX_WINDOW_DIM:
        raise GuardError(
            f"window of {len(window)} sites exceeds the dense dimension ceiling {MAX_WINDOW_DIM}"
        )


@lru_cache(maxsize=8)
def window_spectrum(phi: Interaction, window: Region) -> Spectrum:
    """Eigendecomposition of ``H_window``, computed once per (interaction, window)."""
    _check_window(phi, window)
    return Spectrum(local_hamiltonian(phi, window))


def heisenberg_evolve(phi: Interaction, window: Region, a: LocalOperator, t: float) -> LocalOperator:
    """``e^{itH} A e^{-itH}`` with ``H = H_window``; the result lives on the window."""
    if not a.support.issubset(window):
        raise SupportError("operator support escapes the window")
    return window_spectrum(phi, window).evolve(a, float(t))


# Taylor series -------------------------------------------------------------


@dataclass(frozen=True)
class TaylorResult:
    operator: LocalOperator
    error_bound: float
    ratio: float
    lam: float


def growth_ratio(phi_norm: float, max_size: int, t: float, lam: float) -> float:
    """``x = 2|t| ||Phi|| e^{lam (N - 1)} / lam``, the ratio of the tail series."""
    return 2 * abs(t) * phi_norm * math.exp(lam * (max_size - 1)) / lam


def taylor_tail_bound(
    norm_a: float, size_a: int, phi_norm: float, max_size: int, t: float, order: int, lam: float
) -> float:
    """Bound on ``sum_{n > order} |t|^n ||delta^n(A)|| / n!``.

    Uses ``||delta^n(A)|| <= ||A|| n! e^{lam(|supp A| + 1 - N)} (2 ||Phi|| e^{lam(N-1)} / lam)^n``.
    """
    x = growth_ratio(phi_norm, max_size, t, lam)
    if x >= 1:
        raise GuardError(f"tail ratio {x:.4g} >= 1: the series bound does not converge")
    if norm_a == 0 or x == 0:
        return 0.0
    log_b = (
        math.log(norm_a) + lam * (size_a + 1 - max_size) + (order + 1) * math.log(x) - math.log1p(-x)
    )
    return math.exp(log_b) if log_b < _LOG_MAX else math.inf


def taylor_evolve(
    phi: Interaction,
    a: LocalOperator,
    t: float,
    order: int,
    lam: Optional[float] = None,
    window: Optional[Region] = None,
) -> TaylorResult:
    """Partial sum ``sum_{n <= order} t^n delta^n(A) / n!`` and its certified tail bound.

    Without ``window`` the full derivation is applied and the support grows by
    up to ``N - 1`` sites per order; with ``window`` only terms inside it act.
    The default ``lam = 1/(N - 1)`` minimizes the tail ratio.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    source = phi.restricted(window) if window is not None else phi
    max_size = max(source.max_term_size, 1)
    phi_norm = bounded_norm(source)
    if lam is None:
        lam = 1.0 / (max_size - 1) if max_size > 1 else 1.0
    if lam <= 0:
        raise ValueError("lambda must be positive")
    bound = taylor_tail_bound(operator_norm(a), len(a.support), phi_norm, max_size, t, order, lam)
    total = a
    term = a
    for n in range(1, order + 1):
        if window is None and phi.site_dim ** len(term.support) > MAX_WINDOW_DIM:
            raise GuardError("Taylor term support outgrew the dense ceiling")
        term = derivation_apply(phi, term, window) * (t / n)
        if not np.any(term.matrix):
            break
        total = total + term
    return TaylorResult(total, bound, growth_ratio(phi_norm, max_size, t, lam), lam)


# volume convergence --------------------------------------------------------


def volume_convergence(
    phi: Interaction, a: LocalOperator, t: float, windows: Sequence[Region]
) -> List[float]:
    """``||alpha_t^{W_k}(A) - alpha_t^{W_max}(A)||`` for each window (the last one is the proxy)."""
    if not windows:
        raise ValueError("no windows given")
    for small, big in zip(windows, windows[1:]):
        if not small.issubset(big):
            raise ValueError("windows must be nested")
    largest = windows[-1]
    reference = heisenberg_evolve(phi, largest, a, t).matrix
    deltas = []
    for w in windows:
        evolved = embed(heisenberg_evolve(phi, w, a, t), largest).matrix
        deltas.append(operator_norm(evolved - reference))
    return deltas


# Lieb-Robinson bounds ------------------------------------------------------


@dataclass(frozen=True)
class LrBoundParams:
    lam: float
    phi_norm_lambda: float
    N: int
    model_tag: str
    dimension: int = 1


def lr_params(phi: Interaction, lam: float = 1.0, N: Optional[int] = None, dimension: int = 1) -> LrBoundParams:
    N = phi.site_dim if N is None else N
    return LrBoundParams(lam, interaction_norm(phi, lam, N), N, phi.tag, dimension)


def _exp_or_inf(log_value: float) -> float:
    return math.exp(log_value) if log_value < _LOG_MAX else math.inf


def lr_bound_rough(
    params: LrBoundParams, size_a: int, size_b: int, dist: int, t: float, norm_a: float, norm_b: float
) -> float:
    """``4 ||A|| ||B|| |X||Y| N^{2|X|} e^{2|t| ||Phi||_lam - lam d}``."""
    if dist < 0:
        raise ValueError("distance must be nonnegative")
    if norm_a == 0 or norm_b == 0:
        return 0.0
    log_b = (
        math.log(4 * norm_a * norm_b * size_a * size_b)
        + 2 * size_a * math.log(params.N)
        + 2 * abs(t) * params.phi_norm_lambda
        - params.lam * dist
    )
    return _exp_or_inf(log_b)


def sharp_constant_1d(lam: float) -> float:
    return 4.0 / (1.0 - math.exp(-lam))


def lr_bound_sharp_1d(
    params: LrBoundParams, size_a: int, dist: int, t: float, norm_a: float, norm_b: float
) -> float:
    """``C ||A|| ||B|| |X| N^{2|X|} e^{2|t| ||Phi||_lam - lam d}`` with ``C = 4/(1 - e^{-lam})``."""
    if params.dimension != 1:
        raise ValueError("the sharp constant is only available on a chain")
    if dist < 0:
        raise ValueError("distance must be nonnegative")
    if norm_a == 0 or norm_b == 0:
        return 0.0
    log_b = (
        math.log(sharp_constant_1d(params.lam) * norm_a * norm_b * size_a)
        + 2 * size_a * math.log(params.N)
        + 2 * abs(t) * params.phi_norm_lambda
        - params.lam * dist
    )
    return _exp_or_inf(log_b)


@dataclass(frozen=True)
class SweepRecord:
    t: float
    dist: int
    empirical: float
    bound_rough: float
    bound_sharp: Optional[float]


BFamily = Union[Mapping[Site, LocalOperator], Sequence[LocalOperator]]


def _b_operators(family: BFamily) -> List[LocalOperator]:
    return list(family.values()) if isinstance(family, Mapping) else list(family)


def _self_adjoint(m: np.ndarray) -> bool:
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12))


def commutator_sweep(
    phi: Interaction,
    window: Region,
    a: LocalOperator,
    b_family: BFamily,
    t_grid: Sequence[float],
    params: Optional[LrBoundParams] = None,
    jobs: int = 1,
) -> List[SweepRecord]:
    """``||[alpha_t(A), B]||`` on a (t, B) grid with the analytic bounds attached.

    Records are sorted by ``(t, dist)`` whatever the number of workers.
    """
    bs = _b_operators(b_family)
    for b in [a, *bs]:
        if not b.support.issubset(window):
            raise SupportError("operator support escapes the window")
    params = params or lr_params(phi, dimension=window.dimension or 1)
    metric = window.metric
    norm_a = operator_norm(a)
    b_info = [
        (embed(b, window), region_distance(metric, a.support, b.support), operator_norm(b), len(b.support))
        for b in bs
    ]
    window_spectrum(phi, window)
    # for self-adjoint A and B, [A, B] = P - P^* with P = AB: one product, and
    # exactly skew so the norm takes the eigenvalue route instead of an SVD
    skew = all(_self_adjoint(x.matrix) for x in [a, *bs])

    def cell(t: float) -> List[SweepRecord]:
        evolved = heisenberg_evolve(phi, window, a, t)
        out = []
        for b_full, dist, norm_b, size_b in b_info:
            if skew:
                p = evolved.matrix @ b_full.matrix
                emp = operator_norm(p - p.conj().T)
            else:
                emp = operator_norm(commutator(evolved, b_full))
            rough = lr_bound_rough(params, len(a.support), size_b, dist, t, norm_a, norm_b)
            sharp = (
                lr_bound_sharp_1d(params, len(a.support), dist, t, norm_a, norm_b)
                if params.dimension == 1
                else None
            )
            out.append(SweepRecord(float(t), dist, emp, rough, sharp))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(cell, t_grid))
    else:
        chunks = [cell(t) for t in t_grid]
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=lambda r: (r.t, r.dist))


# velocity ------------------------------------------------------------------


@dataclass(frozen=True)
class VelocityEstimate:
    resolved: bool
    v_emp: Optional[float]
    v_bound: float
    threshold: float
    crossings: Dict[int, float]
    reason: str = ""


def crossing_time(times: Sequence[float], values: Sequence[float], threshold: float) -> Optional[float]:
    """First time the samples reach ``threshold``, linearly interpolated; ``None`` if never."""
    for k, (t, v) in enumerate(zip(times, values)):
        if v >= threshold:
            if k == 0 or v == threshold:
                return float(t)
            t0, v0 = times[k - 1], values[k - 1]
            return float(t0 + (threshold - v0) * (t - t0) / (v - v0))
    return None


def velocity_estimate(sweep: Sequence[SweepRecord], threshold: float, params: LrBoundParams) -> VelocityEstimate:
    """Front speed from first-crossing times, fitted as ``dist = v t + c``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    v_bound = 2 * params.phi_norm_lambda / params.lam
    by_dist: Dict[int, List[SweepRecord]] = {}
    for r in sweep:
        by_dist.setdefault(r.dist, []).append(r)
    crossings: Dict[int, float] = {}
    for d, rows in sorted(by_dist.items()):
        if d < 1:
            continue
        rows = sorted(rows, key=lambda r: r.t)
        tc = crossing_time([r.t for r in rows], [r.empirical for r in rows], threshold)
        if tc is not None:
            crossings[d] = tc
    if len(crossings) < 2:
        return VelocityEstimate(False, None, v_bound, threshold, crossings, "front not resolved")
    ts = np.array(list(crossings.values()))
    ds = np.array(list(crossings.keys()), dtype=float)
    if np.ptp(ts) == 0:
        return VelocityEstimate(False, None, v_bound, threshold, crossings, "crossings simultaneous")
    slope = float(np.polyfit(ts, ds, 1)[0])
    return VelocityEstimate(True, slope, v_bound, threshold, crossings)


# local approximation -------------------------------------------------------


def localize_evolved(
    phi: Interaction, a: LocalOperator, t: float, radius: int, window: Region
) -> Tuple[LocalOperator, float]:
    """Conditional expectation of ``alpha_t(A)`` onto the ``radius``-fattening of its support.

    Returns the approximation and ``||approx - alpha_t(A)|| / ||A||``.
    """
    region = fattening(a.support, radius, within=window, m=window.metric)
    unbounded = fattening(a.support, radius, m=window.metric)
    if not unbounded.issubset(window):
        raise SupportError("fattened region escapes the window")
    exact = heisenberg_evolve(phi, window, a, t)
    approx = conditional_expectation(exact, region)
    err = operator_norm(embed(approx, window).matrix - exact.matrix) / operator_norm(a)
    return approx, err


# clustering ----------------------------------------------------------------


@dataclass(frozen=True)
class ClusteringResult:
    gap: float
    degenerate: bool
    points: List[Tuple[int, float]]
    mu_fit: Optional[float]
    monotone: bool


def fit_decay_rate(points: Sequence[Tuple[int, float]], min_dist: int = 2) -> Optional[float]:
    """``mu`` from a least-squares fit of ``log c = a - mu d`` over ``d >= min_dist``."""
    usable = [(d, c) for d, c in points if d >= min_dist and c > 0]
    if len(usable) < 2:
        return None
    d = np.array([p[0] for p in usable], dtype=float)
    logc = np.log([p[1] for p in usable])
    return float(-np.polyfit(d, logc, 1)[0])


def clustering_sweep(
    phi: Interaction,
    window: Region,
    obs_rule: Callable[[Site], LocalOperator],
    anchor: Optional[Site] = None,
    degeneracy_tol: float = 1e-9,
    min_fit_dist: int = 2,
) -> ClusteringResult:
    """Connected ground-state correlations ``|w(AB) - w(A)w(B)|`` against distance.

    ``A = obs_rule(anchor)`` and ``B = obs_rule(x)`` for every other site;
    distances where the supports overlap are dropped.
    """
    spec = window_spectrum(phi, window)
    energies = spec.energies
    gap = float(energies[1] - energies[0]) if len(energies) > 1 else math.inf
    if gap < degeneracy_tol:
        return ClusteringResult(gap, True, [], None, False)
    psi = spec.vectors[:, 0]
    metric = window.metric
    anchor = window.sites[0] if anchor is None else tuple(anchor)
    a = obs_rule(anchor)
    a_full = embed(a, window).matrix
    a_psi = a_full @ psi
    mean_a = np.vdot(psi, a_psi)
    best: Dict[int, float] = {}
    for x in window:
        b = obs_rule(x)
        if not b.support.isdisjoint(a.support):
            continue
        d = region_distance(metric, a.support, b.support)
        b_full = embed(b, window).matrix
        b_psi = b_full @ psi
        # w(AB) = <A* psi, B psi>
        corr = np.vdot(a_full.conj().T @ psi, b_psi) - mean_a * np.vdot(psi, b_psi)
        best[d] = max(best.get(d, 0.0), float(abs(corr)))
    points = sorted(best.items())
    tail = [c for d, c in points if d >= min_fit_dist]
    monotone = all(x > y for x, y in zip(tail, tail[1:]))
    return ClusteringResult(gap, False, points, fit_decay_rate(points, min_fit_dist), monotone)
