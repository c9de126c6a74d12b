"""Interactions, local Hamiltonians, interaction norms and the derivation.

An :class:`Interaction` is either an explicit finite table of terms or a
translation-invariant rule: base terms anchored near the origin that are
copied to every translate.  Translates are generated lazily, per window.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, HermiticityError, SupportError
from .lattice import MANHATTAN, Metric, Region, Site, diameter
from .tensorcore import (
    HERMITIAN_RTOL,
    LocalOperator,
    _is_hermitian,
    embed,
    operator_norm,
    pauli,
)


class Interaction:
    """Map from finite regions to Hermitian local operators.

    Parameters
    ----------
    terms:
        The explicit terms, or the base terms when ``translation_invariant``.
        Terms with the same key are summed.
    range_hint:
        Declared range c_Phi; terms with larger diameter are rejected.
    translation_invariant:
        Copy every base term to all translates in Z^d.
    """

    def __init__(
        self,
        terms: Iterable[LocalOperator] | Mapping[Region, LocalOperator],
        range_hint: Optional[int] = None,
        translation_invariant: bool = False,
        metric: Metric = MANHATTAN,
        site_dim: int = 2,
        tag: str = "",
    ):
        ops = list(terms.values()) if isinstance(terms, Mapping) else list(terms)
        table: Dict[Region, np.ndarray] = {}
        for op in ops:
            if op.site_dim != site_dim:
                raise DimensionError("interaction terms must share the local dimension")
            if op.support.is_empty:
                raise SupportError("interaction terms need a nonempty support")
            if not _is_hermitian(op.matrix, HERMITIAN_RTOL):
                raise HermiticityError(f"term on {list(op.support.sites)} is not Hermitian")
            if op.support in table:
                table[op.support] = table[op.support] + op.matrix
            else:
                table[op.support] = op.matrix.copy()
        if translation_invariant and any(r.lengths is not None for r in table):
            raise DimensionError("translation rules are defined on open Z^d only")
        self.terms: Dict[Region, LocalOperator] = {
            r: LocalOperator(r, m, site_dim) for r, m in table.items()
        }
        self.metric = metric
        self.site_dim = site_dim
        self.translation_invariant = translation_invariant
        self.tag = tag
        self.range = max((diameter(metric, r) for r in self.terms), default=0)
        if range_hint is not None and self.range > range_hint:
            raise ValueError(f"term of diameter {self.range} exceeds declared range {range_hint}")
        self.range_hint = range_hint
        self._window_cache: Dict[Region, Tuple[LocalOperator, ...]] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        kind = "translation-invariant" if self.translation_invariant else "finite"
        return f"Interaction({self.tag or kind}, {len(self.terms)} base terms)"

    @property
    def max_term_size(self) -> int:
        return max((len(r) for r in self.terms), default=0)

    @property
    def sites(self) -> Region:
        """Sites touched by an explicit interaction."""
        if self.translation_invariant:
            raise ValueError("a translation-invariant interaction touches every site")
        regions = list(self.terms)
        return regions[0].union(*regions[1:]) if regions else Region()

    def _translate(self, term: LocalOperator, shift: Sequence[int]) -> LocalOperator:
        return LocalOperator(term.support.translate(shift), term.matrix, self.site_dim)

    def _candidates(self, sites: Iterable[Site]) -> Dict[Region, LocalOperator]:
        """All terms whose region meets ``sites`` (translates included)."""
        sites = list(sites)
        found: Dict[Region, LocalOperator] = {}
        if not self.translation_invariant:
            wanted = set(sites)
            for r, op in self.terms.items():
                if any(s in wanted for s in r):
                    found[r] = op
            return found
        for base_region, op in self.terms.items():
            shifts = {
                tuple(x - b for x, b in zip(site, anchor))
                for site in sites
                for anchor in base_region
            }
            for shift in shifts:
                t = self._translate(op, shift)
                found.setdefault(t.support, t)
        return found

    def terms_containing(self, site: Site) -> List[LocalOperator]:
        return list(self._candidates([tuple(site)]).values())

    def terms_touching(self, region: Region, window: Optional[Region] = None) -> List[LocalOperator]:
        found = self._candidates(region.sites)
        ops = [op for op in found.values() if window is None or op.support.issubset(window)]
        return sorted(ops, key=lambda op: op.support.sites)

    def terms_within(self, window: Region) -> Tuple[LocalOperator, ...]:
        """Every term whose region lies inside ``window`` (cached per window)."""
        with self._lock:
            cached = self._window_cache.get(window)
            if cached is not None:
                return cached
        if self.translation_invariant:
            ops = [op for op in self._candidates(window.sites).values() if op.support.issubset(window)]
        else:
            ops = [op for r, op in self.terms.items() if r.issubset(window)]
        ops = tuple(sorted(ops, key=lambda op: op.support.sites))
        with self._lock:
            return self._window_cache.setdefault(window, ops)

    def restricted(self, window: Region) -> "Interaction":
        """The explicit interaction keeping only terms inside ``window``."""
        return Interaction(
            self.terms_within(window),
            metric=self.metric,
            site_dim=self.site_dim,
            tag=f"{self.tag}|window" if self.tag else "window",
        )


# model library ---------------------------------------------------------


def ising(h: float = 1.0, J: float = 0.0, g: float = 0.0) -> Interaction:
    """Ising chain: ``Phi({n}) = -h sz - g sx`` and ``Phi({n,n+1}) = -J sz sz``.

    ``g`` is a transverse field; zero terms are omitted.
    """
    terms = []
    onsite = -h * pauli("z") - g * pauli("x")
    if np.any(onsite):
        terms.append(LocalOperator(Region(((0,),)), onsite))
    if J != 0:
        terms.append(LocalOperator(Region(((0,), (1,))), -J * np.kron(pauli("z"), pauli("z"))))
    return Interaction(terms, range_hint=1, translation_invariant=True, tag="ising")


def heisenberg_xxz(Jx: float = 1.0, Jy: float = 1.0, Jz: float = 1.0, h: float = 0.0) -> Interaction:
    """Nearest-neighbour XXZ chain with a field along z.

    ``Phi({n}) = -h sz`` and
    ``Phi({n,n+1}) = -1/2 (Jx sx sx + Jy sy sy + Jz sz sz)``.
    """
    terms = []
    if h != 0:
        terms.append(LocalOperator(Region(((0,),)), -h * pauli("z")))
    bond = -0.5 * sum(
        c * np.kron(pauli(a), pauli(a)) for c, a in ((Jx, "x"), (Jy, "y"), (Jz, "z"))
    )
    if np.any(bond):
        terms.append(LocalOperator(Region(((0,), (1,))), bond))
    return Interaction(terms, range_hint=1, translation_invariant=True, tag="xxz")


# Hamiltonians and norms ------------------------------------------------


def local_hamiltonian(phi: Interaction, region: Region) -> LocalOperator:
    """``H_region``: sum of all terms whose key lies inside ``region``."""
    total = np.zeros((phi.site_dim ** len(region),) * 2, dtype=complex)
    for op in phi.terms_within(region):
        total += embed(op, region).matrix
    return LocalOperator(region, total, phi.site_dim)


@dataclass(frozen=True)
class InteractionNorms:
    lam: float
    norm_lambda: float
    norm_bounded: float
    site_dim_bound: int


def _terms_at(phi: Interaction, site: Site) -> List[LocalOperator]:
    return phi.terms_containing(site)


def _sup_sites(phi: Interaction) -> List[Site]:
    if phi.translation_invariant:
        dim = next(iter(phi.terms)).dimension if phi.terms else 1
        return [(0,) * dim]
    return list(phi.sites) if phi.terms else []


def interaction_norm(phi: Interaction, lam: float, N: int, weight: str = "diam") -> float:
    """``sup_x sum_{X contains x} |X| ||Phi(X)|| N^{2|X|} e^{lam * w(X)}``.

    ``weight="diam"`` uses the diameter of X (the norm that enters the
    Lieb-Robinson bound); ``weight="size"`` uses ``|X|`` instead.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if N < 2:
        raise ValueError("local dimension bound N must be at least 2")
    if N < phi.site_dim:
        raise ValueError("N must bound the local dimension")
    best = 0.0
    for x in _sup_sites(phi):
        total = 0.0
        for op in _terms_at(phi, x):
            size = len(op.support)
            w = diameter(phi.metric, op.support) if weight == "diam" else size
            total += size * operator_norm(op.matrix) * float(N) ** (2 * size) * math.exp(lam * w)
        best = max(best, total)
    return best


def bounded_norm(phi: Interaction) -> float:
    """``sup_x sum_{X contains x} ||Phi(X)||``."""
    best = 0.0
    for x in _sup_sites(phi):
        best = max(best, sum(operator_norm(op.matrix) for op in _terms_at(phi, x)))
    return best


def interaction_norms(phi: Interaction, lam: float, N: int) -> InteractionNorms:
    return InteractionNorms(lam, interaction_norm(phi, lam, N), bounded_norm(phi), N)


# derivation ------------------------------------------------------------


def derivation_apply(phi: Interaction, a: LocalOperator, window: Optional[Region] = None) -> LocalOperator:
    """``i * sum_{X meets supp(A)} [Phi(X), A]``.

    With ``window`` only terms inside the window contribute, which is the
    finite-volume derivation ``i[H_window, A]``.
    """
    if a.support.is_empty:
        return LocalOperator.scalar(0.0, a.site_dim)
    if window is not None and not a.support.issubset(window):
        raise SupportError("operator support escapes the window")
    terms = phi.terms_touching(a.support, window)
    region = a.support.union(*[op.support for op in terms])
    amat = embed(a, region).matrix
    total = np.zeros_like(amat)
    for op in terms:
        t = embed(op, region).matrix
        total += t @ amat - amat @ t
    return LocalOperator(region, 1j * total, a.site_dim)


def energy_density_operator(phi: Interaction) -> LocalOperator:
    """``E_Phi = sum_{X contains 0} Phi(X) / |X|``."""
    if not phi.translation_invariant:
        raise ValueError("the energy density needs a translation-invariant interaction")
    dim = next(iter(phi.terms)).dimension if phi.terms else 1
    ops = phi.terms_containing((0,) * dim)
    if not ops:
        return LocalOperator.scalar(0.0, phi.site_dim)
    total = ops[0] / len(ops[0].support)
    for op in ops[1:]:
        total = total + op / len(op.support)
    return total


def mean_energy_density(phi: Interaction, omega) -> float:
    """``omega(E_Phi)`` for a state whose region contains every term at the origin."""
    e = energy_density_operator(phi)
    if not e.support.issubset(omega.region):
        raise SupportError("window too small to contain the energy density")
    value = omega.expect(e)
    return float(value.real)
