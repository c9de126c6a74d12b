"""Kitaev's toric code on an L x L torus.

Edges are sites with coordinates ``(direction, y, x)``, direction 0 for
horizontal and 1 for vertical, so the canonical region order is
``(direction, y, x)``.  Horizontal edge ``(0, y, x)`` joins vertices
``(x, y)`` and ``(x+1, y)``; vertical edge ``(1, y, x)`` joins ``(x, y)`` and
``(x, y+1)``.  Face ``(x, y)`` is the square with lower-left vertex ``(x, y)``.

Pauli strings are handled symbolically as bit masks over edge indices:
``P(x, z) = prod_e X_e^{x_e} Z_e^{z_e}`` (X before Z on each edge), with a
complex coefficient.  Stabilizer-group membership is GF(2) linear algebra.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GuardError, InvariantError, SupportError
from .lattice import Metric, Region
from .models import Interaction
from .states import DensityState
from .tensorcore import LocalOperator, embed, hermitian_eig, pauli

DENSE_MAX_EDGES = 14
_DIR_NAMES = {"h": 0, "v": 1}


# GF(2) ------------------------------------------------------------------


class Gf2Span:
    """Row space over GF(2) of integer bit masks, kept as a reduced basis."""

    def __init__(self, rows: Iterable[int] = ()):
        self._basis: Dict[int, int] = {}
        for r in rows:
            self.add(r)

    def reduce(self, v: int) -> int:
        while v:
            top = v.bit_length() - 1
            pivot = self._basis.get(top)
            if pivot is None:
                return v
            v ^= pivot
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if v:
            self._basis[v.bit_length() - 1] = v
            return True
        return False

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self._basis)


def _popcount(v: int) -> int:
    return bin(v).count("1")


# lattice ----------------------------------------------------------------


@dataclass(frozen=True)
class ToricLattice:
    L: int
    edges: Region = field(init=False)
    stars: Tuple[Region, ...] = field(init=False)
    plaquettes: Tuple[Region, ...] = field(init=False)

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("the torus needs L >= 2")
        L = self.L
        lengths = (2, L, L)
        object.__setattr__(self, "edges", Region.torus(lengths))
        stars = []
        plaqs = []
        for y in range(L):
            for x in range(L):
                stars.append(Region(self._star_edges(x, y), lengths))
                plaqs.append(Region(self._plaquette_edges(x, y), lengths))
        object.__setattr__(self, "stars", tuple(stars))
        object.__setattr__(self, "plaquettes", tuple(plaqs))

    def edge(self, direction, x: int, y: int) -> Tuple[int, int, int]:
        d = _DIR_NAMES[direction] if isinstance(direction, str) else int(direction)
        return (d, y % self.L, x % self.L)

    def _star_edges(self, x: int, y: int):
        return (self.edge(0, x, y), self.edge(0, x - 1, y), self.edge(1, x, y), self.edge(1, x, y - 1))

    def _plaquette_edges(self, x: int, y: int):
        return (self.edge(0, x, y), self.edge(0, x, y + 1), self.edge(1, x, y), self.edge(1, x + 1, y))

    @property
    def n_edges(self) -> int:
        return 2 * self.L * self.L

    def vertex_index(self, v: Tuple[int, int]) -> int:
        x, y = v
        if not (0 <= x < self.L and 0 <= y < self.L):
            raise IndexError(f"vertex {v} out of range")
        return y * self.L + x

    def mask(self, region: Region) -> int:
        return sum(1 << self.edges.index(s) for s in region)

    def region_of(self, mask: int) -> Region:
        return Region(
            tuple(s for i, s in enumerate(self.edges.sites) if mask >> i & 1), self.edges.lengths
        )

    @cached_property
    def star_span(self) -> Gf2Span:
        return Gf2Span(self.mask(s) for s in self.stars)

    @cached_property
    def plaquette_span(self) -> Gf2Span:
        return Gf2Span(self.mask(p) for p in self.plaquettes)


def star_operator(lat: ToricLattice, v: Tuple[int, int]) -> LocalOperator:
    s = lat.stars[lat.vertex_index(v)]
    return LocalOperator.pauli_string({e: "x" for e in s})


def plaquette_operator(lat: ToricLattice, f: Tuple[int, int]) -> LocalOperator:
    p = lat.plaquettes[lat.vertex_index(f)]
    return LocalOperator.pauli_string({e: "z" for e in p})


def _vertices(lat: ToricLattice):
    return [(x, y) for y in range(lat.L) for x in range(lat.L)]


def toric_interaction(lat: ToricLattice) -> Interaction:
    """``Phi(s) = -A_s``, ``Phi(p) = -B_p``, zero otherwise."""
    terms = [-star_operator(lat, v) for v in _vertices(lat)]
    terms += [-plaquette_operator(lat, f) for f in _vertices(lat)]
    # L = 2 stars and plaquettes never coincide as edge sets, so no terms merge
    return Interaction(terms, metric=Metric(lat.edges.lengths), tag=f"toric-L{lat.L}")


def _dense_guard(lat: ToricLattice) -> None:
    if lat.n_edges > DENSE_MAX_EDGES:
        raise GuardError(f"{lat.n_edges} edges exceed the dense limit of {DENSE_MAX_EDGES}")


def toric_hamiltonian(lat: ToricLattice) -> LocalOperator:
    _dense_guard(lat)
    total = np.zeros((2**lat.n_edges,) * 2, dtype=complex)
    for op in toric_interaction(lat).terms.values():
        total += embed(op, lat.edges).matrix
    return LocalOperator(lat.edges, total)


def ground_projector(lat: ToricLattice) -> np.ndarray:
    """``prod_s (I + A_s)/2 prod_p (I + B_p)/2`` on all edges."""
    _dense_guard(lat)
    dim = 2**lat.n_edges
    proj = np.eye(dim, dtype=complex)
    eye = np.eye(dim)
    for v in _vertices(lat):
        proj = proj @ ((eye + embed(star_operator(lat, v), lat.edges).matrix) / 2)
        proj = proj @ ((eye + embed(plaquette_operator(lat, v), lat.edges).matrix) / 2)
    return proj


def independent_stabilizers(lat: ToricLattice) -> int:
    return lat.star_span.rank + lat.plaquette_span.rank


def ground_space_dimension(lat: ToricLattice, method: str = "gf2") -> int:
    """Degeneracy of the lowest level.

    ``method="gf2"`` counts ``2^(edges - independent stabilizers)``;
    ``"projector"`` takes the rank (trace) of the stabilizer projector and
    ``"eigensolve"`` the multiplicity of the lowest eigenvalue; both dense.
    """
    if method == "gf2":
        return 2 ** (lat.n_edges - independent_stabilizers(lat))
    if method == "projector":
        return int(round(np.trace(ground_projector(lat)).real))
    if method == "eigensolve":
        energies, _ = hermitian_eig(toric_hamiltonian(lat))
        return int(np.sum(np.abs(energies - energies[0]) < 1e-8))
    raise ValueError(f"unknown method {method!r}")


def code_space_state(lat: ToricLattice) -> DensityState:
    """Maximally mixed state on the ground space, ``P / Tr P``."""
    proj = ground_projector(lat)
    return DensityState(lat.edges, proj / np.trace(proj).real)


# symbolic Pauli algebra -------------------------------------------------

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class PauliOperator:
    """Finite linear combination ``sum c * P(x, z)`` of Pauli strings on the edges."""

    def __init__(self, lat: ToricLattice, terms: Optional[Dict[Tuple[int, int], complex]] = None):
        self.lat = lat
        self.terms: Dict[Tuple[int, int], complex] = {
            k: complex(c) for k, c in (terms or {}).items() if c != 0
        }

    @classmethod
    def string(cls, lat: ToricLattice, axes: Dict, coeff: complex = 1.0) -> "PauliOperator":
        """From an edge -> axis map; ``Y = i X Z`` is absorbed into the coefficient."""
        xm = zm = 0
        for e, a in axes.items():
            bit = 1 << lat.edges.index(tuple(e))
            a = a.lower()
            if a in ("x", "y"):
                xm |= bit
            if a in ("z", "y"):
                zm |= bit
            if a == "y":
                coeff *= 1j
        return cls(lat, {(xm, zm): coeff})

    @classmethod
    def stabilizer(cls, lat: ToricLattice, region: Region, kind: str) -> "PauliOperator":
        m = lat.mask(region)
        key = (m, 0) if kind == "x" else (0, m)
        return cls(lat, {key: 1.0})

    @property
    def is_string(self) -> bool:
        return len(self.terms) == 1

    def support(self) -> Region:
        mask = 0
        for xm, zm in self.terms:
            mask |= xm | zm
        return self.lat.region_of(mask)

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return PauliOperator(self.lat, out)

    def __sub__(self, other: "PauliOperator") -> "PauliOperator":
        return self + other * -1

    def __mul__(self, other):
        if not isinstance(other, PauliOperator):
            return PauliOperator(self.lat, {k: c * other for k, c in self.terms.items()})
        out: Dict[Tuple[int, int], complex] = {}
        for (x1, z1), c1 in self.terms.items():
            for (x2, z2), c2 in other.terms.items():
                # Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}
                sign = -1 if _popcount(z1 & x2) % 2 else 1
                key = (x1 ^ x2, z1 ^ z2)
                out[key] = out.get(key, 0) + sign * c1 * c2
        return PauliOperator(self.lat, out)

    __rmul__ = __mul__

    def dag(self) -> "PauliOperator":
        # (X^x Z^z)* = Z^z X^x = (-1)^{|x & z|} X^x Z^z
        return PauliOperator(
            self.lat,
            {(x, z): c.conjugate() * (-1 if _popcount(x & z) % 2 else 1) for (x, z), c in self.terms.items()},
        )

    def to_local(self) -> LocalOperator:
        """Dense matrix on the support of the operator."""
        support = self.support()
        total = np.zeros((2 ** len(support),) * 2, dtype=complex)
        for (xm, zm), c in self.terms.items():
            mat = np.eye(1, dtype=complex)
            for s in support:
                i = self.lat.edges.index(s)
                f = np.eye(2, dtype=complex)
                if xm >> i & 1:
                    f = f @ pauli("x")
                if zm >> i & 1:
                    f = f @ pauli("z")
                mat = np.kron(mat, f)
            total += c * mat
        return LocalOperator(support, total)

    def __repr__(self) -> str:
        return f"PauliOperator({format_pauli(self) if self.is_string else len(self.terms)})"


# X^x Z^z on one edge, index x + 2 z; Hilbert-Schmidt norm squared 2
_XZ_BASIS = np.stack([np.eye(2), pauli("x"), pauli("z"), pauli("x") @ pauli("z")]).astype(complex)


def pauli_decompose(lat: ToricLattice, a: LocalOperator, tol: float = 1e-12) -> PauliOperator:
    """Expand a dense operator on edges into ``P(x, z)`` strings."""
    support = a.support
    if support.is_empty:
        return PauliOperator(lat, {(0, 0): complex(a.matrix[0, 0])})
    if not support.issubset(lat.edges):
        raise SupportError("operator support is not a set of edges of this torus")
    k = len(support)
    perm = [ax for l in range(k) for ax in (l, k + l)]
    t = a.matrix.reshape((2,) * (2 * k)).transpose(perm).reshape((4,) * k)
    dual = _XZ_BASIS.conj().reshape(4, 4).T / 2
    for l in range(k):
        t = np.moveaxis(np.tensordot(t, dual, axes=([l], [0])), -1, l)
    bits = [1 << lat.edges.index(s) for s in support]
    scale = max(float(np.max(np.abs(t))), 1.0)
    terms = {}
    for idx in zip(*np.nonzero(np.abs(t) > tol * scale)):
        xm = sum(b for b, i in zip(bits, idx) if i & 1)
        zm = sum(b for b, i in zip(bits, idx) if i & 2)
        terms[(xm, zm)] = complex(t[idx])
    return PauliOperator(lat, terms)


def _as_pauli(lat: ToricLattice, a) -> PauliOperator:
    if isinstance(a, PauliOperator):
        return a
    if isinstance(a, str):
        return parse_pauli(lat, a)
    return pauli_decompose(lat, a)


# ground state functional -------------------------------------------------


def _string_expectation(lat: ToricLattice, xm: int, zm: int) -> int:
    # stars carry only X and plaquettes only Z, so a stabilizer-group element
    # is X^x Z^z with coefficient +1 exactly
    return int(xm in lat.star_span and zm in lat.plaquette_span)


def ground_expectation(lat: ToricLattice, a) -> complex:
    """``omega(A)`` for a multiple of a single Pauli string.

    The value is the coefficient of the string when it belongs to the
    stabilizer group and zero otherwise.
    """
    p = _as_pauli(lat, a)
    if len(p.terms) > 1:
        raise ValueError("ground_expectation takes a single Pauli string")
    if not p.terms:
        return 0j
    (xm, zm), c = next(iter(p.terms.items()))
    return c * _string_expectation(lat, xm, zm)


class ToricGroundState:
    """The stabilizer ground-state functional, extended linearly to any operator."""

    def __init__(self, lat: ToricLattice):
        self.lat = lat
        self.region = lat.edges

    def __repr__(self) -> str:
        return f"ToricGroundState(L={self.lat.L})"

    def expect(self, a) -> complex:
        p = _as_pauli(self.lat, a)
        return sum(
            (c * _string_expectation(self.lat, xm, zm) for (xm, zm), c in p.terms.items()), 0j
        )


def stabilizer_terms(lat: ToricLattice) -> List[PauliOperator]:
    """``-A_s`` and ``-B_p`` as symbolic operators."""
    stars = [PauliOperator.stabilizer(lat, s, "x") * -1 for s in lat.stars]
    plaqs = [PauliOperator.stabilizer(lat, p, "z") * -1 for p in lat.plaquettes]
    return stars + plaqs


def derivation_pauli(lat: ToricLattice, a) -> PauliOperator:
    """``i sum_X [Phi(X), A]`` in the Pauli algebra (no dense matrices)."""
    p = _as_pauli(lat, a)
    total = PauliOperator(lat)
    for term in stabilizer_terms(lat):
        total = total + (term * p - p * term)
    return total * 1j


def toric_ground_residual(lat: ToricLattice, samples: Iterable) -> float:
    """Minimum over the samples of ``-i omega(A* delta(A))`` for the stabilizer state."""
    omega = ToricGroundState(lat)
    values = []
    for a in samples:
        p = _as_pauli(lat, a)
        v = -1j * omega.expect(p.dag() * derivation_pauli(lat, p))
        if abs(v.imag) > 1e-9 * max(1.0, abs(v.real)):
            raise InvariantError(f"-i omega(A* delta(A)) has imaginary part {v.imag}")
        values.append(v.real)
    if not values:
        raise ValueError("no samples given")
    return min(values)


def random_pauli_string(
    lat: ToricLattice, rng: np.random.Generator, max_weight: int = 4, radius: int = 2
) -> PauliOperator:
    """A random-phase Pauli string on edges near a random edge."""
    from .lattice import ball

    center = lat.edges.sites[int(rng.integers(len(lat.edges)))]
    near = ball(lat.edges.metric, center, radius, within=lat.edges)
    weight = int(rng.integers(1, min(max_weight, len(near)) + 1))
    chosen = rng.choice(len(near), size=weight, replace=False)
    axes = {near.sites[i]: "xyz"[int(rng.integers(3))] for i in chosen}
    return PauliOperator.string(lat, axes, np.exp(2j * np.pi * rng.random()))


def pauli_strings_up_to_weight(lat: ToricLattice, max_weight: int) -> Iterable[PauliOperator]:
    """Every Pauli string (coefficient 1, letters X, Y, Z) of weight at most ``max_weight``."""
    edges = lat.edges.sites
    yield PauliOperator(lat, {(0, 0): 1.0})
    for w in range(1, max_weight + 1):
        for chosen in itertools.combinations(edges, w):
            for letters in itertools.product("xyz", repeat=w):
                yield PauliOperator.string(lat, dict(zip(chosen, letters)))


# loops --------------------------------------------------------------------


def _edge_vertices(L: int, e) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    d, y, x = e
    return ((x, y), ((x + 1) % L, y)) if d == 0 else ((x, y), (x, (y + 1) % L))


def _edge_faces(L: int, e) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    d, y, x = e
    return ((x, y), (x, (y - 1) % L)) if d == 0 else ((x, y), ((x - 1) % L, y))


def is_closed(lat: ToricLattice, edges: Iterable, flavor: str) -> bool:
    """Zero boundary: even degree at every vertex (``z``) or every face (``x``)."""
    ends = _edge_vertices if flavor == "z" else _edge_faces
    count: Dict[Tuple[int, int], int] = {}
    for e in edges:
        for v in ends(lat.L, e):
            count[v] = count.get(v, 0) + 1
    return all(c % 2 == 0 for c in count.values())


def _edge_site(lat: ToricLattice, e) -> Tuple[int, int, int]:
    d, x, y = e
    return lat.edge(d, x, y)


def loop_operator(lat: ToricLattice, cycle: Sequence, flavor: str) -> LocalOperator:
    """Pauli string on a closed path.

    ``cycle`` lists edges as ``(direction, x, y)`` with direction ``"h"``/``"v"``
    or 0/1.  A ``z`` loop runs along a path of the lattice and an ``x`` loop
    along a path of the dual lattice, the pairings for which the string
    commutes with every star and plaquette.
    """
    if flavor not in ("x", "z"):
        raise ValueError("flavor must be 'x' or 'z'")
    sites = [_edge_site(lat, e) for e in cycle]
    if not sites:
        raise ValueError("empty path")
    if len(set(sites)) != len(sites):
        raise ValueError("path repeats an edge")
    if not is_closed(lat, sites, flavor):
        kind = "lattice" if flavor == "z" else "dual-lattice"
        raise ValueError(f"edges do not form a closed {kind} path")
    return LocalOperator.pauli_string({s: flavor for s in sites})


def straight_loop(lat: ToricLattice, flavor: str, orientation: str, index: int = 0) -> List[Tuple]:
    """Edges of a non-contractible straight loop, as ``(direction, x, y)``.

    ``orientation`` is ``"horizontal"`` or ``"vertical"``; ``index`` picks the
    row or column.
    """
    L = lat.L
    horizontal = orientation == "horizontal"
    if flavor == "z":
        # lattice path: horizontal edges along a row, or vertical edges up a column
        return [("h", k, index) if horizontal else ("v", index, k) for k in range(L)]
    # dual path crosses vertical edges along a row, or horizontal edges up a column
    return [("v", k, index) if horizontal else ("h", index, k) for k in range(L)]


# string form ----------------------------------------------------------------

_TOKEN = re.compile(r"^([IXYZ])@\(\s*([hv01])\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")


def parse_pauli(lat: ToricLattice, text: str) -> PauliOperator:
    """Parse ``X@(h,0,1)*Z@(v,1,1)``; edges are ``(direction, x, y)``.

    An optional leading numeric factor such as ``-1`` or ``1j`` sets the coefficient.
    """
    axes: Dict[Tuple[int, int, int], str] = {}
    coeff = 1 + 0j
    tokens = [t.strip() for t in text.strip().split("*") if t.strip()]
    for n, tok in enumerate(tokens):
        m = _TOKEN.match(tok)
        if m is None:
            if n == 0:
                try:
                    coeff = complex(tok.replace(" ", ""))
                    continue
                except ValueError:
                    pass
            raise ValueError(f"bad Pauli token {tok!r}")
        letter, d, x, y = m.groups()
        site = lat.edge(d if d in "hv" else int(d), int(x), int(y))
        if site in axes:
            raise ValueError(f"edge {tok!r} appears twice")
        if letter != "I":
            axes[site] = letter.lower()
    return PauliOperator.string(lat, axes, coeff)


def _short_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}j"
    return repr(c).strip("()")


def format_pauli(p: PauliOperator) -> str:
    if not p.is_string:
        raise ValueError("only single Pauli strings have a token form")
    (xm, zm), c = next(iter(p.terms.items()))
    tokens = []
    n_y = 0
    for i, (d, y, x) in enumerate(p.lat.edges.sites):
        letter = _LETTER[(xm >> i & 1, zm >> i & 1)]
        if letter == "I":
            continue
        n_y += letter == "Y"
        tokens.append(f"{letter}@({'hv'[d]},{x},{y})")
    c = c / (1j**n_y)
    if not tokens:
        return _short_complex(c)
    if c != 1:
        tokens.insert(0, _short_complex(c))
    return "*".join(tokens)
