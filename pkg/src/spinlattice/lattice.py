"""Finite sublattices of Z^d (open or periodic) and their taxicab geometry.

Sites are plain integer tuples.  A :class:`Region` keeps its sites sorted
lexicographically; that order is the tensor-leg order used by every
operator in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Tuple

from .errors import DimensionError, SupportError

Site = Tuple[int, ...]

_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1


def _as_site(x: Iterable[int]) -> Site:
    site = tuple(int(c) for c in x)
    if not site:
        raise DimensionError("a site needs at least one coordinate")
    for c in site:
        if not _INT64_MIN <= c <= _INT64_MAX:
            raise DimensionError(f"coordinate {c} outside signed 64-bit range")
    return site


@dataclass(frozen=True)
class Metric:
    """Taxicab metric on Z^d, or on a torus when ``lengths`` is given."""

    lengths: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.lengths is not None:
            lengths = tuple(int(n) for n in self.lengths)
            if any(n < 1 for n in lengths):
                raise DimensionError("torus lengths must be positive")
            object.__setattr__(self, "lengths", lengths)

    @property
    def kind(self) -> str:
        return "manhattan" if self.lengths is None else "torus-manhattan"

    def distance(self, x: Site, y: Site) -> int:
        if len(x) != len(y):
            raise DimensionError(f"sites {x} and {y} have different dimension")
        if self.lengths is None:
            return sum(abs(a - b) for a, b in zip(x, y))
        if len(self.lengths) != len(x):
            raise DimensionError(
                f"torus of dimension {len(self.lengths)} cannot measure {x}"
            )
        total = 0
        for a, b, n in zip(x, y, self.lengths):
            delta = abs(a - b) % n
            total += min(delta, n - delta)
        return total


MANHATTAN = Metric()


@dataclass(frozen=True)
class Region:
    """Ordered, duplicate-free set of sites.

    ``lengths`` marks the region as living on a torus; coordinates must then
    lie in ``[0, length)`` on each axis.
    """

    sites: Tuple[Site, ...] = ()
    lengths: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        sites = tuple(sorted({_as_site(s) for s in self.sites}))
        if sites:
            d = len(sites[0])
            if any(len(s) != d for s in sites):
                raise DimensionError("all sites of a region need the same dimension")
        if self.lengths is not None:
            lengths = tuple(int(n) for n in self.lengths)
            object.__setattr__(self, "lengths", lengths)
            for s in sites:
                if len(s) != len(lengths) or any(
                    not 0 <= c < n for c, n in zip(s, lengths)
                ):
                    raise DimensionError(f"site {s} not on torus {lengths}")
        object.__setattr__(self, "sites", sites)

    # construction helpers
    @classmethod
    def chain(cls, n: int, start: int = 0) -> "Region":
        """Sites ``start, ..., start + n - 1`` of Z."""
        return cls(tuple((start + i,) for i in range(n)))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Region":
        """Closed integer interval ``[lo, hi]`` of Z."""
        return cls(tuple((i,) for i in range(lo, hi + 1)))

    @classmethod
    def box(cls, shape: Sequence[int], origin: Optional[Sequence[int]] = None) -> "Region":
        origin = tuple(origin) if origin is not None else (0,) * len(shape)
        ranges = [range(o, o + n) for o, n in zip(origin, shape)]
        return cls(tuple(itertools.product(*ranges)))

    @classmethod
    def torus(cls, lengths: Sequence[int]) -> "Region":
        lengths = tuple(lengths)
        return cls(tuple(itertools.product(*[range(n) for n in lengths])), lengths)

    # container protocol
    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return tuple(site) in self._index

    @property
    def _index(self) -> dict:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {s: i for i, s in enumerate(self.sites)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def index(self, site: Site) -> int:
        try:
            return self._index[tuple(site)]
        except KeyError:
            raise SupportError(f"site {site} not in region") from None

    @property
    def dimension(self) -> Optional[int]:
        return len(self.sites[0]) if self.sites else None

    @property
    def metric(self) -> Metric:
        return Metric(self.lengths)

    @property
    def is_empty(self) -> bool:
        return not self.sites

    # set algebra; geometry of the left operand wins
    def _geometry(self, other: "Region") -> Optional[Tuple[int, ...]]:
        if self.lengths is not None and other.lengths is not None and self.lengths != other.lengths:
            raise DimensionError("regions live on different tori")
        return self.lengths if self.lengths is not None else other.lengths

    def union(self, *others: "Region") -> "Region":
        lengths = self.lengths
        sites = set(self.sites)
        for o in others:
            if o.lengths is not None:
                if lengths is not None and lengths != o.lengths:
                    raise DimensionError("regions live on different tori")
                lengths = o.lengths
            sites.update(o.sites)
        return Region(tuple(sites), lengths)

    def intersection(self, other: "Region") -> "Region":
        return Region(tuple(s for s in self.sites if s in other), self._geometry(other))

    def difference(self, other: "Region") -> "Region":
        return Region(tuple(s for s in self.sites if s not in other), self.lengths)

    def issubset(self, other: "Region") -> bool:
        return all(s in other for s in self.sites)

    def isdisjoint(self, other: "Region") -> bool:
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return not any(s in big for s in small.sites)

    def translate(self, shift: Sequence[int]) -> "Region":
        if self.lengths is not None:
            raise DimensionError("translation of torus regions is not supported")
        return Region(tuple(tuple(c + s for c, s in zip(site, shift)) for site in self.sites))

    # serialization
    def to_json(self) -> dict:
        geometry = "open" if self.lengths is None else {"torus": list(self.lengths)}
        return {"sites": [list(s) for s in self.sites], "geometry": geometry}

    @classmethod
    def from_json(cls, data: dict) -> "Region":
        geometry = data.get("geometry", "open")
        lengths = None if geometry == "open" else tuple(geometry["torus"])
        return cls(tuple(tuple(s) for s in data["sites"]), lengths)


EMPTY = Region()


def distance(m: Metric, x: Site, y: Site) -> int:
    return m.distance(tuple(x), tuple(y))


def region_distance(m: Metric, a: Region, b: Region) -> int:
    """Smallest distance between a site of ``a`` and a site of ``b``."""
    if a.is_empty or b.is_empty:
        raise SupportError("distance to an empty region is undefined")
    if not a.isdisjoint(b):
        return 0
    return min(m.distance(x, y) for x in a for y in b)


def diameter(m: Metric, a: Region) -> int:
    if a.is_empty:
        raise SupportError("diameter of an empty region is undefined")
    return max((m.distance(x, y) for x, y in itertools.combinations(a.sites, 2)), default=0)


def _offsets(d: int, radius: int) -> Iterator[Tuple[int, ...]]:
    # all integer vectors with L1 norm <= radius
    for v in itertools.product(range(-radius, radius + 1), repeat=d):
        if sum(abs(c) for c in v) <= radius:
            yield v


def ball(m: Metric, center: Site, radius: int, within: Optional[Region] = None) -> Region:
    """Sites at distance at most ``radius`` from ``center``.

    With ``within=None`` the ball is taken in the whole lattice (Z^d, or the
    full torus for a periodic metric).
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    center = _as_site(center)
    if within is not None:
        return Region(tuple(s for s in within if m.distance(center, s) <= radius), within.lengths)
    if m.lengths is None:
        return Region(tuple(tuple(c + o for c, o in zip(center, off)) for off in _offsets(len(center), radius)))
    full = Region.torus(m.lengths)
    return Region(tuple(s for s in full if m.distance(center, s) <= radius), m.lengths)


def fattening(a: Region, radius: int, within: Optional[Region] = None, m: Metric = MANHATTAN) -> Region:
    """Union of the radius-``radius`` balls around each site of ``a``."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if a.is_empty:
        return a
    if within is not None:
        return Region(
            tuple(s for s in within if any(m.distance(s, x) <= radius for x in a)),
            within.lengths,
        )
    parts = [ball(m, x, radius) for x in a]
    return parts[0].union(*parts[1:])
