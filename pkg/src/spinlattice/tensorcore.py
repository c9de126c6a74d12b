"""Dense complex-matrix kernel for operators on finite regions.

Kronecker convention: the first site of a region (in canonical order) is
the leftmost tensor factor, so the operator ``sigma^z`` on site 0 of a two-site
region is ``kron(Z, I)``.  All matrix functions go through a Hermitian
eigendecomposition, which also gives complex-time evolution for free.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from .errors import DimensionError, GuardError, HermiticityError, SupportError
from .lattice import EMPTY, Region, Site

HERMITIAN_RTOL = 1e-10
EXP_GUARD = 700.0

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    """The 2x2 Pauli matrix for ``axis`` in ``{"x", "y", "z"}`` (``"i"`` gives the identity)."""
    try:
        return _PAULI[axis.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def _check_finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A matrix acting on the sites of ``support`` (identity elsewhere)."""

    support: Region
    matrix: np.ndarray
    site_dim: int = 2

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        expected = self.site_dim ** len(self.support)
        if m.shape != (expected, expected):
            raise DimensionError(
                f"matrix shape {m.shape} does not match {len(self.support)} sites of dimension {self.site_dim}"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, region: Region = EMPTY, site_dim: int = 2) -> "LocalOperator":
        return cls(region, np.eye(site_dim ** len(region), dtype=complex), site_dim)

    @classmethod
    def scalar(cls, value: complex, site_dim: int = 2) -> "LocalOperator":
        return cls(EMPTY, np.array([[value]], dtype=complex), site_dim)

    @classmethod
    def product(cls, factors: Mapping[Site, np.ndarray], site_dim: int = 2) -> "LocalOperator":
        """Tensor product of single-site matrices, keyed by site."""
        region = Region(tuple(factors))
        keyed = {tuple(k): np.asarray(v, dtype=complex) for k, v in factors.items()}
        m = np.eye(1, dtype=complex)
        for s in region:
            m = np.kron(m, keyed[s])
        return cls(region, m, site_dim)

    @classmethod
    def pauli_string(cls, axes: Mapping[Site, str]) -> "LocalOperator":
        return cls.product({s: pauli(a) for s, a in axes.items()})

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "LocalOperator":
        return LocalOperator(self.support, self.matrix.conj().T, self.site_dim)

    def on(self, target: Region) -> "LocalOperator":
        return embed(self, target)

    def _aligned(self, other: "LocalOperator") -> Tuple[np.ndarray, np.ndarray, Region]:
        if self.site_dim != other.site_dim:
            raise DimensionError("operators have different local dimension")
        region = self.support.union(other.support)
        return embed(self, region).matrix, embed(other, region).matrix, region

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        a, b, region = self._aligned(other)
        return LocalOperator(region, a + b, self.site_dim)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        a, b, region = self._aligned(other)
        return LocalOperator(region, a - b, self.site_dim)

    def __neg__(self) -> "LocalOperator":
        return LocalOperator(self.support, -self.matrix, self.site_dim)

    def __mul__(self, c: complex) -> "LocalOperator":
        return LocalOperator(self.support, c * self.matrix, self.site_dim)

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "LocalOperator":
        return LocalOperator(self.support, self.matrix / c, self.site_dim)

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        a, b, region = self._aligned(other)
        return LocalOperator(region, a @ b, self.site_dim)

    def __repr__(self) -> str:
        return f"LocalOperator(support={list(self.support.sites)}, dim={self.dim})"


def embed(a: LocalOperator, target: Region) -> LocalOperator:
    """Extend ``a`` to ``target`` by padding with identities."""
    if not a.support.issubset(target):
        raise SupportError(f"support {list(a.support.sites)} not contained in target")
    if len(a.support) == len(target):
        return LocalOperator(target, a.matrix, a.site_dim)
    d = a.site_dim
    n = len(target)
    rest = [s for s in target if s not in a.support]
    order = list(a.support.sites) + rest
    full = np.kron(a.matrix, np.eye(d ** len(rest), dtype=complex))
    position = {s: i for i, s in enumerate(order)}
    perm = [position[s] for s in target]
    t = full.reshape((d,) * (2 * n)).transpose(perm + [n + p for p in perm])
    return LocalOperator(target, t.reshape(d**n, d**n), d)


def _is_hermitian(m: np.ndarray, rtol: float) -> bool:
    # Frobenius asymmetry bounds the spectral one
    scale = max(1.0, float(np.linalg.norm(m)))
    return float(np.linalg.norm(m - m.conj().T)) <= rtol * scale


def operator_norm(m) -> float:
    """Largest singular value.

    Hermitian and anti-Hermitian inputs take the cheaper eigenvalue route;
    the asymmetry cutoff is far below the 1e-10 accuracy contract.
    """
    m = m.matrix if isinstance(m, LocalOperator) else np.asarray(m, dtype=complex)
    _check_finite(m)
    if m.size == 0:
        return 0.0
    fro = float(np.linalg.norm(m))
    if fro == 0.0:
        return 0.0
    herm = m.conj().T
    if float(np.linalg.norm(m - herm)) <= 1e-14 * fro:
        return float(np.max(np.abs(np.linalg.eigvalsh((m + herm) / 2))))
    if float(np.linalg.norm(m + herm)) <= 1e-14 * fro:
        return float(np.max(np.abs(np.linalg.eigvalsh((m - herm) / 2j))))
    return float(np.linalg.norm(m, 2))


def commutator(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    """``AB - BA`` on the union of the two supports."""
    x, y, region = a._aligned(b)
    return LocalOperator(region, x @ y - y @ x, a.site_dim)


def hermitian_eig(m) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix."""
    m = m.matrix if isinstance(m, LocalOperator) else np.asarray(m, dtype=complex)
    _check_finite(m)
    if not _is_hermitian(m, HERMITIAN_RTOL):
        raise HermiticityError("matrix is not Hermitian within tolerance")
    offdiag = m - np.diag(np.diag(m))
    if not np.any(offdiag):
        # already diagonal: keep it exact, so complex-time factors stay multiplicatively exact
        w = np.diag(m).real
        order = np.argsort(w, kind="stable")
        return w[order], np.eye(len(w), dtype=complex)[:, order]
    return np.linalg.eigh(m)


class Spectrum:
    """Eigendecomposition of a Hermitian operator, reusable across evolutions."""

    def __init__(self, h: LocalOperator):
        self.region = h.support
        self.site_dim = h.site_dim
        self.energies, self.vectors = hermitian_eig(h)

    @property
    def spread(self) -> float:
        return float(self.energies[-1] - self.energies[0]) if len(self.energies) else 0.0

    def to_eigenbasis(self, m: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ m @ self.vectors

    def from_eigenbasis(self, m: np.ndarray) -> np.ndarray:
        return self.vectors @ m @ self.vectors.conj().T

    def evolve(self, a: LocalOperator, z: complex) -> LocalOperator:
        """``e^{izH} A e^{-izH}`` on the region of H (A is embedded first)."""
        z = complex(z)
        if abs(z.imag) * self.spread > EXP_GUARD:
            raise GuardError(f"|Im z| * spread = {abs(z.imag) * self.spread:.3g} exceeds {EXP_GUARD}")
        mat = embed(a, self.region).matrix
        if z == 0:
            return LocalOperator(self.region, mat.copy(), self.site_dim)
        e = self.energies
        # entries of the rotated operator pick up exp(iz(E_m - E_n))
        phase = np.exp(1j * z * (e[:, None] - e[None, :]))
        rotated = self.to_eigenbasis(mat) * phase
        return LocalOperator(self.region, self.from_eigenbasis(rotated), self.site_dim)


def evolve_operator(h: LocalOperator, a: LocalOperator, z: complex) -> LocalOperator:
    """Heisenberg evolution at real or complex time ``z``."""
    region = h.support.union(a.support)
    return Spectrum(embed(h, region)).evolve(a, z)


def _trace_subscripts(n: int, keep_idx) -> str:
    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise GuardError("too many legs for a dense partial trace")
    rows = list(letters[:n])
    cols = [letters[n + i] if i in keep_idx else rows[i] for i in range(n)]
    out = [rows[i] for i in range(n) if i in keep_idx] + [cols[i] for i in range(n) if i in keep_idx]
    return "".join(rows) + "".join(cols) + "->" + "".join(out)


def partial_trace(a: LocalOperator, keep: Region) -> LocalOperator:
    """Trace out every leg of ``a`` not in ``keep``."""
    if not keep.issubset(a.support):
        raise SupportError("kept region must lie inside the operator support")
    n = len(a.support)
    d = a.site_dim
    if len(keep) == n:
        return LocalOperator(keep, a.matrix.copy(), d)
    keep_idx = {a.support.index(s) for s in keep}
    t = a.matrix.reshape((d,) * (2 * n))
    reduced = np.einsum(_trace_subscripts(n, keep_idx), t)
    k = len(keep)
    return LocalOperator(keep, reduced.reshape(d**k, d**k), d)


def conditional_expectation(a: LocalOperator, onto: Region) -> LocalOperator:
    """Normalized partial trace onto ``onto``: the Haar average over unitaries on the complement.

    The same map is the uniform average over conjugation by Pauli strings on
    the complement, so ``A - E(A) = mean_P [A, P] P*``.  Consequently, if
    ``||[A, P]|| <= eps ||A||`` for every Pauli string ``P`` on the complement,
    then ``||A - E(A)|| <= eps ||A||``: the documented constant is 1.
    """
    if not onto.issubset(a.support):
        raise SupportError("target region must lie inside the operator support")
    comp_dim = a.site_dim ** (len(a.support) - len(onto))
    reduced = partial_trace(a, onto)
    return LocalOperator(onto, reduced.matrix / comp_dim, a.site_dim)


def format_complex(z: complex) -> str:
    """``re+imj`` with 17 significant digits per part."""
    z = complex(z)
    im = format(z.imag, ".17g")
    sign = "" if im.startswith("-") else "+"
    return f"{format(z.real, '.17g')}{sign}{im}j"


def format_matrix(m) -> str:
    m = m.matrix if isinstance(m, LocalOperator) else np.asarray(m, dtype=complex)
    return "\n".join(" ".join(format_complex(v) for v in row) for row in m)
