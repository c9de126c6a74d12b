"""GNS construction for states on the full matrix algebra M_D.

Algebra elements are coefficient vectors over the matrix units ``E_ij``,
flattened row-major (index ``i * D + j``).  In that basis the Gram matrix of
``<A, B> = omega(A* B)`` is ``I_D (x) rho^T``; its kernel is the left ideal
``N_omega`` and the quotient is coordinatized by the eigenvectors with
nonzero eigenvalue, scaled so that the inner product becomes the standard one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Tuple

import numpy as np

from .errors import DimensionError, GuardError, InvariantError
from .tensorcore import LocalOperator

MAX_ALGEBRA_DIM = 16
MAX_COMMUTANT_GNS_DIM = 64
NULL_RTOL = 1e-9


def _rho_of(omega) -> np.ndarray:
    rho = getattr(omega, "rho", omega)
    return np.asarray(rho, dtype=complex)


def matrix_unit(D: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((D, D), dtype=complex)
    e[i, j] = 1.0
    return e


def gram_matrix(D: int, rho: np.ndarray) -> np.ndarray:
    """``G[(ij),(kl)] = omega(E_ij* E_kl) = delta_ik rho_lj``, built entry by entry."""
    g = np.zeros((D * D, D * D), dtype=complex)
    for i in range(D):
        for j in range(D):
            for l in range(D):
                g[i * D + j, i * D + l] = rho[l, j]
    return g


@dataclass
class GnsRepresentation:
    """Quotient coordinates, representation map and cyclic vector of a state on M_D."""

    algebra_dim: int
    gns_dim: int
    basis_map: np.ndarray
    cyclic_vector: np.ndarray
    _inverse_map: np.ndarray = field(repr=False)

    def coords(self, a) -> np.ndarray:
        """Quotient coordinates of the class of ``a``."""
        m = a.matrix if isinstance(a, LocalOperator) else np.asarray(a, dtype=complex)
        return self.basis_map.conj().T @ m.reshape(-1)

    def rep(self, a) -> np.ndarray:
        """``pi(A)``: left multiplication on the quotient, as an r x r matrix."""
        m = a.matrix if isinstance(a, LocalOperator) else np.asarray(a, dtype=complex)
        if m.shape != (self.algebra_dim, self.algebra_dim):
            raise DimensionError("operator does not belong to this algebra")
        left = np.kron(m, np.eye(self.algebra_dim))
        return self.basis_map.conj().T @ left @ self._inverse_map

    def reconstruct(self, a) -> complex:
        """``<Omega, pi(A) Omega>``."""
        return complex(np.vdot(self.cyclic_vector, self.rep(a) @ self.cyclic_vector))


def gns_construct(D: int, omega) -> GnsRepresentation:
    if not 2 <= D <= MAX_ALGEBRA_DIM:
        raise GuardError(f"algebra dimension {D} outside [2, {MAX_ALGEBRA_DIM}]")
    rho = _rho_of(omega)
    if rho.shape != (D, D):
        raise DimensionError("density matrix does not match the algebra dimension")
    g = gram_matrix(D, rho)
    vals, vecs = np.linalg.eigh((g + g.conj().T) / 2)
    keep = vals > NULL_RTOL * max(vals[-1], 0.0)
    w, lam = vecs[:, keep], vals[keep]
    basis_map = w * np.sqrt(lam)
    inverse_map = w / np.sqrt(lam)
    identity = np.eye(D, dtype=complex).reshape(-1)
    omega_vec = basis_map.conj().T @ identity
    return GnsRepresentation(D, int(keep.sum()), basis_map, omega_vec, inverse_map)


def _generators(D: int) -> List[np.ndarray]:
    # E_{i,i+1} and E_{i+1,i} generate M_D as an algebra
    gens = []
    for i in range(D - 1):
        gens.append(matrix_unit(D, i, i + 1))
        gens.append(matrix_unit(D, i + 1, i))
    return gens


def commutant_dimension(rep: GnsRepresentation) -> int:
    """Dimension of ``{X : [X, pi(E)] = 0}`` solved as a linear system."""
    r = rep.gns_dim
    if r > MAX_COMMUTANT_GNS_DIM:
        raise GuardError(f"GNS dimension {r} too large for the dense commutant solve")
    eye = np.eye(r)
    normal = np.zeros((r * r, r * r), dtype=complex)
    for e in _generators(rep.algebra_dim):
        p = rep.rep(e)
        # column-major vec: vec(XP - PX) = (P^T (x) I - I (x) P) vec(X)
        m = np.kron(p.T, eye) - np.kron(eye, p)
        normal += m.conj().T @ m
    vals = np.linalg.eigvalsh(normal)
    scale = max(vals[-1], 1.0)
    return int(np.sum(vals <= 1e-9 * scale))


def purity_irreducibility_crosscheck(D: int, omega) -> Tuple[bool, int]:
    rho = _rho_of(omega)
    is_pure = float(np.linalg.norm(rho @ rho - rho, 2)) <= 1e-9
    cdim = commutant_dimension(gns_construct(D, rho))
    if is_pure != (cdim == 1):
        raise InvariantError(f"purity {is_pure} disagrees with commutant dimension {cdim}")
    return is_pure, cdim


def reconstruction_residual(rep: GnsRepresentation, omega, operators: Iterable) -> float:
    """``max |omega(A) - <Omega, pi(A) Omega>|`` over the given operators."""
    rho = _rho_of(omega)
    worst = 0.0
    for a in operators:
        m = a.matrix if isinstance(a, LocalOperator) else np.asarray(a, dtype=complex)
        worst = max(worst, abs(np.trace(rho @ m) - rep.reconstruct(m)))
    return float(worst)
