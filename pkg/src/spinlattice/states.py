"""Density-matrix states and the equilibrium criteria checked on them.

Every finite-volume check uses the derivation restricted to the state's
region, ``delta(A) = i[H_region, A]``, because that is the dynamics for which
a Gibbs state or an eigenvector projector of ``H_region`` is invariant.

The functional norm ``||omega_1 - omega_2||`` equals the trace norm of
``rho_1 - rho_2``: ``|Tr((rho_1 - rho_2) A)|`` is maximized over ``||A|| = 1``
by the unitary ``A = sign(rho_1 - rho_2)``, and the duality between the
operator norm and the trace norm shows nothing larger is possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, GuardError, HermiticityError, InvariantError, SupportError
from .lattice import Region
from .models import Interaction, derivation_apply
from .tensorcore import (
    LocalOperator,
    Spectrum,
    _is_hermitian,
    embed,
    evolve_operator,
    hermitian_eig,
    partial_trace,
    pauli,
)

ENTROPY_CLAMP = 1e-14
SUPPORT_CUTOFF = 1e-12
GIBBS_GUARD = 1400.0
IMAG_TOL = 1e-9


class DensityState:
    """The state ``A -> Tr(rho A)`` on the operators of ``region``."""

    def __init__(self, region: Region, rho, site_dim: int = 2, check: bool = True):
        rho = np.asarray(rho, dtype=complex)
        dim = site_dim ** len(region)
        if rho.shape != (dim, dim):
            raise DimensionError(f"density matrix shape {rho.shape} does not fit the region")
        if check:
            if not _is_hermitian(rho, 1e-10):
                raise HermiticityError("density matrix is not Hermitian")
            if abs(np.trace(rho) - 1) > 1e-12:
                raise ValueError(f"density matrix trace {np.trace(rho).real!r} is not 1")
            if np.linalg.eigvalsh(rho)[0] < -1e-10:
                raise ValueError("density matrix is not positive semidefinite")
        self.region = region
        self.rho = rho
        self.site_dim = site_dim

    def __repr__(self) -> str:
        return f"DensityState(sites={list(self.region.sites)})"

    @classmethod
    def maximally_mixed(cls, region: Region, site_dim: int = 2) -> "DensityState":
        dim = site_dim ** len(region)
        return cls(region, np.eye(dim) / dim, site_dim)

    @classmethod
    def pure(cls, region: Region, psi, site_dim: int = 2) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(region, np.outer(psi, psi.conj()), site_dim)

    @classmethod
    def product(cls, region: Region, local_rhos: Sequence) -> "DensityState":
        """Tensor product of one density matrix per site, in region order."""
        rho = np.eye(1, dtype=complex)
        for r in local_rhos:
            rho = np.kron(rho, np.asarray(r, dtype=complex))
        return cls(region, rho)

    def expect(self, a: LocalOperator) -> complex:
        if not a.support.issubset(self.region):
            raise SupportError("operator support exceeds the state's region")
        m = embed(a, self.region).matrix
        # Tr(rho m) without forming the product
        return complex(np.einsum("ij,ji->", self.rho, m))

    def restrict(self, region: Region) -> "DensityState":
        reduced = partial_trace(LocalOperator(self.region, self.rho, self.site_dim), region)
        return DensityState(region, reduced.matrix, self.site_dim, check=False)

    @property
    def is_pure(self) -> bool:
        return float(np.linalg.norm(self.rho @ self.rho - self.rho, 2)) <= 1e-9


def expectation(omega, a: LocalOperator) -> complex:
    return omega.expect(a)


def gibbs_state(h: LocalOperator, beta: float) -> DensityState:
    """``exp(-beta H) / Z`` computed on the spectrum shifted by its minimum."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    spec = Spectrum(h)
    if beta * spec.spread > GIBBS_GUARD:
        raise GuardError(f"beta * spread = {beta * spec.spread:.3g} exceeds {GIBBS_GUARD}")
    weights = np.exp(-beta * (spec.energies - spec.energies[0]))
    weights /= weights.sum()
    rho = (spec.vectors * weights) @ spec.vectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityState(h.support, rho, h.site_dim, check=False)


def log_partition_function(h: LocalOperator, beta: float) -> float:
    energies, _ = hermitian_eig(h)
    e0 = energies[0]
    return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (energies - e0)))))


def gibbs_free_energy(h: LocalOperator, beta: float) -> float:
    """Free energy of the Gibbs state, ``-log Tr exp(-beta H) / beta``."""
    return -log_partition_function(h, beta) / beta


def kms_residual(
    h: LocalOperator,
    beta: float,
    a: LocalOperator,
    b: LocalOperator,
    t: float,
    omega: Optional[DensityState] = None,
    spectrum: Optional[Spectrum] = None,
) -> float:
    """``|omega(A alpha_{t+i beta}(B)) - omega(alpha_t(B) A)|``.

    ``omega`` defaults to the Gibbs state of ``h``; ``spectrum`` may carry a
    precomputed eigendecomposition of ``h`` on the state's region.  Everything is rotated to
    the energy eigenbasis first, where ``h`` is diagonal and the complex-time
    factors multiply matrix entries exactly; in the site basis the huge
    entries of ``alpha_{i beta}(B)`` would swamp the trace in roundoff.
    """
    if omega is None:
        omega = gibbs_state(h, beta)
    region = omega.region
    if not h.support.union(a.support, b.support).issubset(region):
        raise SupportError("Hamiltonian and observables must live in the state's region")
    spec = spectrum if spectrum is not None and spectrum.region == region else Spectrum(embed(h, region))
    diag = LocalOperator(region, np.diag(spec.energies), h.site_dim)

    def rotated(x: LocalOperator) -> LocalOperator:
        return LocalOperator(region, spec.to_eigenbasis(embed(x, region).matrix), h.site_dim)

    ar, br = rotated(a), rotated(b)
    rho = spec.to_eigenbasis(omega.rho)
    b_shift = evolve_operator(diag, br, complex(t, beta)).matrix
    b_real = evolve_operator(diag, br, t).matrix
    # Tr(XYZ) = sum((XY) * Z^T)
    lhs = np.sum((rho @ ar.matrix) * b_shift.T)
    rhs = np.sum((rho @ b_real) * ar.matrix.T)
    return float(abs(lhs - rhs))


def _real_part_checked(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value.real)):
        raise InvariantError(f"{what} has imaginary part {value.imag:.3g}")
    return float(value.real)


def _energy_flux(omega, phi: Interaction, a: LocalOperator) -> complex:
    """``-i omega(A* delta(A))`` with the derivation restricted to the state's region."""
    da = derivation_apply(phi, a, window=omega.region)
    return -1j * omega.expect(a.dag() @ da)


def x_log_x_over_y(x: float, y: float, cutoff: float = 1e-15) -> float:
    """``x log(x / y)`` with value 0 at ``x = 0`` and ``+inf`` at ``x > 0, y = 0``."""
    if x <= cutoff:
        return 0.0
    if y <= cutoff:
        return math.inf
    return x * math.log(x / y)


def autocorrelation_lower_bound_check(
    omega, phi: Interaction, beta: float, a: LocalOperator
) -> Tuple[float, float]:
    """Both sides of ``-i beta omega(A* delta(A)) >= omega(A*A) log(omega(A*A)/omega(AA*))``."""
    lhs = beta * _real_part_checked(_energy_flux(omega, phi, a), "-i omega(A* delta(A))")
    x = _real_part_checked(omega.expect(a.dag() @ a), "omega(A*A)")
    y = _real_part_checked(omega.expect(a @ a.dag()), "omega(AA*)")
    return lhs, x_log_x_over_y(x, y)


def ground_state_residual(omega, phi: Interaction, samples: Iterable[LocalOperator]) -> float:
    """Minimum of ``-i omega(A* delta(A))`` over the samples (nonnegative for ground states)."""
    values = [
        _real_part_checked(_energy_flux(omega, phi, a), "-i omega(A* delta(A))") for a in samples
    ]
    if not values:
        raise ValueError("no samples given")
    return min(values)


def passivity_check(omega, phi: Interaction, unitaries: Iterable[LocalOperator]) -> float:
    """Minimum of ``-i omega(U* delta(U))`` over local unitaries."""
    values = []
    for u in unitaries:
        m = u.matrix
        if np.linalg.norm(m.conj().T @ m - np.eye(len(m)), 2) > 1e-10:
            raise ValueError("sample is not unitary")
        values.append(_real_part_checked(_energy_flux(omega, phi, u), "-i omega(U* delta(U))"))
    if not values:
        raise ValueError("no unitaries given")
    return min(values)


def _spectrum(rho: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2)


def _entropy_of(eigs: np.ndarray) -> float:
    p = eigs[eigs > ENTROPY_CLAMP]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(omega) -> float:
    """``-Tr(rho log rho)`` in nats."""
    rho = omega.rho if isinstance(omega, DensityState) else np.asarray(omega)
    return _entropy_of(_spectrum(rho))


def relative_entropy(sigma, rho) -> float:
    """``Tr(rho log rho - rho log sigma)``; ``math.inf`` when supp(rho) is not inside supp(sigma)."""
    if isinstance(sigma, DensityState) and isinstance(rho, DensityState):
        if sigma.region != rho.region:
            raise SupportError("states live on different regions")
    s = sigma.rho if isinstance(sigma, DensityState) else np.asarray(sigma, dtype=complex)
    r = rho.rho if isinstance(rho, DensityState) else np.asarray(rho, dtype=complex)
    s_vals, s_vecs = np.linalg.eigh((s + s.conj().T) / 2)
    # weight of rho along each eigenvector of sigma
    weights = np.sum(s_vecs.conj() * (r @ s_vecs), axis=0).real
    kernel = s_vals <= SUPPORT_CUTOFF
    if np.any(weights[kernel] > SUPPORT_CUTOFF):
        return math.inf
    cross = float(np.sum(weights[~kernel] * np.log(s_vals[~kernel])))
    return -_entropy_of(_spectrum(r)) - cross


def free_energy(omega: DensityState, h: LocalOperator, beta: float) -> float:
    """``omega(H) - S(omega) / beta``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    energy = omega.expect(h).real
    return float(energy - von_neumann_entropy(omega) / beta)


def entropy_density_sequence(
    state_rule: Callable[[Region], DensityState], volumes: Sequence[Region]
) -> List[float]:
    """``S_V / |V|`` for each volume; no limit is taken."""
    out = []
    for v in volumes:
        out.append(von_neumann_entropy(state_rule(v)) / len(v))
    return out


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + 1e-10:
            raise ValueError("Bloch vector outside the unit ball")

    @property
    def length(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    @property
    def is_pure(self) -> bool:
        return abs(self.length - 1) <= 1e-9


def bloch_vector(omega: DensityState) -> BlochVector:
    if len(omega.region) != 1 or omega.site_dim != 2:
        raise DimensionError("Bloch vectors describe single qubits only")
    comps = [float(np.trace(omega.rho @ pauli(a)).real) for a in "xyz"]
    return BlochVector(*comps)


def from_bloch(v: BlochVector, region: Optional[Region] = None) -> DensityState:
    region = region if region is not None else Region(((0,),))
    rho = (np.eye(2) + v.x * pauli("x") + v.y * pauli("y") + v.z * pauli("z")) / 2
    return DensityState(region, rho)


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def transition_probability(omega1: DensityState, omega2: DensityState) -> float:
    """``1 - ||omega1 - omega2||^2 / 4`` with the trace norm of ``rho1 - rho2``."""
    if omega1.region != omega2.region:
        raise SupportError("states live on different regions")
    return 1.0 - trace_norm(omega1.rho - omega2.rho) ** 2 / 4.0


def polarization(omega: DensityState) -> float:
    """Expectation of the mean magnetization ``sum_n sz_n / |region|``."""
    total = sum(omega.expect(LocalOperator.pauli_string({s: "z"})).real for s in omega.region)
    return total / len(omega.region)


def polarization_gap(L: int) -> Tuple[float, float]:
    """Mean magnetization in the all-up and all-down states of a chain of odd length."""
    if L < 1 or L % 2 == 0:
        raise ValueError("the chain length must be odd")
    n = (L - 1) // 2
    region = Region.interval(-n, n)
    up = np.diag([1.0, 0.0])
    down = np.diag([0.0, 1.0])
    plus = polarization(DensityState.product(region, [up] * L))
    minus = polarization(DensityState.product(region, [down] * L))
    return plus, minus
