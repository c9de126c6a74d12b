"""Finite-volume operator algebra for quantum spin systems."""

__version__ = "0.1.0"

from .errors import (
    DimensionError,
    GuardError,
    HermiticityError,
    InvariantError,
    SpinLatticeError,
    SupportError,
)
from .lattice import Metric, Region, ball, diameter, distance, fattening, region_distance
from .tensorcore import LocalOperator, Spectrum, commutator, embed, operator_norm, pauli
from .models import Interaction, heisenberg_xxz, ising, local_hamiltonian
from .states import DensityState, gibbs_state

__all__ = [
    "DensityState",
    "DimensionError",
    "GuardError",
    "HermiticityError",
    "Interaction",
    "InvariantError",
    "LocalOperator",
    "Metric",
    "Region",
    "Spectrum",
    "SpinLatticeError",
    "SupportError",
    "ball",
    "commutator",
    "diameter",
    "distance",
    "embed",
    "fattening",
    "gibbs_state",
    "heisenberg_xxz",
    "ising",
    "local_hamiltonian",
    "operator_norm",
    "pauli",
    "region_distance",
]
