"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: schema problems exit 2, numeric guard
violations exit 3 and invariant failures exit 4.
"""


class SpinLatticeError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SpinLatticeError, ValueError):
    """Sites, metrics or matrices of incompatible dimension."""


class SupportError(SpinLatticeError, ValueError):
    """An operator support is not contained where it has to be."""


class HermiticityError(SpinLatticeError, ValueError):
    """A matrix required to be Hermitian is not (within tolerance)."""


class GuardError(SpinLatticeError):
    """A numeric guard (overflow, dimension ceiling, convergence radius) tripped."""


class InvariantError(SpinLatticeError):
    """A property that must hold mathematically was violated numerically."""
