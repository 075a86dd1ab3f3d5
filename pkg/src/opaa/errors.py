"""Error types shared across the package.

Plain ``ValueError`` is used for invalid arguments; the classes here mark
conditions a caller may want to handle specially.
"""


class CapacityError(RuntimeError):
    """A requested computation exceeds an enforced size or overflow cap."""


class NumericalDomainError(ValueError):
    """An integrand or transform value left the representable range."""


class DegenerateTargetError(RuntimeError):
    """The transform of the target is numerically zero everywhere."""


class OracleRefusedError(RuntimeError):
    """The reference integrator could not certify its own refinement."""
