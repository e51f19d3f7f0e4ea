"""Exception hierarchy shared across the package."""


class FracReactError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FracReactError):
    """Invalid scenario, mesh-generation or file input."""


class MeshConformityError(FracReactError):
    """Mixed-dimensional mesh violates a structural invariant."""


class SingularUpdateError(FracReactError):
    """Porosity/aperture update 1 + eta*dw <= 0 would produce a
    non-positive or infinite pore fraction."""


class NumericError(FracReactError):
    """Linear solver failure or non-finite state encountered."""


class WellPosednessError(NumericError):
    """System is singular by construction (e.g. all-natural boundary
    conditions for the flow problem)."""
