"""Shared exception types."""


class LebconstError(Exception):
    """Base class for all package errors."""


class UnboundedPolytope(LebconstError):
    """The feasible region has a recession direction."""


class DegeneratePolytope(LebconstError):
    """The feasible region is empty or not full-dimensional."""


class DimensionTooLarge(LebconstError):
    """Operation is only implemented for d <= 3."""


class PolytopeFormatError(LebconstError):
    """Malformed polytope file."""


class SingularArgument(LebconstError):
    """Closed-form kernel denominator vanishes at this argument."""


class BudgetExceeded(LebconstError):
    """Grid refinement would exceed the evaluation budget."""


class InsufficientData(LebconstError):
    """Not enough measurements inside the fit window."""


class MissingInscribedBox(LebconstError):
    """Family spec does not define an inscribed box."""


class EmptySet(LebconstError):
    """Operation undefined for an empty lattice point set."""
