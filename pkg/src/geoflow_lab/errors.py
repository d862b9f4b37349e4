"""Exception hierarchy shared by every module of the package."""


class GeoflowError(Exception):
    """Base class for all package errors."""


class NumericOverflowError(GeoflowError, ArithmeticError):
    pass


class DegenerateArcError(GeoflowError, ValueError):
    """Raised for zero-length arcs (coincident endpoints)."""


class ConstructionError(GeoflowError):
    pass


class RejectionStallError(GeoflowError):
    pass


class CapExceededError(GeoflowError, ValueError):
    """Requested horizon is above the configured enumeration cap."""


class MemoryBudgetError(GeoflowError, MemoryError):
    pass


class EmptyEnsembleError(GeoflowError):
    """Every shell of the arc ensemble is empty."""


class InsufficientGridError(GeoflowError, ValueError):
    pass


class EnsembleMismatchError(GeoflowError, ValueError):
    pass


class NonConcaveError(GeoflowError):
    pass


class FamilyMismatchError(GeoflowError, ValueError):
    pass
