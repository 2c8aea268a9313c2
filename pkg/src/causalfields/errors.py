"""Exception types shared across the package."""


class CausalFieldsError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CausalFieldsError):
    """Bad user input: config values, lattice sizing, CFL violations."""


class DomainError(CausalFieldsError):
    """An operation was asked outside its domain of validity.

    Examples: a test function touching the lattice time boundary, a
    region that is not causally determined by the requested target, a
    degenerate double cone.
    """


class CovarianceError(CausalFieldsError):
    """A morphism failed its isometry or pairing-transport verification."""


class SolverInconsistencyError(CausalFieldsError):
    """An internal cross-check of a solver or state construction failed."""
