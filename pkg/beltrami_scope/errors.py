# beltrami_scope/errors.py
"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NOT_INVARIANT = 3
EXIT_NOT_BELTRAMI = 4
EXIT_NON_GENERIC = 5
EXIT_NUMERICAL = 6


class BeltramiScopeError(Exception):
    """Base class for every error raised by the library."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, **diagnostics: object):
        super().__init__(message)
        self.diagnostics = diagnostics


# --- Invalid input (exit 2) ---
class ConfigError(BeltramiScopeError):
    exit_code = EXIT_INVALID_INPUT


class GridFormatError(BeltramiScopeError):
    """Malformed .bsg header, shape mismatch or non-finite payload."""

    exit_code = EXIT_INVALID_INPUT


class FieldDataError(BeltramiScopeError):
    exit_code = EXIT_INVALID_INPUT


class ChartDomainError(BeltramiScopeError):
    exit_code = EXIT_INVALID_INPUT


class SynthesisSpecError(BeltramiScopeError):
    exit_code = EXIT_INVALID_INPUT


# --- Theory preconditions ---
class NotInvariantError(BeltramiScopeError):
    """The field is not tangent to the boundary torus."""

    exit_code = EXIT_NOT_INVARIANT


class NotBeltramiError(BeltramiScopeError):
    exit_code = EXIT_NOT_BELTRAMI


class NonGenericFieldError(BeltramiScopeError):
    """The projected field has a curve of rest points or another degeneracy."""

    exit_code = EXIT_NON_GENERIC


class DegenerateSingularityError(NonGenericFieldError):
    pass


# --- Numerical failures (exit 6) ---
class DegenerateEmbeddingError(BeltramiScopeError):
    pass


class NotTransverseError(BeltramiScopeError):
    """The disc boundary is not transverse to the contact planes."""


class VanishingFieldError(BeltramiScopeError):
    pass


class StepUnderflowError(BeltramiScopeError):
    pass


class WindingError(BeltramiScopeError):
    pass


class SigmaContradictionError(BeltramiScopeError):
    pass


class BoundaryDegenerateError(BeltramiScopeError):
    pass


class StiffnessError(BeltramiScopeError):
    pass


class OracleUnavailableError(BeltramiScopeError):
    pass
