"""Exception hierarchy.

Every error carries a stable ``code`` string so the CLI can emit structured
diagnostics. ``DomainError`` subclasses map to exit code 2.
"""


class PhononError(Exception):
    code = "phonon_error"

    def to_dict(self) -> dict:
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class DomainError(PhononError, ValueError):
    """Input outside the mathematical domain of an operation."""

    code = "domain_error"


class DegenerateMomentum(DomainError):
    code = "degenerate_momentum"


class DivergentIntegral(DomainError):
    code = "divergent_integral"


class UnsupportedRank(DomainError):
    code = "unsupported_rank"


class UnsupportedDimension(DomainError):
    code = "unsupported_dimension"


class NonPositiveExponent(DomainError):
    code = "non_positive_exponent"


class OutsideRealizableSet(DomainError):
    code = "outside_realizable_set"


class GridMismatch(DomainError):
    code = "grid_mismatch"


class NonPeriodicDomain(DomainError):
    code = "non_periodic_domain"


class GridTooSmall(DomainError):
    code = "grid_too_small"


class NoBracket(DomainError):
    code = "no_bracket"


class ComplexEigenvalues(DomainError):
    code = "complex_eigenvalues"


class StabilityViolation(DomainError):
    code = "stability_violation"


class ToleranceNotReached(PhononError, ArithmeticError):
    code = "tolerance_not_reached"


class NoConvergence(PhononError, ArithmeticError):
    code = "no_convergence"


class InversionFailure(PhononError):
    """Moment-to-multiplier inversion failed inside a solver."""

    code = "inversion_failure"


class ConfigError(PhononError, ValueError):
    code = "config_error"
