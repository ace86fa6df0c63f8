"""Custom exceptions for retspec."""

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple


class RetSpecError(Exception):
    """Base exception for retspec."""

    pass


class ConfigError(RetSpecError):
    """Raised when an integrator, quadrature or experiment setting is invalid."""

    pass


class DomainError(RetSpecError):
    """Raised when a point lies outside [0, pi/2) U (pi/2, pi] or an integral's interval."""

    pass


class OutOfRangeError(RetSpecError):
    """Raised when a dense solution is queried outside its region."""

    pass


class MismatchedLambdaError(RetSpecError):
    """Raised when omega_2 is requested from an omega_1 computed at another lambda."""

    pass


class IndexOutOfRangeError(RetSpecError):
    """Raised when a nodal index j lies outside the formula's range."""

    pass


class IncompleteSpectrumError(RetSpecError):
    """Raised when a partial trace sum needs eigenvalues the spectrum lacks."""

    pass


class ContourTooLargeError(RetSpecError):
    """Raised when the residue contour would reach the nearest pole of cot."""

    pass


class NonConvergenceError(RetSpecError):
    """Raised when successive approximations stop contracting."""

    pass


class PreconditionViolatedError(RetSpecError):
    """Raised when an oracle is asked about an instance outside its preconditions."""

    pass


class DegenerateInputError(RetSpecError):
    """Raised when a convergence slope cannot be fitted."""

    pass


class AsymptoticRegimeError(RetSpecError):
    """Raised in strict mode when an instance violates gamma1*delta2 == gamma2*delta1."""

    pass


class UnknownIdentifierError(RetSpecError):
    """Raised when an expression references an unknown variable or function."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"Unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class ExprSyntaxError(RetSpecError):
    """Raised when an expression cannot be parsed."""

    def __init__(self, offset: int, expected: Sequence[str], source: str = ""):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        message = f"Syntax error at offset {offset}: expected one of {', '.join(self.expected)}"
        if source:
            message += f"\n  {source}\n  {' ' * offset}^"
        super().__init__(message)


class ExprEvaluationError(RetSpecError):
    """Raised when an expression cannot be evaluated, e.g. division by zero."""

    pass


class BracketNotFoundError(RetSpecError):
    """Raised when no sign change of the characteristic function is found near a seed."""

    def __init__(
        self,
        n: int,
        interval: Tuple[float, float],
        samples: Optional[List[Tuple[float, float]]] = None,
    ):
        self.n = n
        self.interval = interval
        self.samples = samples or []
        shown = ", ".join(f"({lam:.6g}, {val:.3g})" for lam, val in self.samples[:12])
        super().__init__(
            f"No sign change of theta for n={n} on [{interval[0]:.10g}, {interval[1]:.10g}]"
            + (f"; samples: {shown}" if shown else "")
        )


class SpectrumError(RetSpecError):
    """Raised when one or more eigenvalues could not be located."""

    def __init__(self, failures: List[RetSpecError], partial: Any = None):
        self.failures = failures
        self.partial = partial
        lines = [f"  {failure}" for failure in failures]
        super().__init__(
            f"{len(failures)} eigenvalue search(es) failed:\n" + "\n".join(lines)
        )


@dataclass(frozen=True)
class ZeroCoefficient:
    """A scalar that must be nonzero is zero."""

    name: str

    def describe(self) -> str:
        return f"coefficient {self.name} must be nonzero"


@dataclass(frozen=True)
class NonPositiveCoefficient:
    """A diffusion coefficient p_i is not strictly positive."""

    name: str
    value: float

    def describe(self) -> str:
        return f"coefficient {self.name} = {self.value:.10g} must be positive"


@dataclass(frozen=True)
class DelayRangeViolation:
    """x - Delta(x) falls below the start of its subinterval."""

    x: float
    shifted: float
    bound: float

    def describe(self) -> str:
        return f"x - Delta(x) = {self.shifted:.10g} < {self.bound:.10g} at x = {self.x:.10g}"


@dataclass(frozen=True)
class NegativeDelay:
    """Delta(x) is negative."""

    x: float
    value: float

    def describe(self) -> str:
        return f"Delta({self.x:.10g}) = {self.value:.10g} < 0"


class ProblemValidationError(RetSpecError):
    """Raised when a problem instance violates its scalar or delay constraints."""

    def __init__(self, violations: list):
        self.violations = list(violations)
        shown = [f"  {v.describe()}" for v in self.violations[:10]]
        if len(self.violations) > 10:
            shown.append(f"  ... and {len(self.violations) - 10} more")
        super().__init__("Problem validation failed:\n" + "\n".join(shown))
