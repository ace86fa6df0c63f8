"""Problem instances: coefficients, retardation and interface data.

A problem lives on [0, pi/2) U (pi/2, pi]. Every coefficient function is a
pair of branches, each continuous up to the interface, so the one-sided limits
at pi/2 exist by construction. Evaluation exactly at pi/2 always names a side.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from ..exceptions import (
    DelayRangeViolation,
    DomainError,
    NegativeDelay,
    NonPositiveCoefficient,
    ProblemValidationError,
    ZeroCoefficient,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
DEFAULT_GRID_POINTS = 4096
DELAY_TOLERANCE = 1e-12

Violation = Union[ZeroCoefficient, NonPositiveCoefficient, DelayRangeViolation, NegativeDelay]


class Side(str, Enum):
    """Subinterval of the problem domain."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def bounds(self) -> Tuple[float, float]:
        return (0.0, HALF_PI) if self is Side.LEFT else (HALF_PI, math.pi)

    @property
    def start(self) -> float:
        return self.bounds[0]


def side_of(x: float) -> Side:
    """Side of a point strictly off the interface."""
    if x < 0.0 or x > math.pi:
        raise DomainError(f"x = {x!r} lies outside [0, pi]")
    if x == HALF_PI:
        raise DomainError("x = pi/2 is the interface point; a side must be given")
    return Side.LEFT if x < HALF_PI else Side.RIGHT


@dataclass(frozen=True)
class PiecewiseFn:
    """A real function given by a left branch on [0, pi/2] and a right branch on [pi/2, pi].

    Branches marked ``vectorized`` accept numpy arrays; otherwise sampling
    falls back to one call per point.
    """

    left: Callable
    right: Callable
    vectorized: bool = False

    @classmethod
    def constant(cls, value: float) -> "PiecewiseFn":
        value = float(value)

        def branch(x):
            return np.full_like(np.asarray(x, dtype=float), value)

        return cls(branch, branch, vectorized=True)

    @classmethod
    def uniform(cls, fn: Callable, vectorized: bool = False) -> "PiecewiseFn":
        """Same expression on both sides."""
        return cls(fn, fn, vectorized=vectorized)

    def branch(self, side: Side) -> Callable:
        return self.left if side is Side.LEFT else self.right

    def __call__(self, x: float, side: Optional[Side] = None) -> float:
        if side is None:
            side = side_of(x)
        lo, hi = side.bounds
        if not lo <= x <= hi:
            raise DomainError(f"x = {x!r} lies outside the {side.value} branch [{lo}, {hi}]")
        return float(self.branch(side)(x))

    def sample(self, xs: np.ndarray, side: Side) -> np.ndarray:
        """Evaluate one branch on an array of points."""
        xs = np.asarray(xs, dtype=float)
        fn = self.branch(side)
        if self.vectorized:
            values = np.asarray(fn(xs), dtype=float)
            return np.broadcast_to(values, xs.shape).copy()
        return np.array([float(fn(float(x))) for x in xs.ravel()]).reshape(xs.shape)


@dataclass(frozen=True)
class ProblemSpec:
    """All data of one problem instance.

    p(x) = p1**2 on [0, pi/2) and p2**2 on (pi/2, pi]; boundary conditions
    a1*y(0) + a2*y'(0) = 0 and y'(pi) + d*y(pi) = 0; interface conditions
    gamma1*y(pi/2-0) = delta1*y(pi/2+0), gamma2*y'(pi/2-0) = delta2*y'(pi/2+0).
    """

    p1: float
    p2: float
    a1: float
    a2: float
    d: float
    gamma1: float
    gamma2: float
    delta1: float
    delta2: float
    q: PiecewiseFn
    delta_fn: PiecewiseFn

    def p(self, side: Side) -> float:
        return self.p1 if side is Side.LEFT else self.p2


@dataclass(frozen=True)
class ValidatedProblem:
    """A ProblemSpec that passed validation, plus facts derived on the validation grid."""

    spec: ProblemSpec
    grid_points: int
    q_is_zero: bool = False
    delay_is_zero: bool = False
    max_delay: Tuple[float, float] = (0.0, 0.0)

    @property
    def is_gated(self) -> bool:
        """gamma1*delta2 == gamma2*delta1, the regime of the closed-form asymptotics."""
        s = self.spec
        lhs, rhs = s.gamma1 * s.delta2, s.gamma2 * s.delta1
        return math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-14)

    @property
    def seed_gap(self) -> float:
        """Distance between consecutive zeros of theta0."""
        s = self.spec
        return 2.0 * s.p1 * s.p2 / (s.p1 + s.p2)


def _scalar_violations(spec: ProblemSpec) -> List[Violation]:
    violations: List[Violation] = []
    for name in ("p1", "p2"):
        value = getattr(spec, name)
        if value == 0:
            violations.append(ZeroCoefficient(name))
        elif value < 0:
            violations.append(NonPositiveCoefficient(name, value))
    # a1 and d may vanish: no formula divides by them
    for name in ("a2", "gamma1", "gamma2", "delta1", "delta2"):
        if getattr(spec, name) == 0:
            violations.append(ZeroCoefficient(name))
    return violations


def _delay_violations(spec: ProblemSpec, grid_points: int) -> List[Violation]:
    violations: List[Violation] = []
    for side in (Side.LEFT, Side.RIGHT):
        lo, hi = side.bounds
        xs = np.linspace(lo, hi, grid_points)
        delays = spec.delta_fn.sample(xs, side)
        for x, value in zip(xs[delays < -DELAY_TOLERANCE], delays[delays < -DELAY_TOLERANCE]):
            violations.append(NegativeDelay(float(x), float(value)))
        shifted = xs - delays
        bad = shifted < lo - DELAY_TOLERANCE
        for x, s in zip(xs[bad], shifted[bad]):
            violations.append(DelayRangeViolation(float(x), float(s), lo))
    return violations


def find_violations(spec: ProblemSpec, grid_points: int = DEFAULT_GRID_POINTS) -> List[Violation]:
    """All scalar and grid-checked delay violations of a problem instance."""
    if grid_points < 2:
        raise DomainError(f"grid_points must be >= 2, got {grid_points}")
    return _scalar_violations(spec) + _delay_violations(spec, grid_points)


def validate_problem(spec: ProblemSpec, grid_points: int = DEFAULT_GRID_POINTS) -> ValidatedProblem:
    """Wrap ``spec`` as validated, or raise ProblemValidationError listing every violation.

    The delay constraints are checked on a uniform grid of ``grid_points`` per
    subinterval (endpoints included, as one-sided limits); violations between
    grid points are not detected.
    """
    violations = find_violations(spec, grid_points)
    if violations:
        raise ProblemValidationError(violations)

    q_zero = True
    delay_zero = True
    max_delay = []
    for side in (Side.LEFT, Side.RIGHT):
        xs = np.linspace(*side.bounds, grid_points)
        q_zero = q_zero and bool(np.all(spec.q.sample(xs, side) == 0.0))
        delays = spec.delta_fn.sample(xs, side)
        delay_zero = delay_zero and bool(np.all(delays == 0.0))
        max_delay.append(float(np.max(delays)))

    validated = ValidatedProblem(
        spec=spec,
        grid_points=grid_points,
        q_is_zero=q_zero,
        delay_is_zero=delay_zero,
        max_delay=(max_delay[0], max_delay[1]),
    )
    if not validated.is_gated:
        logger.warning(
            "gamma1*delta2 != gamma2*delta1: asymptotic comparisons are outside the gated regime"
        )
    return validated


def delayed_argument(problem: ValidatedProblem, x: float) -> Tuple[float, Side]:
    """Return (x - Delta(x), side of x); the shifted point never leaves x's side."""
    side = side_of(x)
    shifted = x - problem.spec.delta_fn(x, side)
    return min(max(shifted, side.start), x), side
