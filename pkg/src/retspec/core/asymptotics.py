"""Closed-form asymptotics: delay integrals, eigenvalue expansions and nodal predictions.

Every formula here is evaluated exactly as stated for the interface problem,
including its known limitations outside the gated regime
gamma1*delta2 == gamma2*delta1. Numerical ground truth lives in
``characteristic`` and ``nodal``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..exceptions import ConfigError, DomainError, IndexOutOfRangeError
from .characteristic import lambda0
from .problem import HALF_PI, Side, ValidatedProblem
from .quadrature import QuadratureConfig, composite_gauss_legendre

logger = logging.getLogger(__name__)

DOMAIN_TOLERANCE = 1e-12


class DelayIntegralKind(str, Enum):
    """A, B over [0, x] with x <= pi/2; C, D over [pi/2, x]. A, C use sine, B, D cosine."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def side(self) -> Side:
        return Side.LEFT if self in (DelayIntegralKind.A, DelayIntegralKind.B) else Side.RIGHT

    @property
    def trig(self):
        return np.sin if self in (DelayIntegralKind.A, DelayIntegralKind.C) else np.cos


class Theorem1Convention(str, Enum):
    """Normalization of the last correction term: K^2/lambda^3 or K^2/(pi^2 lambda^3)."""

    PRINTED = "printed"
    PI_SQUARED = "pi_squared"


def delay_integral(
    problem: ValidatedProblem,
    kind: DelayIntegralKind,
    x: float,
    lam,
    quad_cfg: Optional[QuadratureConfig] = None,
):
    """Integral of q(tau) * trig(lambda * Delta(tau) / p) over the kind's interval up to x.

    ``lam`` may be complex; the result is then complex.
    """
    quad_cfg = quad_cfg or QuadratureConfig()
    side = kind.side
    lo, hi = side.bounds
    if not lo - DOMAIN_TOLERANCE <= x <= hi + DOMAIN_TOLERANCE:
        raise DomainError(f"integral {kind.value} is defined for x in [{lo}, {hi}], got {x!r}")
    x = min(max(x, lo), hi)

    spec = problem.spec
    p = spec.p(side)
    trig = kind.trig
    max_delay = problem.max_delay[0 if side is Side.LEFT else 1]
    panels = quad_cfg.panels_for(abs(lam), max_delay)

    def integrand(tau: np.ndarray) -> np.ndarray:
        return spec.q.sample(tau, side) * trig(lam * spec.delta_fn.sample(tau, side) / p)

    value = composite_gauss_legendre(integrand, lo, x, panels, quad_cfg.points_per_panel)
    return complex(value) if np.iscomplexobj(value) else float(value)


def _full(problem, kind, lam, quad_cfg):
    end = HALF_PI if kind.side is Side.LEFT else math.pi
    return delay_integral(problem, kind, end, lam, quad_cfg)


def k_factor(problem: ValidatedProblem, lam, quad_cfg: Optional[QuadratureConfig] = None):
    """K(lambda) = a1*p1/a2 + (p1+p2)/(2*p1*p2) * (B(pi/2) + D(pi)) - d*p2."""
    s = problem.spec
    cosine_part = _full(problem, DelayIntegralKind.B, lam, quad_cfg) + _full(
        problem, DelayIntegralKind.D, lam, quad_cfg
    )
    return s.a1 * s.p1 / s.a2 + (s.p1 + s.p2) / (2.0 * s.p1 * s.p2) * cosine_part - s.d * s.p2


def s_factor(problem: ValidatedProblem, lam, quad_cfg: Optional[QuadratureConfig] = None):
    """S(lambda) = A(pi/2) + C(pi)."""
    return _full(problem, DelayIntegralKind.A, lam, quad_cfg) + _full(
        problem, DelayIntegralKind.C, lam, quad_cfg
    )


def _check_index(n: int) -> None:
    if n < 1:
        raise IndexOutOfRangeError(f"eigenvalue index must be >= 1, got {n}")


def first_order_eigenvalue(
    problem: ValidatedProblem, n: int, quad_cfg: Optional[QuadratureConfig] = None
) -> float:
    """lambda_n^0 - K/(lambda_n^0 * pi)."""
    _check_index(n)
    lam0 = lambda0(problem, n)
    return lam0 - k_factor(problem, lam0, quad_cfg) / (lam0 * math.pi)


def theorem1_eigenvalue(
    problem: ValidatedProblem,
    n: int,
    quad_cfg: Optional[QuadratureConfig] = None,
    convention: Theorem1Convention = Theorem1Convention.PRINTED,
) -> float:
    """Three-term eigenvalue expansion around lambda_n^0."""
    _check_index(n)
    convention = Theorem1Convention(convention)
    s = problem.spec
    lam0 = lambda0(problem, n)
    k = k_factor(problem, lam0, quad_cfg)
    sf = s_factor(problem, lam0, quad_cfg)
    last = k * k / lam0**3
    if convention is Theorem1Convention.PI_SQUARED:
        last /= math.pi**2
    return (
        lam0
        - k / (lam0 * math.pi)
        + (s.p1 + s.p2) / (s.p1 * s.p2) * sf * k / (lam0**2 * math.pi)
        - last
    )


def reciprocal_expansion(
    problem: ValidatedProblem,
    n: int,
    order: int,
    quad_cfg: Optional[QuadratureConfig] = None,
) -> float:
    """Expansion of 1/lambda_n (order 1) or 1/lambda_n**2 (order 2)."""
    _check_index(n)
    lam0 = lambda0(problem, n)
    if order == 1:
        return 1.0 / lam0 + k_factor(problem, lam0, quad_cfg) / (lam0**3 * math.pi)
    if order == 2:
        return 1.0 / lam0**2
    raise ConfigError(f"order must be 1 or 2, got {order}")


@dataclass(frozen=True)
class NodalPrediction:
    n: int
    j: int
    x: float
    side: Side
    clamped: bool = False  # integral argument clamped into its interval


def _clamp(value: float, lo: float, hi: float):
    clamped = min(max(value, lo), hi)
    return clamped, clamped != value


def nodal_prediction(
    problem: ValidatedProblem,
    n: int,
    j: int,
    quad_cfg: Optional[QuadratureConfig] = None,
) -> NodalPrediction:
    """Predicted j-th node of the n-th eigenfunction: left formula for j <= n//2, right otherwise."""
    if n < 1 or not 1 <= j <= n:
        raise IndexOutOfRangeError(f"node index j={j} outside 1..{n} for n={n}")
    s = problem.spec
    lam0 = lambda0(problem, n)
    k = k_factor(problem, lam0, quad_cfg)
    m = j - 0.5

    if j <= n // 2:
        leading = m * math.pi * s.p1 / lam0
        arg, clamped = _clamp(leading, 0.0, HALF_PI)
        b = delay_integral(problem, DelayIntegralKind.B, arg, lam0, quad_cfg)
        x = (
            leading
            - m * s.p1 * k / lam0**3
            - s.a1 * s.p1**2 / (s.a2 * lam0**2)
            - b / (2.0 * lam0**2)
        )
        side = Side.LEFT
    else:
        shifted = m * math.pi * s.p2 / lam0
        arg, clamped = _clamp(shifted, HALF_PI, math.pi)
        b = delay_integral(problem, DelayIntegralKind.B, HALF_PI, lam0, quad_cfg)
        d = delay_integral(problem, DelayIntegralKind.D, arg, lam0, quad_cfg)
        x = (
            -math.pi * (s.p2 - s.p1) / (2.0 * s.p1)
            + shifted
            - m * s.p2 * k / lam0**3
            - s.a1 * s.p1 * s.p2 / (s.a2 * lam0**2)
            - (s.p1 + s.p2) * (b + d) / (2.0 * lam0**2 * s.p1)
        )
        side = Side.RIGHT
    if clamped:
        logger.debug("n=%d j=%d: integral argument clamped to %.10g", n, j, arg)
    return NodalPrediction(n=n, j=j, x=x, side=side, clamped=clamped)


def nodal_formula_left(
    problem: ValidatedProblem, n: int, j: int, quad_cfg: Optional[QuadratureConfig] = None
) -> float:
    """Predicted node for 1 <= j <= n//2."""
    if not 1 <= j <= n // 2:
        raise IndexOutOfRangeError(f"left nodal formula needs 1 <= j <= {n // 2}, got j={j}")
    return nodal_prediction(problem, n, j, quad_cfg).x


def nodal_formula_right(
    problem: ValidatedProblem, n: int, j: int, quad_cfg: Optional[QuadratureConfig] = None
) -> float:
    """Predicted node for n//2 < j <= n."""
    if not n // 2 < j <= n:
        raise IndexOutOfRangeError(
            f"right nodal formula needs {n // 2 + 1} <= j <= {n}, got j={j}"
        )
    return nodal_prediction(problem, n, j, quad_cfg).x
