"""Both sides of the first regularized trace identity."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ContourTooLargeError, IncompleteSpectrumError
from .asymptotics import k_factor, s_factor
from .characteristic import Spectrum, SpectrumEntry, lambda0
from .problem import Side, ValidatedProblem
from .quadrature import QuadratureConfig, composite_gauss_legendre

logger = logging.getLogger(__name__)

CONTOUR_POINTS = 256
CONTOUR_RADIUS_FRACTION = 0.1


class ResidueMethod(str, Enum):
    SERIES = "series"
    CONTOUR = "contour"


@dataclass(frozen=True)
class RegularizedTerm:
    n: int
    root: float
    seed: float
    k: float
    s: float
    value: float


@dataclass(frozen=True)
class RhsDecomposition:
    """Right side of the identity, term by term."""

    k0: float
    s0: float
    residue: float
    value: float


@dataclass
class TraceReport:
    partial_sums: List[Tuple[int, float]] = field(default_factory=list)
    rhs: float = 0.0
    residue: float = 0.0
    near_zero_contribution: float = 0.0
    converged_estimate: float = 0.0
    near_zero_flagged: bool = False  # no near-zero root found; contribution taken as 0

    @property
    def differences(self) -> List[Tuple[int, float]]:
        return [(n, abs(total - self.rhs)) for n, total in self.partial_sums]


def regularized_value(
    problem: ValidatedProblem,
    root: float,
    seed: float,
    quad_cfg: Optional[QuadratureConfig] = None,
) -> Tuple[float, float, float]:
    """(value, K(seed), S(seed)) of one summand; even under seed -> -seed."""
    s = problem.spec
    k = k_factor(problem, seed, quad_cfg)
    sf = s_factor(problem, seed, quad_cfg)
    value = (
        root * root
        - seed * seed
        + (2.0 / math.pi) * k
        - (s.p1 + s.p2) / (s.p1 * s.p2) * k * sf / (seed * math.pi)
    )
    return value, k, sf


def trace_term(
    problem: ValidatedProblem,
    entry: SpectrumEntry,
    quad_cfg: Optional[QuadratureConfig] = None,
) -> RegularizedTerm:
    value, k, sf = regularized_value(problem, entry.root, entry.seed, quad_cfg)
    return RegularizedTerm(n=entry.n, root=entry.root, seed=entry.seed, k=k, s=sf, value=value)


def _weighted_delay_integral(problem: ValidatedProblem, quad_cfg: QuadratureConfig) -> float:
    """s1 = (1/p1) * int_0^{pi/2} q*Delta + (1/p2) * int_{pi/2}^{pi} q*Delta."""
    spec = problem.spec
    total = 0.0
    for side in (Side.LEFT, Side.RIGHT):
        lo, hi = side.bounds

        def integrand(tau, side=side):
            return spec.q.sample(tau, side) * spec.delta_fn.sample(tau, side)

        integral = composite_gauss_legendre(
            integrand, lo, hi, quad_cfg.min_panels, quad_cfg.points_per_panel
        )
        total += float(integral) / spec.p(side)
    return total


def residue_R(
    problem: ValidatedProblem,
    method: ResidueMethod = ResidueMethod.SERIES,
    quad_cfg: Optional[QuadratureConfig] = None,
    radius_fraction: float = CONTOUR_RADIUS_FRACTION,
    points: int = CONTOUR_POINTS,
) -> float:
    """Residue at lambda = 0 of (p1+p2)/(p1*p2) * K(l) * S(l) * cot(mu*l) / l.

    SERIES uses the closed form (2/pi) * K(0) * s1; the integrand's Laurent
    series is odd, so this is exact. CONTOUR applies the trapezoid rule on the
    circle |lambda| = radius_fraction * lambda_1^0.
    """
    quad_cfg = quad_cfg or QuadratureConfig()
    method = ResidueMethod(method)
    s = problem.spec
    if method is ResidueMethod.SERIES:
        return (2.0 / math.pi) * float(k_factor(problem, 0.0, quad_cfg)) * _weighted_delay_integral(
            problem, quad_cfg
        )

    nearest_pole = lambda0(problem, 1)
    radius = radius_fraction * nearest_pole
    if radius > 0.5 * nearest_pole:
        raise ContourTooLargeError(
            f"contour radius {radius:.6g} exceeds half the distance {0.5 * nearest_pole:.6g} "
            "to the nearest pole of cot"
        )
    mu = math.pi * (s.p1 + s.p2) / (2.0 * s.p1 * s.p2)
    scale = (s.p1 + s.p2) / (s.p1 * s.p2)
    angles = 2.0 * math.pi * np.arange(points) / points
    total = 0.0 + 0.0j
    for point in radius * np.exp(1j * angles):
        lam = complex(point)
        integrand = (
            scale * k_factor(problem, lam, quad_cfg) * s_factor(problem, lam, quad_cfg)
            / (np.tan(mu * lam) * lam)
        )
        total += integrand * lam
    residue = total / points
    logger.debug("contour residue %.17g (imaginary part %.3g)", residue.real, residue.imag)
    return float(residue.real)


def rhs_decomposition(
    problem: ValidatedProblem,
    quad_cfg: Optional[QuadratureConfig] = None,
    method: ResidueMethod = ResidueMethod.SERIES,
) -> RhsDecomposition:
    s = problem.spec
    k0 = float(k_factor(problem, 0.0, quad_cfg))
    s0 = float(s_factor(problem, 0.0, quad_cfg))
    residue = residue_R(problem, method, quad_cfg)
    value = (
        -(2.0 / math.pi) * k0
        + residue
        - k0 * k0
        + (s.p1 + s.p2) ** 2 / (4.0 * s.p1**2 * s.p2**2) * s0 * s0
    )
    return RhsDecomposition(k0=k0, s0=s0, residue=residue, value=value)


def trace_rhs(
    problem: ValidatedProblem,
    quad_cfg: Optional[QuadratureConfig] = None,
    method: ResidueMethod = ResidueMethod.SERIES,
) -> float:
    """-(2/pi)K(0) + R - K(0)^2 + ((p1+p2)^2 / (4 p1^2 p2^2)) S(0)^2."""
    return rhs_decomposition(problem, quad_cfg, method).value


def near_zero_contribution(spectrum: Spectrum) -> float:
    """Each near-zero root mu stands for the pair +-lambda."""
    return 2.0 * sum(root.mu for root in spectrum.near_zero_roots)


def trace_partial_sum(
    problem: ValidatedProblem,
    spectrum: Spectrum,
    N: int,
    quad_cfg: Optional[QuadratureConfig] = None,
    terms: Optional[Sequence[RegularizedTerm]] = None,
) -> float:
    """S_N = near-zero contribution + 2 * sum_{n=1}^{N} term(n)."""
    if not spectrum.covers(N):
        raise IncompleteSpectrumError(
            f"partial sum S_{N} needs eigenvalues 1..{N}; spectrum covers up to n={spectrum.n_max}"
        )
    if terms is None:
        terms = [trace_term(problem, spectrum.entry(n), quad_cfg) for n in range(1, N + 1)]
    values = {term.n: term.value for term in terms}
    return near_zero_contribution(spectrum) + 2.0 * math.fsum(values[n] for n in range(1, N + 1))


def trace_report(
    problem: ValidatedProblem,
    spectrum: Spectrum,
    checkpoints: Sequence[int],
    quad_cfg: Optional[QuadratureConfig] = None,
    method: ResidueMethod = ResidueMethod.SERIES,
) -> TraceReport:
    """Partial sums at each checkpoint N, sharing the per-n terms."""
    N_max = max(checkpoints)
    if not spectrum.covers(N_max):
        raise IncompleteSpectrumError(
            f"partial sums up to N={N_max} need a spectrum covering n=1..{N_max}"
        )
    terms = [trace_term(problem, spectrum.entry(n), quad_cfg) for n in range(1, N_max + 1)]
    rhs = rhs_decomposition(problem, quad_cfg, method)
    report = TraceReport(
        rhs=rhs.value,
        residue=rhs.residue,
        near_zero_contribution=near_zero_contribution(spectrum),
        near_zero_flagged=not spectrum.near_zero_roots,
    )
    for N in sorted(set(checkpoints)):
        report.partial_sums.append((N, trace_partial_sum(problem, spectrum, N, quad_cfg, terms)))
    report.converged_estimate = _extrapolate(report.partial_sums)
    if report.near_zero_flagged:
        logger.warning("no near-zero root of theta found; its trace contribution is taken as 0")
    return report


def _extrapolate(partial_sums: Sequence[Tuple[int, float]]) -> float:
    """Limit of S_N under an a + b/N model fitted to the last two checkpoints."""
    if len(partial_sums) < 2:
        return partial_sums[-1][1]
    (n1, s1), (n2, s2) = partial_sums[-2], partial_sums[-1]
    return (n2 * s2 - n1 * s1) / (n2 - n1)
