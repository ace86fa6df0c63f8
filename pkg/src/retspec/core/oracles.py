"""Independent ground truth for the delay integrator and the eigenvalue search.

- a closed form of Theta when q == 0, keeping the full gamma2/delta2 transfer;
- successive approximation of the Volterra integral equations for omega_1, omega_2;
- a non-delay shooting solver for instances that reduce to the classical problem;
- a seeded family of random smooth instances for cross-checking the residue.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from ..exceptions import NonConvergenceError, PreconditionViolatedError
from .characteristic import Spectrum, compute_spectrum
from .integrator import DenseSolution, IntegratorConfig
from .problem import HALF_PI, PiecewiseFn, ProblemSpec, Side, ValidatedProblem, validate_problem

logger = logging.getLogger(__name__)

PICARD_GRID_POINTS = 4096
PICARD_MAX_ITERATIONS = 60
PICARD_CONTRACTION_DEADLINE = 8
PICARD_TOLERANCE = 1e-14
CLASSICAL_TOLERANCE = 1e-12


def exact_theta_qzero(problem: ValidatedProblem, lam):
    """Closed-form Theta for q == 0; finite at lambda = 0. The potential is ignored."""
    s = problem.spec
    lam = np.asarray(lam)
    L = HALF_PI

    k1 = lam / s.p1
    # (a1*p1/lambda) * sin(lambda*x/p1) == a1 * x * sinc(k1*x/pi)
    y1 = s.a2 * np.cos(k1 * L) - s.a1 * L * np.sinc(k1 * L / math.pi)
    v1 = -s.a2 * k1 * np.sin(k1 * L) - s.a1 * np.cos(k1 * L)

    y2 = (s.gamma1 / s.delta1) * y1
    v2 = (s.gamma2 / s.delta2) * v1
    k2 = lam / s.p2
    y_end = y2 * np.cos(k2 * L) + v2 * L * np.sinc(k2 * L / math.pi)
    v_end = -y2 * k2 * np.sin(k2 * L) + v2 * np.cos(k2 * L)
    result = v_end + s.d * y_end
    return result.item() if result.ndim == 0 else result


@dataclass(frozen=True)
class PicardSolution:
    omega1: DenseSolution
    omega2: DenseSolution
    iterations: Tuple[int, int]
    deltas: Tuple[Tuple[float, ...], Tuple[float, ...]]  # sup-norm changes per side


def _picard_side(
    problem: ValidatedProblem,
    side: Side,
    lam: float,
    lead_y: np.ndarray,
    lead_v: np.ndarray,
    xs: np.ndarray,
    iterations: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[float]]:
    spec = problem.spec
    p = spec.p(side)
    k = lam / p
    q = spec.q.sample(xs, side)
    shifted = np.minimum(np.maximum(xs - spec.delta_fn.sample(xs, side), side.start), xs)
    cos_kx, sin_kx = np.cos(k * xs), np.sin(k * xs)

    y, v = lead_y, lead_v
    deltas: List[float] = []
    scale = max(1.0, float(np.max(np.abs(lead_y))))
    for iteration in range(1, iterations + 1):
        delayed = CubicHermiteSpline(xs, y, v)(shifted)
        g = q * delayed
        c = cumulative_simpson(cos_kx * g, x=xs, initial=0.0)
        s = cumulative_simpson(sin_kx * g, x=xs, initial=0.0)
        new_y = lead_y - (sin_kx * c - cos_kx * s) / (lam * p)
        new_v = lead_v - (cos_kx * c + sin_kx * s) / (p * p)
        deltas.append(float(np.max(np.abs(new_y - y))))
        y, v = new_y, new_v
        logger.debug("picard %s iteration %d: sup change %.3e", side.value, iteration, deltas[-1])
        if deltas[-1] <= PICARD_TOLERANCE * scale:
            break
        if iteration == PICARD_CONTRACTION_DEADLINE and deltas[-1] >= deltas[0]:
            raise NonConvergenceError(
                f"successive approximations on the {side.value} side did not contract by "
                f"iteration {iteration} (changes {deltas[0]:.3e} -> {deltas[-1]:.3e})"
            )

    delayed = CubicHermiteSpline(xs, y, v)(shifted)
    acc = -(q * delayed + lam * lam * y) / (p * p)
    return y, v, acc, deltas


def picard_solution(
    problem: ValidatedProblem,
    lam: float,
    iterations: int = PICARD_MAX_ITERATIONS,
    grid: int = PICARD_GRID_POINTS,
) -> PicardSolution:
    """omega_1, omega_2 by successive approximation of their integral equations.

    Iteration 0 is the leading trigonometric part. At most ``iterations``
    sweeps are made per side; a sweep stops early once the sup-norm change
    reaches rounding level.
    """
    if lam == 0:
        raise PreconditionViolatedError("successive approximation needs lambda != 0")
    if iterations < 0:
        raise PreconditionViolatedError(f"iterations must be >= 0, got {iterations}")
    s = problem.spec

    x1 = np.linspace(0.0, HALF_PI, grid)
    k1 = lam / s.p1
    lead_y1 = s.a2 * np.cos(k1 * x1) - (s.a1 * s.p1 / lam) * np.sin(k1 * x1)
    lead_v1 = -s.a2 * k1 * np.sin(k1 * x1) - s.a1 * np.cos(k1 * x1)
    y1, v1, a1, deltas1 = _picard_side(problem, Side.LEFT, lam, lead_y1, lead_v1, x1, iterations)

    x2 = np.linspace(HALF_PI, math.pi, grid)
    x2[-1] = math.pi
    k2 = lam / s.p2
    start_y = (s.gamma1 / s.delta1) * y1[-1]
    start_v = (s.gamma2 / s.delta2) * v1[-1]
    offset = x2 - HALF_PI
    lead_y2 = start_y * np.cos(k2 * offset) + (start_v / k2) * np.sin(k2 * offset)
    lead_v2 = -start_y * k2 * np.sin(k2 * offset) + start_v * np.cos(k2 * offset)
    y2, v2, a2, deltas2 = _picard_side(problem, Side.RIGHT, lam, lead_y2, lead_v2, x2, iterations)

    return PicardSolution(
        omega1=DenseSolution(Side.LEFT, lam, x1, y1, v1, a1),
        omega2=DenseSolution(Side.RIGHT, lam, x2, y2, v2, a2),
        iterations=(len(deltas1), len(deltas2)),
        deltas=(tuple(deltas1), tuple(deltas2)),
    )


@dataclass(frozen=True)
class ClassicalComparison:
    n: int
    toolkit: float
    classical: float
    abs_difference: float


@dataclass
class ClassicalReductionReport:
    rows: List[ClassicalComparison] = field(default_factory=list)

    @property
    def max_abs_difference(self) -> float:
        return max((row.abs_difference for row in self.rows), default=0.0)


def _check_classical(problem: ValidatedProblem) -> None:
    s = problem.spec
    reasons = []
    if not problem.delay_is_zero:
        reasons.append("Delta is not identically 0")
    if s.p1 != 1.0 or s.p2 != 1.0:
        reasons.append(f"p1 = {s.p1!r}, p2 = {s.p2!r} (need 1, 1)")
    if s.gamma1 != s.delta1 or s.gamma2 != s.delta2:
        reasons.append("interface coefficients differ (need gamma_i == delta_i)")
    if reasons:
        raise PreconditionViolatedError(
            "instance does not reduce to the classical problem: " + "; ".join(reasons)
        )


def classical_theta(problem: ValidatedProblem, lam: float) -> float:
    """y'(pi) + d*y(pi) for y'' + (q + lambda**2) y = 0, y(0) = a2, y'(0) = -a1, by DOP853."""
    s = problem.spec
    lam2 = lam * lam
    state = np.array([s.a2, -s.a1], dtype=float)
    for side in (Side.LEFT, Side.RIGHT):
        branch = s.q.branch(side)

        def rhs(x, u, branch=branch):
            return [u[1], -(float(branch(x)) + lam2) * u[0]]

        sol = solve_ivp(
            rhs,
            side.bounds,
            state,
            method="DOP853",
            rtol=CLASSICAL_TOLERANCE,
            atol=CLASSICAL_TOLERANCE,
        )
        state = sol.y[:, -1]
    return float(state[1] + s.d * state[0])


def classical_reduction_check(
    problem: ValidatedProblem,
    n_max: int,
    spectrum: Optional[Spectrum] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> ClassicalReductionReport:
    """Compare toolkit eigenvalues with a dedicated shooting run for the reduced problem."""
    _check_classical(problem)
    spectrum = spectrum or compute_spectrum(problem, n_max, cfg)
    report = ClassicalReductionReport()

    def f(lam: float) -> float:
        return classical_theta(problem, lam)

    for n in range(1, n_max + 1):
        entry = spectrum.entry(n)
        a, b = entry.bracket
        if not f(a) * f(b) < 0:
            radius = 0.45 * problem.seed_gap
            a, b = max(entry.root - radius, 0.5 * problem.seed_gap), entry.root + radius
        classical = brentq(f, a, b, xtol=1e-13 * max(1.0, entry.root), maxiter=200)
        report.rows.append(
            ClassicalComparison(n, entry.root, classical, abs(entry.root - classical))
        )
    logger.debug("classical reduction: max difference %.3e", report.max_abs_difference)
    return report


def random_smooth_problems(rng: np.random.Generator, count: int = 10) -> List[ValidatedProblem]:
    """Seeded gated instances with trigonometric q and linear retardation on both sides."""
    problems = []
    for _ in range(count):
        a, b, c, e = rng.uniform(-1.0, 1.0, 4)
        s1, s2 = rng.uniform(0.0, 0.2, 2)
        spec = ProblemSpec(
            p1=float(rng.uniform(0.8, 1.5)),
            p2=float(rng.uniform(0.8, 1.5)),
            a1=float(c),
            a2=1.0,
            d=float(e),
            gamma1=1.0,
            gamma2=1.0,
            delta1=1.0,
            delta2=1.0,
            q=PiecewiseFn(
                lambda x, a=a: a * np.cos(x) + 0.3,
                lambda x, b=b: b * np.sin(x) - 0.2,
                vectorized=True,
            ),
            delta_fn=PiecewiseFn(
                lambda x, s=s1: s * x,
                lambda x, s=s2: s * (x - HALF_PI),
                vectorized=True,
            ),
        )
        problems.append(validate_problem(spec, grid_points=256))
    return problems
