"""Method-of-steps integration of the retarded equation on each subinterval.

Each side is marched with fixed-step classical Runge-Kutta. Delayed values
y(x - Delta(x)) are read from a cubic Hermite history built from the already
computed nodes (value and derivative). When the shifted point falls inside the
step being taken, the step is predicted with a Taylor step and corrected
``corrector_iterations`` times.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import BPoly, CubicHermiteSpline

from ..exceptions import ConfigError, MismatchedLambdaError, OutOfRangeError
from .problem import Side, ValidatedProblem

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]

STEP_QUANTUM = 256
BREAKPOINT_TOLERANCE = 1e-12


@dataclass
class IntegratorConfig:
    """Configuration for the delay integrator."""

    step_count: int = 2048  # per subinterval, at |lambda| <= reference_abs_lambda
    corrector_iterations: int = 2
    interpolation_order: int = 3  # dense output: 3 = cubic Hermite, 5 = quintic Hermite
    reference_abs_lambda: float = 64.0

    def validate(self) -> None:
        if self.step_count < 16:
            raise ConfigError(f"step_count must be >= 16, got {self.step_count}")
        if self.corrector_iterations < 1:
            raise ConfigError(
                f"corrector_iterations must be >= 1, got {self.corrector_iterations}"
            )
        if self.interpolation_order not in (3, 5):
            raise ConfigError(
                f"interpolation_order must be 3 or 5, got {self.interpolation_order}"
            )
        if not self.reference_abs_lambda > 0:
            raise ConfigError("reference_abs_lambda must be positive")

    def steps_for(self, abs_lambda: float) -> int:
        """Steps per subinterval at |lambda|, keeping points per oscillation constant."""
        scale = abs_lambda / self.reference_abs_lambda
        if scale <= 1.0:
            return self.step_count
        return int(math.ceil(self.step_count * scale / STEP_QUANTUM) * STEP_QUANTUM)

    def refined(self, factor: int) -> "IntegratorConfig":
        return IntegratorConfig(
            step_count=self.step_count * factor,
            corrector_iterations=self.corrector_iterations,
            interpolation_order=self.interpolation_order,
            reference_abs_lambda=self.reference_abs_lambda,
        )


@dataclass(frozen=True)
class _StageLookup:
    """Hermite history weights for the delayed value at one RK stage of every step."""

    segment: List[int]
    w_y0: List[float]
    w_v0: List[float]
    w_y1: List[float]
    w_v1: List[float]
    q: List[float]
    touches_current: np.ndarray


@dataclass(frozen=True)
class _MarchGrid:
    side: Side
    steps: int
    h: float
    nodes: np.ndarray
    stages: Tuple[_StageLookup, _StageLookup, _StageLookup]  # t_i, t_i + h/2, t_i + h
    needs_correction: List[bool]


def _stage_lookup(
    problem: ValidatedProblem, side: Side, nodes: np.ndarray, t: np.ndarray, h: float
) -> _StageLookup:
    spec = problem.spec
    lo = side.start
    steps = len(nodes) - 1
    step_index = np.arange(steps)

    q = spec.q.sample(t, side)
    shifted = np.minimum(np.maximum(t - spec.delta_fn.sample(t, side), lo), t)
    position = (shifted - lo) / h
    segment = np.minimum(np.floor(position).astype(int), step_index)
    segment = np.clip(segment, 0, steps - 1)
    u = np.clip(position - segment, 0.0, 1.0)

    # a shifted point sitting on node i reads the finished segment i-1
    on_node = (segment == step_index) & (u <= 0.0) & (step_index > 0)
    segment[on_node] -= 1
    u[on_node] = 1.0

    u2 = u * u
    u3 = u2 * u
    w_y0 = 2.0 * u3 - 3.0 * u2 + 1.0
    w_v0 = (u3 - 2.0 * u2 + u) * h
    w_y1 = -2.0 * u3 + 3.0 * u2
    w_v1 = (u3 - u2) * h

    touches = (segment == step_index) & ((w_y1 != 0.0) | (w_v1 != 0.0))
    return _StageLookup(
        segment=segment.tolist(),
        w_y0=w_y0.tolist(),
        w_v0=w_v0.tolist(),
        w_y1=w_y1.tolist(),
        w_v1=w_v1.tolist(),
        q=q.tolist(),
        touches_current=touches,
    )


@lru_cache(maxsize=32)
def _march_grid(problem: ValidatedProblem, side: Side, steps: int) -> _MarchGrid:
    lo, hi = side.bounds
    h = (hi - lo) / steps
    nodes = lo + h * np.arange(steps + 1)
    nodes[0], nodes[-1] = lo, hi

    starts = nodes[:-1]
    stages = (
        _stage_lookup(problem, side, nodes, starts, h),
        _stage_lookup(problem, side, nodes, starts + 0.5 * h, h),
        _stage_lookup(problem, side, nodes, nodes[1:], h),
    )
    needs = stages[0].touches_current | stages[1].touches_current | stages[2].touches_current
    logger.debug(
        "built %s march grid: %d steps, %d need correction",
        side.value,
        steps,
        int(np.count_nonzero(needs)),
    )
    return _MarchGrid(
        side=side,
        steps=steps,
        h=h,
        nodes=nodes,
        stages=stages,
        needs_correction=needs.tolist(),
    )


@dataclass(frozen=True)
class Trajectory:
    """Node values of one marched side: y, y' and y''."""

    side: Side
    nodes: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    accelerations: np.ndarray


def _march(
    problem: ValidatedProblem,
    side: Side,
    lam2: Scalar,
    y0: Scalar,
    v0: Scalar,
    steps: int,
    corrector_iterations: int,
) -> Trajectory:
    grid = _march_grid(problem, side, steps)
    h = grid.h
    half = 0.5 * h
    sixth = h / 6.0
    inv_p2 = 1.0 / problem.spec.p(side) ** 2
    c = lam2 * inv_p2

    Y: List[Scalar] = [0.0] * (steps + 1)
    V: List[Scalar] = [0.0] * (steps + 1)
    A: List[Scalar] = [0.0] * (steps + 1)
    Y[0], V[0] = y0, v0

    if problem.q_is_zero:
        for i in range(steps):
            y, v = Y[i], V[i]
            a = -c * y
            A[i] = a
            k2y = v + half * a
            k2v = -c * (y + half * v)
            k3y = v + half * k2v
            k3v = -c * (y + half * k2y)
            k4y = v + h * k3v
            k4v = -c * (y + h * k3y)
            Y[i + 1] = y + sixth * (v + 2.0 * k2y + 2.0 * k3y + k4y)
            V[i + 1] = v + sixth * (a + 2.0 * k2v + 2.0 * k3v + k4v)
        A[steps] = -c * Y[steps]
    else:
        s0, sm, s1 = grid.stages
        needs = grid.needs_correction

        def delayed(stage: _StageLookup, i: int) -> Scalar:
            j = stage.segment[i]
            return (
                stage.w_y0[i] * Y[j]
                + stage.w_v0[i] * V[j]
                + stage.w_y1[i] * Y[j + 1]
                + stage.w_v1[i] * V[j + 1]
            )

        for i in range(steps):
            y, v = Y[i], V[i]
            a = -(s0.q[i] * delayed(s0, i)) * inv_p2 - c * y
            A[i] = a
            if needs[i]:
                Y[i + 1] = y + h * v + 0.5 * h * h * a
                V[i + 1] = v + h * a
                rounds = corrector_iterations
            else:
                rounds = 1
            for _ in range(rounds):
                gm = -(sm.q[i] * delayed(sm, i)) * inv_p2
                g1 = -(s1.q[i] * delayed(s1, i)) * inv_p2
                k2y = v + half * a
                k2v = gm - c * (y + half * v)
                k3y = v + half * k2v
                k3v = gm - c * (y + half * k2y)
                k4y = v + h * k3v
                k4v = g1 - c * (y + h * k3y)
                Y[i + 1] = y + sixth * (v + 2.0 * k2y + 2.0 * k3y + k4y)
                V[i + 1] = v + sixth * (a + 2.0 * k2v + 2.0 * k3v + k4v)
        last = steps - 1
        A[steps] = -(s1.q[last] * delayed(s1, last)) * inv_p2 - c * Y[steps]

    return Trajectory(
        side=side,
        nodes=grid.nodes,
        values=np.asarray(Y),
        derivatives=np.asarray(V),
        accelerations=np.asarray(A),
    )


def _as_lambda_squared(lam: Scalar) -> Scalar:
    lam2 = lam * lam
    if isinstance(lam2, complex) and lam2.imag == 0.0:
        return lam2.real
    return lam2


def march_left(
    problem: ValidatedProblem, lam2: Scalar, steps: int, cfg: IntegratorConfig
) -> Trajectory:
    """omega_1 nodes for the parameter lambda**2, from omega_1(0) = a2, omega_1'(0) = -a1."""
    spec = problem.spec
    return _march(
        problem, Side.LEFT, lam2, spec.a2, -spec.a1, steps, cfg.corrector_iterations
    )


def march_right(
    problem: ValidatedProblem,
    lam2: Scalar,
    steps: int,
    cfg: IntegratorConfig,
    left_value: Scalar,
    left_derivative: Scalar,
) -> Trajectory:
    """omega_2 nodes, started from the interface transfer of omega_1's end state."""
    spec = problem.spec
    y0 = (spec.gamma1 / spec.delta1) * left_value
    v0 = (spec.gamma2 / spec.delta2) * left_derivative
    return _march(problem, Side.RIGHT, lam2, y0, v0, steps, cfg.corrector_iterations)


def endpoint_state(
    problem: ValidatedProblem, lam2: Scalar, cfg: IntegratorConfig
) -> Tuple[Scalar, Scalar]:
    """(omega_2(pi), omega_2'(pi)) for the parameter lambda**2 without building dense output."""
    steps = cfg.steps_for(math.sqrt(abs(lam2)))
    left = march_left(problem, lam2, steps, cfg)
    right = march_right(
        problem, lam2, steps, cfg, left.values[-1], left.derivatives[-1]
    )
    return right.values[-1], right.derivatives[-1]


@dataclass(frozen=True)
class DenseSolution:
    """Piecewise-polynomial omega_1 on [0, pi/2] or omega_2 on [pi/2, pi]."""

    side: Side
    lam: Scalar
    breakpoints: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    accelerations: np.ndarray
    interpolation_order: int = 3

    @classmethod
    def from_trajectory(
        cls, trajectory: Trajectory, lam: Scalar, interpolation_order: int
    ) -> "DenseSolution":
        return cls(
            side=trajectory.side,
            lam=lam,
            breakpoints=trajectory.nodes,
            values=trajectory.values,
            derivatives=trajectory.derivatives,
            accelerations=trajectory.accelerations,
            interpolation_order=interpolation_order,
        )

    @cached_property
    def _interpolants(self):
        x = self.breakpoints
        if self.interpolation_order == 5:
            y = BPoly.from_derivatives(
                x, np.column_stack([self.values, self.derivatives, self.accelerations])
            )
            return y, y.derivative()
        y = CubicHermiteSpline(x, self.values, self.derivatives)
        dy = CubicHermiteSpline(x, self.derivatives, self.accelerations)
        return y, dy

    @property
    def bounds(self) -> Tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def _check_range(self, xs: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds
        if np.any(xs < lo - BREAKPOINT_TOLERANCE) or np.any(xs > hi + BREAKPOINT_TOLERANCE):
            bad = xs[(xs < lo - BREAKPOINT_TOLERANCE) | (xs > hi + BREAKPOINT_TOLERANCE)]
            raise OutOfRangeError(
                f"x = {float(np.real(bad[0]))!r} outside the {self.side.value} region [{lo}, {hi}]"
            )
        return np.clip(xs, lo, hi)

    def evaluate(self, xs: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Values and derivatives at an array of points."""
        xs = self._check_range(np.asarray(xs, dtype=float))
        y, dy = self._interpolants
        return y(xs), dy(xs)

    def __call__(self, x: float) -> Tuple[Scalar, Scalar]:
        return dense_eval(self, x)


def dense_eval(sol: DenseSolution, x: float) -> Tuple[Scalar, Scalar]:
    """(y(x), y'(x)) of a dense solution; exact at breakpoints."""
    xs = sol._check_range(np.asarray([x], dtype=float))
    idx = int(np.searchsorted(sol.breakpoints, xs[0]))
    if idx < len(sol.breakpoints) and sol.breakpoints[idx] == xs[0]:
        return _scalar(sol.values[idx]), _scalar(sol.derivatives[idx])
    y, dy = sol._interpolants
    return _scalar(y(xs)[0]), _scalar(dy(xs)[0])


def _scalar(value) -> Scalar:
    value = complex(value) if np.iscomplexobj(value) else float(value)
    return value


def integrate_omega1(
    problem: ValidatedProblem, lam: Scalar, cfg: IntegratorConfig
) -> DenseSolution:
    """omega_1 on [0, pi/2] with omega_1(0) = a2, omega_1'(0) = -a1."""
    cfg.validate()
    lam2 = _as_lambda_squared(lam)
    steps = cfg.steps_for(abs(lam))
    trajectory = march_left(problem, lam2, steps, cfg)
    return DenseSolution.from_trajectory(trajectory, lam, cfg.interpolation_order)


def integrate_omega2(
    problem: ValidatedProblem,
    lam: Scalar,
    omega1: DenseSolution,
    cfg: IntegratorConfig,
) -> DenseSolution:
    """omega_2 on [pi/2, pi], started from the interface transfer of ``omega1``."""
    cfg.validate()
    if omega1.side is not Side.LEFT:
        raise MismatchedLambdaError("omega1 must cover the left subinterval")
    if omega1.lam != lam:
        raise MismatchedLambdaError(
            f"omega1 was computed at lambda = {omega1.lam!r}, not {lam!r}"
        )
    lam2 = _as_lambda_squared(lam)
    steps = cfg.steps_for(abs(lam))
    trajectory = march_right(
        problem, lam2, steps, cfg, omega1.values[-1], omega1.derivatives[-1]
    )
    return DenseSolution.from_trajectory(trajectory, lam, cfg.interpolation_order)


def solve(
    problem: ValidatedProblem, lam: Scalar, cfg: IntegratorConfig
) -> Tuple[DenseSolution, DenseSolution]:
    """(omega_1, omega_2) at lambda."""
    omega1 = integrate_omega1(problem, lam, cfg)
    return omega1, integrate_omega2(problem, lam, omega1, cfg)


def interface_residuals(
    problem: ValidatedProblem, omega1: DenseSolution, omega2: DenseSolution
) -> Tuple[float, float]:
    """(delta1*w2(pi/2) - gamma1*w1(pi/2), delta2*w2'(pi/2) - gamma2*w1'(pi/2))."""
    spec = problem.spec
    return (
        abs(spec.delta1 * omega2.values[0] - spec.gamma1 * omega1.values[-1]),
        abs(spec.delta2 * omega2.derivatives[0] - spec.gamma2 * omega1.derivatives[-1]),
    )
