"""
Delay integrator tests.

Checks the RK4 order, interface transfer, dense output and agreement with
the successive-approximation oracle.
"""

import math

import numpy as np
import pytest

from retspec.core.characteristic import theta
from retspec.core.integrator import (
    IntegratorConfig,
    dense_eval,
    endpoint_state,
    integrate_omega1,
    integrate_omega2,
    interface_residuals,
    solve,
)
from retspec.core.oracles import picard_solution
from retspec.core.problem import validate_problem
from retspec.exceptions import ConfigError, MismatchedLambdaError, OutOfRangeError
from test_examples.instances import make_spec


@pytest.mark.integrator
def test_fourth_order_convergence(symmetric):
    """Endpoint error drops by at least 14x per step doubling on the cosine case."""
    lam = 2.5
    exact = math.cos(lam * math.pi)
    errors = []
    for steps in (64, 128, 256, 512):
        value, _ = endpoint_state(symmetric, lam * lam, IntegratorConfig(step_count=steps))
        errors.append(abs(value - exact))
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    assert all(r >= 14.0 for r in ratios), f"Expected 4th-order ratios, got {ratios}"


@pytest.mark.integrator
def test_steps_scale_with_lambda():
    cfg = IntegratorConfig()
    assert cfg.steps_for(10.0) == 2048
    assert cfg.steps_for(64.0) == 2048
    assert cfg.steps_for(128.0) == 4096
    assert cfg.steps_for(100.0) == 3328
    assert cfg.steps_for(100.0) % 256 == 0


@pytest.mark.integrator
@pytest.mark.parametrize(
    "overrides",
    [
        {"step_count": 8},
        {"corrector_iterations": 0},
        {"interpolation_order": 4},
        {"reference_abs_lambda": 0.0},
    ],
)
def test_invalid_integrator_config(overrides):
    with pytest.raises(ConfigError):
        IntegratorConfig(**overrides).validate()


@pytest.mark.integrator
def test_interface_transfer(general_qzero, cfg):
    """omega_2 starts at the scaled end state of omega_1."""
    omega1, omega2 = solve(general_qzero, 1.7, cfg)
    spec = general_qzero.spec
    assert omega2.values[0] == pytest.approx(spec.gamma1 / spec.delta1 * omega1.values[-1], rel=1e-15)
    assert omega2.derivatives[0] == pytest.approx(
        spec.gamma2 / spec.delta2 * omega1.derivatives[-1], rel=1e-15
    )
    residuals = interface_residuals(general_qzero, omega1, omega2)
    assert max(residuals) <= 1e-14


@pytest.mark.integrator
def test_initial_conditions(general_qzero, cfg):
    omega1 = integrate_omega1(general_qzero, 2.0, cfg)
    assert dense_eval(omega1, 0.0) == (general_qzero.spec.a2, -general_qzero.spec.a1)


@pytest.mark.integrator
def test_mismatched_lambda_is_rejected(symmetric, cfg):
    omega1 = integrate_omega1(symmetric, 1.0, cfg)
    with pytest.raises(MismatchedLambdaError):
        integrate_omega2(symmetric, 2.0, omega1, cfg)


@pytest.mark.integrator
def test_dense_output_range(symmetric, cfg):
    omega1, omega2 = solve(symmetric, 3.0, cfg)
    with pytest.raises(OutOfRangeError):
        omega1(2.0)
    with pytest.raises(OutOfRangeError):
        omega2(1.0)


@pytest.mark.integrator
@pytest.mark.parametrize("order", [3, 5])
def test_dense_output_between_nodes(symmetric, order):
    """Cosine solution is reproduced off the step nodes by both dense outputs."""
    lam = 3.0
    omega1, omega2 = solve(symmetric, lam, IntegratorConfig(interpolation_order=order))
    xs = np.linspace(0.013, math.pi / 2 - 0.013, 37)
    values, derivatives = omega1.evaluate(xs)
    assert np.max(np.abs(values - np.cos(lam * xs))) <= 1e-10
    assert np.max(np.abs(derivatives + lam * np.sin(lam * xs))) <= 1e-9
    y, _ = omega2(2.9)
    assert y == pytest.approx(math.cos(lam * 2.9), abs=1e-10)


@pytest.mark.integrator
def test_dense_eval_exact_at_breakpoints(symmetric, cfg):
    omega1 = integrate_omega1(symmetric, 2.0, cfg)
    node = float(omega1.breakpoints[100])
    assert dense_eval(omega1, node) == (omega1.values[100], omega1.derivatives[100])


@pytest.mark.integrator
def test_complex_lambda(symmetric, cfg):
    lam = 1.5 + 0.5j
    expected = -lam * np.sin(lam * math.pi)
    assert abs(theta(symmetric, lam, cfg) - expected) <= 1e-9


@pytest.mark.integrator
def test_delay_solution_converges_under_refinement(smooth, cfg):
    """The predictor-corrector path stays 4th order with retardation present."""
    coarse = theta(smooth, 4.3, cfg)
    fine = theta(smooth, 4.3, cfg.refined(4))
    assert abs(coarse - fine) <= 1e-8


@pytest.mark.integrator
@pytest.mark.oracles
@pytest.mark.parametrize("lam", [2.0, 5.0, 10.0])
def test_agrees_with_successive_approximation(smooth, cfg, lam):
    """Sup-norm distance to the Picard oracle stays below 1e-8."""
    oracle = picard_solution(smooth, lam)
    omega1, omega2 = solve(smooth, lam, cfg)
    for numeric, reference in ((omega1, oracle.omega1), (omega2, oracle.omega2)):
        values, _ = numeric.evaluate(reference.breakpoints)
        distance = float(np.max(np.abs(values - reference.values)))
        assert distance <= 1e-8, f"lambda={lam}: distance {distance:.3e}"


@pytest.mark.integrator
@pytest.mark.parametrize("lam", [3.0, 7.25, 1.5 + 0.5j])
def test_trajectories_depend_on_lambda_squared_only(smooth, cfg, lam):
    """Integrating at lambda and -lambda gives identical node values."""
    for plus, minus in zip(solve(smooth, lam, cfg), solve(smooth, -lam, cfg)):
        assert np.array_equal(plus.values, minus.values)
        assert np.array_equal(plus.derivatives, minus.derivatives)


@pytest.mark.integrator
def test_value_scaling_across_interface(cfg):
    """gamma1 = 2 doubles omega_1(pi/2) = 0, so omega_2 = -sin(x - pi/2) and omega_2(pi) = -1."""
    problem = validate_problem(make_spec(gamma1=2.0))
    omega1, omega2 = solve(problem, 1.0, cfg)
    y0, dy0 = dense_eval(omega2, math.pi / 2)
    assert y0 == pytest.approx(2.0 * omega1.values[-1], rel=1e-15)
    assert abs(y0) <= 1e-12
    assert dy0 == pytest.approx(-1.0, abs=1e-12)
    y, dy = dense_eval(omega2, math.pi)
    assert y == pytest.approx(-1.0, abs=1e-10)
    assert dy == pytest.approx(0.0, abs=1e-10)
