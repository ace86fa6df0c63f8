"""
Asymptotic formula tests.

Delay integrals against adaptive quadrature, parity in lambda, the K and S
factors, eigenvalue expansions and nodal predictions on exact instances.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from retspec.core.asymptotics import (
    DelayIntegralKind,
    Theorem1Convention,
    delay_integral,
    first_order_eigenvalue,
    k_factor,
    nodal_formula_left,
    nodal_formula_right,
    nodal_prediction,
    reciprocal_expansion,
    s_factor,
    theorem1_eigenvalue,
)
from retspec.core.characteristic import lambda0
from retspec.core.problem import HALF_PI, Side
from retspec.core.quadrature import QuadratureConfig
from retspec.exceptions import ConfigError, DomainError, IndexOutOfRangeError
from retspec.utils.slopes import convergence_slope
from test_examples.instances import robin_root


@pytest.mark.asymptotics
@pytest.mark.parametrize("lam", [0.0, 3.0, 11.5])
def test_delay_integrals_against_adaptive_quadrature(smooth, lam):
    cases = [
        (DelayIntegralKind.A, 1.2, lambda t: math.cos(t) * math.sin(lam * 0.1 * t), 0.0),
        (DelayIntegralKind.B, HALF_PI, lambda t: math.cos(t) * math.cos(lam * 0.1 * t), 0.0),
        (DelayIntegralKind.C, 2.7, lambda t: math.cos(t) * math.sin(lam * 0.05 * (t - HALF_PI)), HALF_PI),
        (DelayIntegralKind.D, math.pi, lambda t: math.cos(t) * math.cos(lam * 0.05 * (t - HALF_PI)), HALF_PI),
    ]
    for kind, x, integrand, lo in cases:
        expected, _ = quad(integrand, lo, x, epsabs=1e-14, epsrel=1e-14)
        assert delay_integral(smooth, kind, x, lam) == pytest.approx(expected, abs=1e-12), kind


@pytest.mark.asymptotics
def test_sine_integrals_odd_cosine_even(smooth):
    for lam in (0.7, 4.2, 9.9):
        forward = delay_integral(smooth, DelayIntegralKind.A, HALF_PI, lam)
        assert delay_integral(smooth, DelayIntegralKind.A, HALF_PI, -lam) == pytest.approx(-forward, abs=1e-15)
        forward = delay_integral(smooth, DelayIntegralKind.D, math.pi, lam)
        assert delay_integral(smooth, DelayIntegralKind.D, math.pi, -lam) == pytest.approx(forward, abs=1e-15)


@pytest.mark.asymptotics
def test_integrals_vanish_without_potential(symmetric):
    for kind in DelayIntegralKind:
        x = kind.side.bounds[1]
        assert delay_integral(symmetric, kind, x, 3.3) == 0.0


@pytest.mark.asymptotics
def test_integrals_without_delay(classical):
    """Delta == 0: sine integrals vanish and cosine integrals integrate q."""
    assert delay_integral(classical, DelayIntegralKind.A, HALF_PI, 5.0) == 0.0
    assert delay_integral(classical, DelayIntegralKind.B, HALF_PI, 5.0) == pytest.approx(0.1 * HALF_PI)
    assert delay_integral(classical, DelayIntegralKind.D, math.pi, 5.0) == pytest.approx(0.1 * HALF_PI)


@pytest.mark.asymptotics
def test_integral_domain(smooth):
    with pytest.raises(DomainError):
        delay_integral(smooth, DelayIntegralKind.A, 2.0, 1.0)
    with pytest.raises(DomainError):
        delay_integral(smooth, DelayIntegralKind.C, 1.0, 1.0)
    assert delay_integral(smooth, DelayIntegralKind.B, 0.0, 1.0) == 0.0


@pytest.mark.asymptotics
def test_complex_lambda(smooth):
    value = delay_integral(smooth, DelayIntegralKind.A, HALF_PI, 1.0 + 2.0j)
    assert isinstance(value, complex)
    expected_real, _ = quad(
        lambda t: (math.cos(t) * np.sin((1.0 + 2.0j) * 0.1 * t)).real, 0.0, HALF_PI, epsabs=1e-14
    )
    assert value.real == pytest.approx(expected_real, abs=1e-12)


@pytest.mark.asymptotics
def test_kind_metadata():
    assert DelayIntegralKind.A.side is Side.LEFT
    assert DelayIntegralKind.D.side is Side.RIGHT
    assert DelayIntegralKind.C.trig is np.sin
    assert DelayIntegralKind.B.trig is np.cos


@pytest.mark.asymptotics
def test_k_and_s_factors(robin, general_qzero, smooth):
    assert k_factor(robin, 3.0) == pytest.approx(-1.0)
    assert k_factor(general_qzero, 3.0) == pytest.approx(0.5 * 1.0 / 1.0 - 0.3 * 1.5)
    assert s_factor(robin, 3.0) == 0.0
    assert s_factor(smooth, 0.0) == 0.0


@pytest.mark.asymptotics
def test_formulas_exact_without_potential(symmetric):
    for n in (1, 5, 17):
        assert theorem1_eigenvalue(symmetric, n) == pytest.approx(n, abs=1e-14)
        assert first_order_eigenvalue(symmetric, n) == pytest.approx(n, abs=1e-14)


@pytest.mark.asymptotics
def test_robin_expansions(robin):
    """The q == 0 Robin case has K = -d*p2 and S = 0."""
    n = 6
    printed = theorem1_eigenvalue(robin, n)
    squared = theorem1_eigenvalue(robin, n, convention=Theorem1Convention.PI_SQUARED)
    assert printed == pytest.approx(n + 1 / (n * math.pi) - 1 / n**3)
    assert squared == pytest.approx(n + 1 / (n * math.pi) - 1 / (math.pi**2 * n**3))
    assert first_order_eigenvalue(robin, n) == pytest.approx(n + 1 / (n * math.pi))


@pytest.mark.asymptotics
def test_robin_convergence_slopes(robin):
    ns = list(range(4, 13))
    theorem1 = [(n, abs(robin_root(n) - theorem1_eigenvalue(robin, n))) for n in ns]
    first = [(n, abs(robin_root(n) - first_order_eigenvalue(robin, n))) for n in ns]
    assert convergence_slope(theorem1) <= -2.5
    assert convergence_slope(first) <= -1.8


@pytest.mark.asymptotics
def test_reciprocal_expansion(robin):
    for n in (5, 10, 20):
        assert abs(1.0 / robin_root(n) - reciprocal_expansion(robin, n, 1)) <= 1.0 / n**4
        assert reciprocal_expansion(robin, n, 2) == pytest.approx(1.0 / n**2)
    with pytest.raises(ConfigError):
        reciprocal_expansion(robin, 3, 3)


@pytest.mark.asymptotics
def test_index_must_be_positive(symmetric):
    with pytest.raises(IndexOutOfRangeError):
        theorem1_eigenvalue(symmetric, 0)
    with pytest.raises(IndexOutOfRangeError):
        first_order_eigenvalue(symmetric, -1)


@pytest.mark.asymptotics
@pytest.mark.nodal
def test_nodal_formulas_exact_case(symmetric):
    """Without potential the formulas reduce to (j - 1/2) * pi / n."""
    n = 6
    for j in range(1, n + 1):
        expected = (j - 0.5) * math.pi / n
        prediction = nodal_prediction(symmetric, n, j)
        assert prediction.x == pytest.approx(expected, abs=1e-14)
        assert prediction.side is (Side.LEFT if j <= n // 2 else Side.RIGHT)
        assert not prediction.clamped


@pytest.mark.asymptotics
@pytest.mark.nodal
def test_nodal_formula_index_ranges(symmetric):
    assert nodal_formula_left(symmetric, 6, 3) == pytest.approx(2.5 * math.pi / 6)
    assert nodal_formula_right(symmetric, 6, 4) == pytest.approx(3.5 * math.pi / 6)
    with pytest.raises(IndexOutOfRangeError):
        nodal_formula_left(symmetric, 6, 4)
    with pytest.raises(IndexOutOfRangeError):
        nodal_formula_right(symmetric, 6, 3)
    with pytest.raises(IndexOutOfRangeError):
        nodal_prediction(symmetric, 6, 7)


@pytest.mark.asymptotics
@pytest.mark.nodal
def test_nodal_argument_clamping(general_qzero):
    """p1 != p2 can push the right formula's integral argument outside its interval."""
    n = 4
    predictions = [nodal_prediction(general_qzero, n, j) for j in range(1, n + 1)]
    for prediction in predictions:
        shifted = (prediction.j - 0.5) * math.pi * 1.5 / (1.2 * n)
        if prediction.side is Side.RIGHT:
            assert prediction.clamped == (not HALF_PI <= shifted <= math.pi)


@pytest.mark.asymptotics
def test_panel_doubling_at_sixtieth_seed(smooth):
    """Doubling the panel budget moves delay integrals by < 1e-10 up to lambda_60^0."""
    doubled = QuadratureConfig(min_panels=16, panels_per_oscillation=8)
    lam = lambda0(smooth, 60)
    for kind in DelayIntegralKind:
        lo, hi = kind.side.bounds
        for x in np.linspace(lo, hi, 7)[1:]:
            coarse = delay_integral(smooth, kind, float(x), lam)
            fine = delay_integral(smooth, kind, float(x), lam, doubled)
            assert abs(coarse - fine) < 1e-10, (kind, x)
    assert abs(k_factor(smooth, lam) - k_factor(smooth, lam, doubled)) < 1e-10
    assert abs(s_factor(smooth, lam) - s_factor(smooth, lam, doubled)) < 1e-10


@pytest.mark.asymptotics
def test_left_node_gap_approaches_leading_order(smooth):
    """Consecutive predicted left nodes are pi * p1 / lambda_n^0 apart to 1e-2 at n = 50."""
    n = 50
    gap = math.pi * smooth.spec.p1 / lambda0(smooth, n)
    left = [nodal_prediction(smooth, n, j).x for j in range(1, n // 2 + 1)]
    relative = [abs((b - a) - gap) / gap for a, b in zip(left, left[1:])]
    assert max(relative) <= 1e-2


@pytest.mark.asymptotics
@pytest.mark.slow
def test_robin_slopes_from_computed_roots(robin, robin_spectrum_60):
    """theorem1 error slope <= -2.5 and first-order slope <= -1.8 over n = 10..60."""
    entries = robin_spectrum_60.entries[9:60]
    theorem1 = [(e.n, abs(e.root - theorem1_eigenvalue(robin, e.n))) for e in entries]
    first = [(e.n, abs(e.root - first_order_eigenvalue(robin, e.n))) for e in entries]
    assert convergence_slope(theorem1) <= -2.5
    assert convergence_slope(first) <= -1.8
