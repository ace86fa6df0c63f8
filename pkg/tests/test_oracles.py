"""
Oracle tests.

The closed form of Theta without potential, successive approximation and
the classical shooting solver each cross-check the toolkit.
"""

import math

import numpy as np
import pytest

from retspec.core.characteristic import compute_spectrum, theta
from retspec.core.oracles import (
    classical_reduction_check,
    classical_theta,
    exact_theta_qzero,
    picard_solution,
)
from retspec.exceptions import PreconditionViolatedError


@pytest.mark.oracles
def test_exact_theta_symmetric(symmetric):
    lams = np.array([0.5, 1.25, 3.5])
    expected = -lams * np.sin(lams * math.pi)
    assert np.allclose(exact_theta_qzero(symmetric, lams), expected, atol=1e-14)


@pytest.mark.oracles
def test_exact_theta_finite_at_zero(general_qzero, cfg):
    """y1 = 1 - pi/4, v1 = -1/2; transfer doubles both; then d = 0.3."""
    value = exact_theta_qzero(general_qzero, 0.0)
    y_end = 2.0 * (1.0 - 0.5 * math.pi / 2) - math.pi / 2
    assert value == pytest.approx(-1.0 + 0.3 * y_end, abs=1e-14)
    assert theta(general_qzero, 0.0, cfg) == pytest.approx(value, abs=1e-12)


@pytest.mark.oracles
@pytest.mark.parametrize("lam", [1.3, 3.7, 6.2])
def test_integrator_matches_closed_form(general_qzero, cfg, lam):
    exact = exact_theta_qzero(general_qzero, lam)
    assert abs(theta(general_qzero, lam, cfg) - exact) <= 1e-9 * max(1.0, abs(exact))


@pytest.mark.oracles
def test_picard_requires_nonzero_lambda(smooth):
    with pytest.raises(PreconditionViolatedError):
        picard_solution(smooth, 0.0)


@pytest.mark.oracles
def test_picard_iterations_contract(smooth):
    solution = picard_solution(smooth, 3.0)
    for deltas in solution.deltas:
        assert deltas[-1] < deltas[0]
    assert all(count >= 1 for count in solution.iterations)


@pytest.mark.oracles
def test_classical_reduction(classical):
    report = classical_reduction_check(classical, 4)
    assert [row.n for row in report.rows] == [1, 2, 3, 4]
    assert report.max_abs_difference <= 1e-8


@pytest.mark.oracles
def test_classical_reduction_preconditions(smooth, general_qzero):
    with pytest.raises(PreconditionViolatedError, match="Delta"):
        classical_reduction_check(smooth, 2)
    with pytest.raises(PreconditionViolatedError, match="p1"):
        classical_reduction_check(general_qzero, 2)


@pytest.mark.oracles
def test_classical_theta_vanishes_at_roots(classical, cfg):
    spectrum = compute_spectrum(classical, 3, cfg)
    for entry in spectrum.entries:
        assert abs(classical_theta(classical, entry.root)) <= 1e-6


@pytest.mark.oracles
@pytest.mark.parametrize("lam", [10.0, 20.0, 40.0])
def test_successive_approximation_contracts_like_one_over_lambda(smooth, lam):
    """Each sweep shrinks the sup-norm change by at most 2 / lambda."""
    solution = picard_solution(smooth, lam)
    for deltas in solution.deltas:
        ratios = [b / a for a, b in zip(deltas, deltas[1:]) if b > 1e-11]
        assert ratios, deltas
        assert lam * max(ratios) <= 2.0, ratios
