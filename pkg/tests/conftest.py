"""
Shared pytest fixtures for retspec testing.
"""

import pytest
import sys
import os

# Add src and tests to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))
sys.path.insert(0, os.path.dirname(__file__))

from retspec.api import RetSpecAPI
from retspec.core.characteristic import compute_spectrum
from retspec.core.integrator import IntegratorConfig
from retspec.core.problem import validate_problem
from test_examples.instances import (
    CLASSICAL,
    GENERAL_QZERO,
    ROBIN_QZERO,
    SMOOTH_GATED,
    SYMMETRIC_QZERO,
)


@pytest.fixture
def api():
    """Create RetSpecAPI instance for testing."""
    return RetSpecAPI()


@pytest.fixture(scope="session")
def cfg():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def symmetric():
    return validate_problem(SYMMETRIC_QZERO)


@pytest.fixture(scope="session")
def robin():
    return validate_problem(ROBIN_QZERO)


@pytest.fixture(scope="session")
def smooth():
    return validate_problem(SMOOTH_GATED)


@pytest.fixture(scope="session")
def classical():
    return validate_problem(CLASSICAL)


@pytest.fixture(scope="session")
def general_qzero():
    return validate_problem(GENERAL_QZERO)


@pytest.fixture(scope="session")
def symmetric_spectrum(symmetric):
    """Eigenvalues 1..8 of the symmetric q == 0 instance."""
    return compute_spectrum(symmetric, 8)


@pytest.fixture(scope="session")
def smooth_spectrum(smooth):
    """Eigenvalues 1..8 of the smooth gated instance."""
    return compute_spectrum(smooth, 8)


@pytest.fixture(scope="session")
def smooth_spectrum_64(smooth):
    """Eigenvalues 1..64 of the smooth gated instance (slow)."""
    return compute_spectrum(smooth, 64)


@pytest.fixture(scope="session")
def robin_spectrum_60(robin):
    """Eigenvalues 1..60 of the Robin instance with fine steps (slow)."""
    return compute_spectrum(robin, 60, IntegratorConfig(step_count=16384))
