"""
retspec's library interface.

Bundles the integrator and quadrature configuration so the spectral
computations can be called without the CLI or a TOML file.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .core.characteristic import Spectrum, SpectrumConfig, compute_spectrum, theta
from .core.integrator import DenseSolution, IntegratorConfig, Scalar, solve
from .core.nodal import NodalTable, compare_nodes
from .core.problem import DEFAULT_GRID_POINTS, ProblemSpec, ValidatedProblem, validate_problem
from .core.quadrature import QuadratureConfig
from .core.trace import ResidueMethod, TraceReport, trace_report
from .exceptions import RetSpecError


@dataclass
class AnalysisResult:
    """Spectrum and trace of one instance, or the error that stopped them."""

    spectrum: Optional[Spectrum] = None
    trace: Optional[TraceReport] = None
    error_message: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error_message is None


class RetSpecAPI:
    """
    Simple API for the retarded interface problem.

    Usage:
        api = RetSpecAPI()
        problem = api.problem(spec)
        spectrum = api.spectrum(problem, n_max=10)
        print(spectrum.roots)
    """

    def __init__(
        self,
        step_count: int = 2048,
        corrector_iterations: int = 2,
        interpolation_order: int = 3,
        reference_abs_lambda: float = 64.0,
        points_per_panel: int = 16,
        min_panels: int = 8,
        panels_per_oscillation: int = 4,
        spectrum_config: Optional[SpectrumConfig] = None,
    ):
        """
        Args:
            step_count: RK4 steps per subinterval at |lambda| <= reference_abs_lambda
            corrector_iterations: predictor-corrector passes on steps whose delayed
                argument falls inside the current step
            interpolation_order: 3 (cubic Hermite) or 5 (quintic Hermite) dense output
            reference_abs_lambda: |lambda| above which the step count grows linearly
            points_per_panel: Gauss-Legendre points per panel
            min_panels: fewest panels per delay integral
            panels_per_oscillation: panels per half oscillation of the integrand
            spectrum_config: bracketing parameters of the eigenvalue search
        """
        self.integrator_config = IntegratorConfig(
            step_count=step_count,
            corrector_iterations=corrector_iterations,
            interpolation_order=interpolation_order,
            reference_abs_lambda=reference_abs_lambda,
        )
        self.integrator_config.validate()
        self.quadrature_config = QuadratureConfig(
            points_per_panel=points_per_panel,
            min_panels=min_panels,
            panels_per_oscillation=panels_per_oscillation,
        )
        self.quadrature_config.validate()
        self.spectrum_config = spectrum_config or SpectrumConfig()
        self.spectrum_config.validate()

    def problem(self, spec: ProblemSpec, grid_points: int = DEFAULT_GRID_POINTS) -> ValidatedProblem:
        """Validate ``spec``; raises ProblemValidationError listing every violation."""
        return validate_problem(spec, grid_points)

    def theta(self, problem: ValidatedProblem, lam: Scalar) -> Scalar:
        return theta(problem, lam, self.integrator_config)

    def solve(self, problem: ValidatedProblem, lam: Scalar) -> Tuple[DenseSolution, DenseSolution]:
        return solve(problem, lam, self.integrator_config)

    def spectrum(self, problem: ValidatedProblem, n_max: int) -> Spectrum:
        return compute_spectrum(problem, n_max, self.integrator_config, self.spectrum_config)

    def trace(
        self,
        problem: ValidatedProblem,
        checkpoints: Sequence[int],
        spectrum: Optional[Spectrum] = None,
        method: ResidueMethod = ResidueMethod.SERIES,
    ) -> TraceReport:
        """Partial sums at ``checkpoints``; computes the spectrum when not given."""
        spectrum = spectrum or self.spectrum(problem, max(checkpoints))
        return trace_report(problem, spectrum, checkpoints, self.quadrature_config, method)

    def nodal(self, problem: ValidatedProblem, n: int, spectrum: Optional[Spectrum] = None) -> NodalTable:
        spectrum = spectrum or self.spectrum(problem, n)
        return compare_nodes(problem, n, spectrum, self.integrator_config, self.quadrature_config)

    def analyze(self, problem: ValidatedProblem, n_max: int) -> AnalysisResult:
        """Spectrum up to n_max and the trace partial sum S_{n_max}.

        Library errors are reported in ``error_message`` rather than raised;
        a partial spectrum is kept when some indices failed.
        """
        result = AnalysisResult()
        try:
            result.spectrum = self.spectrum(problem, n_max)
            result.trace = self.trace(problem, [n_max], result.spectrum)
        except RetSpecError as e:
            result.spectrum = result.spectrum or getattr(e, "partial", None)
            result.error_message = str(e)
        return result
