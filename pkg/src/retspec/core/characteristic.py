"""Characteristic function and eigenvalue search.

Theta(lambda) = omega_2'(pi) + d * omega_2(pi) is always taken from the
integrator. Its zeros are bracketed around the seeds lambda_n^0, the zeros of
the unperturbed function Theta_0, and refined with Brent's method.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..exceptions import (
    BracketNotFoundError,
    ConfigError,
    IncompleteSpectrumError,
    RetSpecError,
    SpectrumError,
)
from .integrator import IntegratorConfig, Scalar, endpoint_state
from .problem import ValidatedProblem

logger = logging.getLogger(__name__)


@dataclass
class SpectrumConfig:
    """Bracketing and near-zero scan settings."""

    bracket_fraction: float = 0.45  # of the seed gap
    bracket_growth: float = 1.5
    max_expansions: int = 3
    bracket_samples: int = 9
    near_zero_samples: int = 33
    relative_xtol: float = 1e-11

    def validate(self) -> None:
        if not 0 < self.bracket_fraction <= 1:
            raise ConfigError("bracket_fraction must lie in (0, 1]")
        if self.bracket_growth <= 1:
            raise ConfigError("bracket_growth must exceed 1")
        if self.max_expansions < 0:
            raise ConfigError("max_expansions must be >= 0")
        if self.bracket_samples < 3:
            raise ConfigError("bracket_samples must be >= 3")
        if self.near_zero_samples < 3:
            raise ConfigError("near_zero_samples must be >= 3")


def lambda0(problem: ValidatedProblem, n: int) -> float:
    """n-th seed 2*p1*p2*n / (p1 + p2)."""
    return problem.seed_gap * n


def theta0(problem: ValidatedProblem, lam):
    """Unperturbed characteristic function, phase lambda*pi*(p1+p2)/(2*p1*p2)."""
    s = problem.spec
    phase = lam * math.pi * (s.p1 + s.p2) / (2.0 * s.p1 * s.p2)
    return -(s.gamma1 * s.a2 * lam / (s.delta1 * s.p2)) * np.sin(phase)


def theta_mu(problem: ValidatedProblem, mu: Scalar, cfg: Optional[IntegratorConfig] = None) -> Scalar:
    """Theta as a function of mu = lambda**2."""
    cfg = cfg or IntegratorConfig()
    value, derivative = endpoint_state(problem, mu, cfg)
    return derivative + problem.spec.d * value


def theta(problem: ValidatedProblem, lam: Scalar, cfg: Optional[IntegratorConfig] = None) -> Scalar:
    """Theta(lambda) = omega_2'(pi) + d*omega_2(pi) from the delay integrator."""
    cfg = cfg or IntegratorConfig()
    cfg.validate()
    mu = lam * lam
    if isinstance(mu, complex) and mu.imag == 0.0:
        mu = mu.real
    result = theta_mu(problem, mu, cfg)
    return float(result) if not isinstance(result, complex) else result


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    seed: float
    root: float
    residual: float
    bracket: Tuple[float, float]
    theta_bracket: Tuple[float, float]
    expansions: int = 0


@dataclass(frozen=True)
class NearZeroRoot:
    """A root of Theta in mu = lambda**2 inside |lambda| < lambda_1^0 / 2."""

    mu: float
    bracket: Tuple[float, float]
    residual: float

    @property
    def lam(self) -> Scalar:
        return math.sqrt(self.mu) if self.mu >= 0 else complex(0.0, math.sqrt(-self.mu))


@dataclass
class Spectrum:
    entries: List[SpectrumEntry] = field(default_factory=list)
    near_zero_roots: List[NearZeroRoot] = field(default_factory=list)

    def entry(self, n: int) -> SpectrumEntry:
        for entry in self.entries:
            if entry.n == n:
                return entry
        raise IncompleteSpectrumError(f"spectrum has no eigenvalue with index n={n}")

    def covers(self, n_max: int) -> bool:
        indices = {entry.n for entry in self.entries}
        return all(n in indices for n in range(1, n_max + 1))

    @property
    def n_max(self) -> int:
        return max((entry.n for entry in self.entries), default=0)

    @property
    def roots(self) -> List[float]:
        return [entry.root for entry in self.entries]


class _CachedTheta:
    """Memoized real Theta; every evaluation costs two integrations."""

    def __init__(self, problem: ValidatedProblem, cfg: IntegratorConfig, squared: bool = False):
        self.problem = problem
        self.cfg = cfg
        self.squared = squared
        self.values: Dict[float, float] = {}

    def __call__(self, arg: float) -> float:
        if arg not in self.values:
            mu = arg if self.squared else arg * arg
            self.values[arg] = float(theta_mu(self.problem, mu, self.cfg))
        return self.values[arg]


def _sign_changes(xs: Sequence[float], values: Sequence[float]) -> List[Tuple[float, float]]:
    return [
        (xs[k], xs[k + 1])
        for k in range(len(xs) - 1)
        if values[k] * values[k + 1] < 0
    ]


def find_eigenvalue(
    problem: ValidatedProblem,
    n: int,
    cfg: Optional[IntegratorConfig] = None,
    spectrum_cfg: Optional[SpectrumConfig] = None,
) -> SpectrumEntry:
    """Bracket and refine the root of Theta nearest the seed lambda_n^0."""
    if n < 1:
        raise ConfigError(f"eigenvalue index must be >= 1, got {n}")
    cfg = cfg or IntegratorConfig()
    spectrum_cfg = spectrum_cfg or SpectrumConfig()
    cfg.validate()
    spectrum_cfg.validate()

    f = _CachedTheta(problem, cfg)
    seed = lambda0(problem, n)
    floor = 0.5 * problem.seed_gap
    rho = spectrum_cfg.bracket_fraction * problem.seed_gap
    xtol = spectrum_cfg.relative_xtol * max(1.0, seed)
    lo = hi = seed

    for expansion in range(spectrum_cfg.max_expansions + 1):
        lo, hi = max(seed - rho, floor), seed + rho
        f_lo, f_hi = f(lo), f(hi)
        if f_lo * f_hi < 0:
            candidates = [(lo, hi)]
        else:
            xs = np.linspace(lo, hi, spectrum_cfg.bracket_samples).tolist()
            values = [f(x) for x in xs]
            exact = [k for k, v in enumerate(values) if v == 0.0]
            if exact:
                # an exact zero on the grid: its neighbours still bracket it
                k = min(exact, key=lambda i: abs(xs[i] - seed))
                a, b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
                return SpectrumEntry(n, seed, xs[k], 0.0, (a, b), (f(a), f(b)), expansion)
            candidates = _sign_changes(xs, values)
        if candidates:
            a, b = min(candidates, key=lambda ab: abs(0.5 * (ab[0] + ab[1]) - seed))
            root = brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
            residual = abs(float(theta_mu(problem, root * root, cfg)))
            logger.debug(
                "n=%d: root %.15g in [%.10g, %.10g] after %d expansion(s), %d evaluations",
                n, root, a, b, expansion, len(f.values),
            )
            return SpectrumEntry(n, seed, root, residual, (a, b), (f(a), f(b)), expansion)
        logger.debug("n=%d: no sign change on [%.10g, %.10g], expanding", n, lo, hi)
        rho *= spectrum_cfg.bracket_growth

    samples = sorted(f.values.items())
    raise BracketNotFoundError(n, (lo, hi), samples)


def find_near_zero_roots(
    problem: ValidatedProblem,
    cfg: Optional[IntegratorConfig] = None,
    spectrum_cfg: Optional[SpectrumConfig] = None,
) -> List[NearZeroRoot]:
    """Roots of Theta in mu = lambda**2 over [-R**2, R**2], R = lambda_1^0 / 2.

    Scanning in mu finds both a small real lambda and a purely imaginary one.
    """
    cfg = cfg or IntegratorConfig()
    spectrum_cfg = spectrum_cfg or SpectrumConfig()
    radius = 0.5 * lambda0(problem, 1)
    f = _CachedTheta(problem, cfg, squared=True)
    mus = np.linspace(-radius * radius, radius * radius, spectrum_cfg.near_zero_samples).tolist()
    values = [f(mu) for mu in mus]

    roots = [NearZeroRoot(mu, (mu, mu), 0.0) for mu, v in zip(mus, values) if v == 0.0]
    for a, b in _sign_changes(mus, values):
        mu = brentq(f, a, b, xtol=1e-14 * max(1.0, radius * radius), maxiter=200)
        roots.append(NearZeroRoot(mu, (a, b), abs(float(theta_mu(problem, mu, cfg)))))
    roots.sort(key=lambda root: root.mu)
    if not roots:
        logger.info("no root of theta with |lambda| < %.6g", radius)
    return roots


def compute_spectrum(
    problem: ValidatedProblem,
    n_max: int,
    cfg: Optional[IntegratorConfig] = None,
    spectrum_cfg: Optional[SpectrumConfig] = None,
    progress: Optional[Callable[[int], None]] = None,
) -> Spectrum:
    """Eigenvalues for n = 1..n_max plus the near-zero roots.

    Per-n failures are collected; if any occur a SpectrumError carrying the
    partial spectrum is raised after every index has been tried.
    """
    if n_max < 1:
        raise ConfigError(f"n_max must be >= 1, got {n_max}")
    failures: List[RetSpecError] = []
    spectrum = Spectrum(near_zero_roots=find_near_zero_roots(problem, cfg, spectrum_cfg))
    for n in range(1, n_max + 1):
        try:
            spectrum.entries.append(find_eigenvalue(problem, n, cfg, spectrum_cfg))
        except RetSpecError as e:
            failures.append(e)
        if progress is not None:
            progress(n)

    for previous, current in zip(spectrum.entries, spectrum.entries[1:]):
        if current.root <= previous.root:
            failures.append(
                RetSpecError(
                    f"roots not strictly increasing: n={previous.n} -> {previous.root!r}, "
                    f"n={current.n} -> {current.root!r}"
                )
            )
    if failures:
        raise SpectrumError(failures, partial=spectrum)
    return spectrum


def count_sign_changes(
    problem: ValidatedProblem,
    lower: float,
    upper: float,
    samples: int,
    cfg: Optional[IntegratorConfig] = None,
) -> int:
    """Sign changes of Theta on a uniform grid over [lower, upper]."""
    f = _CachedTheta(problem, cfg or IntegratorConfig())
    xs = np.linspace(lower, upper, samples).tolist()
    return len(_sign_changes(xs, [f(x) for x in xs]))


def theta0_circle_minimum(
    problem: ValidatedProblem, n: int, eps: float = 0.25, samples: int = 64
) -> float:
    """min |Theta_0(lambda)| / |lambda| on the circle |lambda - lambda_n^0| = eps."""
    angles = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    points = lambda0(problem, n) + eps * np.exp(1j * angles)
    return float(np.min(np.abs(theta0(problem, points)) / np.abs(points)))
