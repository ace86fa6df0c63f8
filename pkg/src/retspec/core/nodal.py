"""Numeric nodal points of eigenfunctions and their pairing with the closed-form predictions."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from ..exceptions import IndexOutOfRangeError
from .asymptotics import NodalPrediction, nodal_prediction
from .characteristic import Spectrum
from .integrator import DenseSolution, IntegratorConfig, dense_eval, solve
from .problem import HALF_PI, Side, ValidatedProblem
from .quadrature import QuadratureConfig

logger = logging.getLogger(__name__)

POINTS_PER_OSCILLATION = 64
NODE_XTOL = 1e-12
ENDPOINT_EXCLUSION = 1e-10


@dataclass(frozen=True)
class NodalRow:
    j: Optional[int]
    x_numeric: float
    x_formula: Optional[float]
    abs_error: Optional[float]
    side: Side


@dataclass
class NodalTable:
    n: int
    lam: float
    rows: List[NodalRow] = field(default_factory=list)
    unmatched_predictions: List[int] = field(default_factory=list)
    clamped: List[int] = field(default_factory=list)
    split_mismatch: bool = False

    @property
    def max_abs_error(self) -> Optional[float]:
        errors = [row.abs_error for row in self.rows if row.abs_error is not None]
        return max(errors) if errors else None

    @property
    def count_deviation(self) -> int:
        return len(self.rows) - self.n


def _side_nodes(sol: DenseSolution, lam: float, p: float) -> List[float]:
    lo, hi = sol.bounds
    half_periods = math.ceil(abs(lam) * (hi - lo) / (math.pi * p))
    samples = max(257, POINTS_PER_OSCILLATION * max(1, half_periods) + 1)
    xs = np.linspace(lo, hi, samples)
    ys, _ = sol.evaluate(xs)
    ys = np.real(ys)

    def value(x: float) -> float:
        return float(np.real(dense_eval(sol, x)[0]))

    nodes = []
    for k in range(samples - 1):
        if ys[k] == 0.0:
            nodes.append(float(xs[k]))
        elif ys[k] * ys[k + 1] < 0:
            nodes.append(bisect(value, xs[k], xs[k + 1], xtol=NODE_XTOL, maxiter=200))
    if ys[-1] == 0.0:
        nodes.append(float(xs[-1]))
    return [x for x in nodes if lo + ENDPOINT_EXCLUSION < x < hi - ENDPOINT_EXCLUSION]


def numeric_nodes(
    problem: ValidatedProblem, lambda_n: float, cfg: Optional[IntegratorConfig] = None
) -> List[float]:
    """Interior zeros of omega_1 then omega_2, excluding 0, pi and the interface point."""
    cfg = cfg or IntegratorConfig()
    omega1, omega2 = solve(problem, lambda_n, cfg)
    spec = problem.spec
    return _side_nodes(omega1, lambda_n, spec.p1) + _side_nodes(omega2, lambda_n, spec.p2)


def node_stability(
    problem: ValidatedProblem,
    lambda_n: float,
    cfg: Optional[IntegratorConfig] = None,
    factor: int = 4,
) -> float:
    """Largest node displacement when re-integrating with ``factor`` times the steps."""
    cfg = cfg or IntegratorConfig()
    coarse = numeric_nodes(problem, lambda_n, cfg)
    fine = numeric_nodes(problem, lambda_n, cfg.refined(factor))
    if len(coarse) != len(fine):
        return math.inf
    return max((abs(a - b) for a, b in zip(coarse, fine)), default=0.0)


def _local_gap(nodes: List[float], k: int, fallback: float) -> float:
    gaps = []
    if k > 0:
        gaps.append(nodes[k] - nodes[k - 1])
    if k + 1 < len(nodes):
        gaps.append(nodes[k + 1] - nodes[k])
    return min(gaps) if gaps else fallback


def compare_nodes(
    problem: ValidatedProblem,
    n: int,
    spectrum: Spectrum,
    cfg: Optional[IntegratorConfig] = None,
    quad_cfg: Optional[QuadratureConfig] = None,
) -> NodalTable:
    """Pair numeric nodes of the n-th eigenfunction with their predictions by nearest match."""
    if n < 4:
        raise IndexOutOfRangeError(f"nodal comparison needs n >= 4, got n={n}")
    entry = spectrum.entry(n)
    nodes = numeric_nodes(problem, entry.root, cfg)
    predictions: List[NodalPrediction] = [
        nodal_prediction(problem, n, j, quad_cfg) for j in range(1, n + 1)
    ]

    fallback = math.pi / n
    candidates: List[Tuple[float, int, int]] = []
    for prediction in predictions:
        if not 0.0 <= prediction.x <= math.pi:
            continue
        for k, x in enumerate(nodes):
            distance = abs(x - prediction.x)
            if distance <= 0.5 * _local_gap(nodes, k, fallback):
                candidates.append((distance, prediction.j, k))

    matched_node = {}
    matched_j = set()
    for distance, j, k in sorted(candidates):
        if j in matched_j or k in matched_node:
            continue
        matched_node[k] = j
        matched_j.add(j)

    by_j = {prediction.j: prediction for prediction in predictions}
    table = NodalTable(
        n=n,
        lam=entry.root,
        clamped=[p.j for p in predictions if p.clamped],
        unmatched_predictions=[p.j for p in predictions if p.j not in matched_j],
    )
    for k, x in enumerate(nodes):
        side = Side.LEFT if x < HALF_PI else Side.RIGHT
        j = matched_node.get(k)
        if j is None:
            table.rows.append(NodalRow(None, x, None, None, side))
        else:
            predicted = by_j[j].x
            table.rows.append(NodalRow(j, x, predicted, abs(x - predicted), side))

    left_count = sum(1 for row in table.rows if row.side is Side.LEFT)
    table.split_mismatch = left_count != n // 2
    if table.split_mismatch:
        logger.info(
            "n=%d: %d numeric nodes left of pi/2, formula split expects %d",
            n, left_count, n // 2,
        )
    if table.count_deviation:
        logger.info("n=%d: %d numeric nodes", n, len(table.rows))
    return table
