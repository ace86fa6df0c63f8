"""Log-log convergence slopes."""

from typing import Sequence, Tuple

import numpy as np

from ..exceptions import DegenerateInputError


def convergence_slope(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of log(error) against log(n)."""
    if len(points) < 3:
        raise DegenerateInputError(f"need at least 3 points to fit a slope, got {len(points)}")
    ns = np.array([n for n, _ in points], dtype=float)
    errors = np.array([e for _, e in points], dtype=float)
    if np.any(ns <= 0):
        raise DegenerateInputError("indices must be positive")
    if np.any(~np.isfinite(errors)) or np.any(errors <= 0):
        bad = [(n, e) for n, e in points if not (np.isfinite(e) and e > 0)]
        raise DegenerateInputError(f"errors must be positive and finite, got {bad}")
    if np.unique(ns).size < 2:
        raise DegenerateInputError("need at least two distinct indices")
    log_n = np.log(ns)
    log_e = np.log(errors)
    centered = log_n - log_n.mean()
    return float(np.dot(centered, log_e - log_e.mean()) / np.dot(centered, centered))
