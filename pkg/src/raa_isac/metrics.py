"""Sensing metrics: matched AoA RMSE and average missing shots."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def match_estimates(true, est):
    """Minimum total squared-error one-to-one matching.

    Returns ``(est_idx, true_idx)`` arrays of equal length ``len(est)``.
    """
    true = np.asarray(true, dtype=float)
    est = np.asarray(est, dtype=float)
    if est.size > true.size:
        raise ValueError("more estimates than true angles")
    if est.size == 0:
        return np.array([], dtype=int), np.array([], dtype=int)
    cost = (est[:, None] - true[None, :]) ** 2
    return linear_sum_assignment(cost)


def matched_squared_errors(true, est) -> np.ndarray:
    i, j = match_estimates(true, est)
    return (np.asarray(est, dtype=float)[i] - np.asarray(true, dtype=float)[j]) ** 2


def aoa_rmse(true, est) -> float:
    """RMSE over optimally matched pairs; NaN when there are no estimates."""
    se = matched_squared_errors(true, est)
    if se.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean(se)))


def average_missing_shots(runs) -> float:
    """Mean of ``card(true) - card(est)`` over ``(true, est)`` runs."""
    runs = list(runs)
    if not runs:
        raise ValueError("no runs")
    deficits = []
    for true, est in runs:
        if len(est) > len(true):
            raise ValueError("more estimates than true angles")
        deficits.append(len(true) - len(est))
    return float(np.mean(deficits))
