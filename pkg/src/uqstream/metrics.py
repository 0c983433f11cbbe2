"""Evaluation metrics for multi-output regression runs."""

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalSummary:
    minimum_mse: float
    final_mean_r2: float
    cumulative_mse: float
    dataset_use: float


def _check_pair(preds, targets):
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape or preds.ndim != 2:
        raise ValueError(f"expected matching 2-D arrays, got {preds.shape} and {targets.shape}")
    if preds.shape[0] == 0:
        raise ValueError("empty evaluation set")
    return preds, targets


def mse(preds, targets) -> float:
    """Mean squared error over all samples and output components."""
    preds, targets = _check_pair(preds, targets)
    diff = preds - targets
    return float(np.mean(diff * diff))


def mean_r2(preds, targets) -> float:
    """Coefficient of determination averaged uniformly over components.

    Components whose targets have zero variance are excluded from the average
    with a warning, since R2 is undefined there.
    """
    preds, targets = _check_pair(preds, targets)
    if preds.shape[0] < 2:
        raise ValueError("mean_r2 needs at least two samples")
    ss_res = np.sum((targets - preds) ** 2, axis=0)
    ss_tot = np.sum((targets - targets.mean(axis=0)) ** 2, axis=0)
    keep = ss_tot > 0.0
    if not keep.all():
        dropped = np.flatnonzero(~keep).tolist()
        warnings.warn(f"excluding zero-variance target components {dropped} from mean_r2")
    if not keep.any():
        raise ValueError("all target components have zero variance")
    return float(np.mean(1.0 - ss_res[keep] / ss_tot[keep]))


def cumulative_mse(values) -> float:
    """Sum of a per-iteration MSE sequence."""
    values = list(values)
    if not values:
        raise ValueError("empty MSE sequence")
    return float(np.sum(np.asarray(values, dtype=np.float64)))


def summarize(trace) -> EvalSummary:
    """Collapse a run trace into its headline numbers.

    Works on any record sequence exposing test_mse, test_mean_r2,
    cumulative_mse and accepted fields.
    """
    records = list(trace)
    if not records:
        raise ValueError("empty trace")
    return EvalSummary(
        minimum_mse=min(r.test_mse for r in records),
        final_mean_r2=records[-1].test_mean_r2,
        cumulative_mse=records[-1].cumulative_mse,
        dataset_use=sum(1 for r in records if r.accepted) / len(records),
    )
