"""Quantile-matching ("geometric") repair baseline.

Full repair to the rank-matched midpoint of the two protected-group quantile
functions, conditional on the unprotected attribute.  The construction is
tied to in-sample ranks, so it cannot repair values outside the fitted
sample; that refusal is part of the behaviour under test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .data import GROUP_KEYS, ResearchDataset, validate_labelled
from .errors import EstimationError, OffSampleError


@dataclass(frozen=True)
class QuantileRepairModel:
    """Sorted per-group samples; quantiles interpolate between order stats."""

    sorted_groups: Dict[tuple, np.ndarray]

    def group(self, u: int, s: int) -> np.ndarray:
        return self.sorted_groups[(int(u), int(s))]


def fit_geometric(dataset: ResearchDataset) -> QuantileRepairModel:
    """Store each group's sorted sample; no stopping rule is involved."""
    groups = {}
    for key in GROUP_KEYS:
        xs = dataset.group(*key)
        if len(xs) == 0:
            raise EstimationError(f"cannot fit quantile repair: group {key} empty")
        groups[key] = np.sort(np.asarray(xs, dtype=float))
    return QuantileRepairModel(groups)


def _mid_ranks(own: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Normalized mid-ranks in (0, 1); ties share their average rank."""
    lo = np.searchsorted(own, xs, side="left")
    hi = np.searchsorted(own, xs, side="right")
    if np.any(lo == hi):
        missing = xs[lo == hi][0]
        raise OffSampleError(
            f"value {missing!r} is not in the fitted sample; the quantile "
            "baseline repairs in-sample data only")
    mid = (lo + hi - 1) / 2.0
    return (mid + 0.5) / len(own)


def repair_geometric(model: QuantileRepairModel, datum) -> float:
    """Repair one in-sample datum to the midpoint of matched quantiles."""
    x, u, s = float(datum[0]), int(datum[1]), int(datum[2])
    own = model.group(u, s)
    other = model.group(u, 1 - s)
    r = _mid_ranks(own, np.array([x]))[0]
    q_own = np.quantile(own, r, method="hazen")
    q_other = np.quantile(other, r, method="hazen")
    return float(0.5 * q_own + 0.5 * q_other)


def repair_geometric_batch(model: QuantileRepairModel, data) -> np.ndarray:
    """Vectorized in-sample repair; returns ``(n, 3)`` rows with x replaced."""
    arr = validate_labelled(data)
    out = arr.copy()
    for u, s in GROUP_KEYS:
        mask = (arr[:, 1] == u) & (arr[:, 2] == s)
        if not mask.any():
            continue
        own = model.group(u, s)
        other = model.group(u, 1 - s)
        r = _mid_ranks(own, arr[mask, 0])
        out[mask, 0] = 0.5 * np.quantile(own, r, method="hazen") \
                     + 0.5 * np.quantile(other, r, method="hazen")
    return out
