"""Residual unfairness and repair damage, estimated from samples.

Both quantities are Kullback-Leibler functionals of group-conditional
distributions; they are estimated with shared-edge histograms plus additive
smoothing, which keeps every estimate finite and lets the divergences of
different samples be compared on identical supports.

Defaults: unfairness uses ``bins=50, smoothing=1e-6`` (fine resolution, the
quantities compared live on a common support); damage uses ``bins=10,
smoothing=1.0`` (a repair deliberately moves mass off the original support,
so coarse bins with Laplace smoothing measure distributional displacement
rather than the estimator's floor).  All logs are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .data import GROUP_KEYS, AttributeWeights, ResearchDataset, empirical_weights
from .errors import (EstimationError, IncompatibleDensityError,
                     UndefinedRatioError)

UNFAIRNESS_BINS = 50
UNFAIRNESS_SMOOTHING = 1e-6
DAMAGE_BINS = 10
DAMAGE_SMOOTHING = 1.0
EDGE_PADDING = 1e-9


@dataclass(frozen=True)
class HistogramDensity:
    """Bin masses over shared strictly-increasing edges; all masses > 0."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if len(e) != len(m) + 1 or np.any(np.diff(e) <= 0):
            raise IncompatibleDensityError("edges must bracket the masses")
        if np.any(m <= 0) or abs(m.sum() - 1.0) > 1e-12:
            raise IncompatibleDensityError(
                "masses must be positive and sum to one")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "masses", m)


def estimate_hist(sample_a, sample_b, bins: int = UNFAIRNESS_BINS,
                  smoothing: float = UNFAIRNESS_SMOOTHING):
    """Histogram densities of two samples on shared edges.

    Edges span the union of both samples with a small padding; ``smoothing``
    pseudo-counts per bin keep every mass positive.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise EstimationError("histogram estimation needs nonempty samples")
    if bins < 2:
        raise EstimationError(f"need at least 2 bins, got {bins}")
    if smoothing <= 0:
        raise EstimationError(f"smoothing must be positive, got {smoothing}")
    lo = min(a.min(), b.min()) - EDGE_PADDING
    hi = max(a.max(), b.max()) + EDGE_PADDING
    edges = np.linspace(lo, hi, bins + 1)
    out = []
    for sample in (a, b):
        counts, _ = np.histogram(sample, edges)
        masses = (counts + smoothing) / (len(sample) + bins * smoothing)
        masses = masses / masses.sum()
        out.append(HistogramDensity(edges, masses))
    return out[0], out[1]


def kld_hist(p: HistogramDensity, q: HistogramDensity) -> float:
    """Directed divergence ``sum p ln(p/q)`` over shared edges."""
    if p.edges.shape != q.edges.shape or np.any(p.edges != q.edges):
        raise IncompatibleDensityError("densities use different edges")
    return float(np.sum(p.masses * np.log(p.masses / q.masses)))


def sym_kld(p: HistogramDensity, q: HistogramDensity) -> float:
    """Symmetrized divergence ``(KL(p||q) + KL(q||p)) / 2``."""
    return 0.5 * (kld_hist(p, q) + kld_hist(q, p))


def sample_sym_kld(sample_a, sample_b, bins: int = UNFAIRNESS_BINS,
                   smoothing: float = UNFAIRNESS_SMOOTHING) -> float:
    p, q = estimate_hist(sample_a, sample_b, bins, smoothing)
    return sym_kld(p, q)


@dataclass(frozen=True)
class FairnessReport:
    """Pre/post unfairness with their ratio and per-u components."""

    e_pre: float
    e_post: float
    e_hat: float
    e_u_pre: Dict[int, float]
    e_u_post: Dict[int, float]
    bins: int = UNFAIRNESS_BINS
    smoothing: float = UNFAIRNESS_SMOOTHING
    log_base: str = "e"

    @property
    def log_e_hat(self) -> float:
        return math.log(self.e_hat) if self.e_hat > 0 else -math.inf

    def as_dict(self) -> dict:
        return {
            "e_pre": self.e_pre, "e_post": self.e_post, "e_hat": self.e_hat,
            "log_e_hat": self.log_e_hat,
            "e_u_pre": {str(k): v for k, v in self.e_u_pre.items()},
            "e_u_post": {str(k): v for k, v in self.e_u_post.items()},
            "estimator": {"bins": self.bins, "smoothing": self.smoothing,
                          "log_base": self.log_base},
        }


@dataclass(frozen=True)
class DamageReport:
    """Per-group damage and its attribute-weighted total."""

    per_group: Dict[tuple, float]
    total: float
    bins: int = DAMAGE_BINS
    smoothing: float = DAMAGE_SMOOTHING
    log_base: str = "e"

    def as_dict(self) -> dict:
        return {
            "per_group": {f"{u},{s}": v for (u, s), v in self.per_group.items()},
            "total": self.total,
            "estimator": {"bins": self.bins, "smoothing": self.smoothing,
                          "log_base": self.log_base},
        }


def unfairness(dataset: ResearchDataset, bins: int = UNFAIRNESS_BINS,
               smoothing: float = UNFAIRNESS_SMOOTHING,
               weights: Optional[AttributeWeights] = None):
    """Protected-attribute dependence of the group conditionals.

    For each u, the symmetrized divergence between the two s-conditional
    samples; the total weights the components by Pr[u].  Returns
    ``(total, per_u)``.
    """
    for key in GROUP_KEYS:
        if len(dataset.group(*key)) == 0:
            raise EstimationError(f"group {key} is empty")
    if weights is None:
        weights = empirical_weights(dataset)
    per_u = {}
    total = 0.0
    for u in (0, 1):
        e_u = sample_sym_kld(dataset.group(u, 0), dataset.group(u, 1),
                             bins, smoothing)
        per_u[u] = e_u
        total += weights.pr_u(u) * e_u
    return total, per_u


def e_hat(pre: ResearchDataset, post: ResearchDataset,
          bins: int = UNFAIRNESS_BINS,
          smoothing: float = UNFAIRNESS_SMOOTHING) -> FairnessReport:
    """Ratio of post- to pre-repair unfairness.

    Both totals use the pre-repair attribute weights so they are comparable;
    1 means no improvement, 0 means total protected-attribute invariance.
    """
    if pre.counts != post.counts:
        raise EstimationError("pre and post datasets must align by group")
    weights = empirical_weights(pre)
    e_pre, per_u_pre = unfairness(pre, bins, smoothing, weights)
    e_post, per_u_post = unfairness(post, bins, smoothing, weights)
    if e_pre <= 0:
        raise UndefinedRatioError("pre-repair unfairness is zero")
    return FairnessReport(e_pre=e_pre, e_post=e_post, e_hat=e_post / e_pre,
                          e_u_pre=per_u_pre, e_u_post=per_u_post,
                          bins=bins, smoothing=smoothing)


def damage(pre: ResearchDataset, post: ResearchDataset,
           bins: int = DAMAGE_BINS,
           smoothing: float = DAMAGE_SMOOTHING) -> DamageReport:
    """Information lost by the repair, per group and attribute-weighted.

    Each group's damage is the divergence of the original sample from the
    repaired one on shared edges; the total weights groups by the pre-repair
    ``Pr[u] Pr[s|u]``.
    """
    if pre.counts != post.counts:
        raise EstimationError("pre and post datasets must align by group")
    for key in GROUP_KEYS:
        if len(pre.group(*key)) == 0:
            raise EstimationError(f"group {key} is empty")
    weights = empirical_weights(pre)
    per_group = {}
    total = 0.0
    for u, s in GROUP_KEYS:
        p, q = estimate_hist(pre.group(u, s), post.group(u, s), bins, smoothing)
        d = kld_hist(p, q)
        per_group[(u, s)] = d
        total += weights.pr_u(u) * weights.pr_s_given_u(s, u) * d
    return DamageReport(per_group=per_group, total=total,
                        bins=bins, smoothing=smoothing)
