"""Optimal-transport repair operators built from quenched learners.

The repair target for each state of the unprotected attribute ``u`` is the
midpoint of the Wasserstein geodesic between the two protected-group
quantized conditionals.  It is never materialized: each datum is rounded
onto its own group's centroid grid, coupled to a partner index through the
transport plan, and mapped to the average of the two centroids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .data import (AttributeWeights, ResearchDataset, empirical_weights,
                   validate_labelled)
from .errors import (DataValidationError, InsufficientSupportError,
                     NotQuenchedError, UnfittedGroupError)
from .stopping import SubgroupLearner

MARGINAL_TOL = 1e-10


@dataclass(frozen=True)
class QuantizedConditional:
    """Strictly increasing centroids with a probability mass per centroid."""

    centroids: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.centroids, dtype=float)
        w = np.asarray(self.masses, dtype=float)
        if q.ndim != 1 or len(q) < 1:
            raise InsufficientSupportError("at least one centroid required")
        if np.any(np.diff(q) <= 0):
            raise DataValidationError("centroids must be strictly increasing")
        if (len(w) != len(q) or not np.all(np.isfinite(w))
                or not np.all(w >= 0) or not abs(w.sum() - 1.0) <= 1e-9):
            raise DataValidationError("masses must be a probability vector")
        object.__setattr__(self, "centroids", q)
        object.__setattr__(self, "masses", w)

    @property
    def m(self) -> int:
        return len(self.centroids)

    @classmethod
    def uniform(cls, centroids) -> "QuantizedConditional":
        q = np.asarray(centroids, dtype=float)
        return cls(q, np.full(len(q), 1.0 / len(q)))


def centroids_from_learner(learner: SubgroupLearner) -> QuantizedConditional:
    """Uniform quantized conditional over the learner's interior-cell centroids.

    Centroids are midpoints of consecutive interior vertices; with distinct
    continuous observations there are ``stopping_number - 1`` of them, one
    per bounded cell.
    """
    if not learner.quenched:
        raise NotQuenchedError("centroids require a quenched learner")
    v = learner.vertices
    if len(v) < 2:
        raise InsufficientSupportError(
            f"need at least two distinct observations, got {len(v)}")
    return QuantizedConditional.uniform(0.5 * (v[1:] + v[:-1]))


def occupancy_masses(centroids: np.ndarray, sample: np.ndarray) -> np.ndarray:
    """Expected pushforward of a sample through round_to_grid.

    Each value splits its weight between the two bracketing centroids in
    proportion to its offset (clamped at the grid ends); the result is the
    marginal the repair operator actually visits for that sample.
    """
    q = np.asarray(centroids, dtype=float)
    xs = np.asarray(sample, dtype=float)
    if len(xs) == 0:
        raise InsufficientSupportError(
            "occupancy masses need a nonempty sample")
    if len(q) == 1:
        return np.ones(1)
    j = np.searchsorted(q, xs, side="right") - 1
    j = np.clip(j, 0, len(q) - 2)
    p = np.clip((xs - q[j]) / (q[j + 1] - q[j]), 0.0, 1.0)
    p = np.where(xs <= q[0], 0.0, np.where(xs >= q[-1], 1.0, p))
    j = np.where(xs <= q[0], 0, np.where(xs >= q[-1], len(q) - 2, j))
    w = np.zeros(len(q))
    np.add.at(w, j, 1.0 - p)
    np.add.at(w, j + 1, p)
    return w / w.sum()


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative coupling matrix with fixed marginals and its cost."""

    matrix: np.ndarray
    cost: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))

    @property
    def shape(self):
        return self.matrix.shape

    def row_masses(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def col_masses(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def staircase(self):
        """Support entries in row-major order (monotone for this solver):
        arrays (rows, cols, masses)."""
        rows, cols = np.nonzero(self.matrix)
        return rows, cols, self.matrix[rows, cols]


def solve_plan(mu0: QuantizedConditional,
               mu1: QuantizedConditional) -> TransportPlan:
    """Squared-distance optimal coupling of two quantized conditionals.

    Both supports are sorted, so the optimal plan is the monotone
    (north-west-corner) merge of the two mass sequences; cost is
    ``sum (q_i - q_j)^2 pi_ij``, the squared 2-Wasserstein distance.
    """
    w0, w1 = mu0.masses, mu1.masses
    m0, m1 = len(w0), len(w1)
    plan = np.zeros((m0, m1))
    i = j = 0
    supply, demand = w0[0], w1[0]
    while True:
        move = min(supply, demand)
        plan[i, j] += move
        supply -= move
        demand -= move
        if supply <= 1e-16:
            i += 1
            if i == m0:
                break
            supply = w0[i]
        if demand <= 1e-16:
            j += 1
            if j == m1:
                break
            demand = w1[j]
    diff = mu0.centroids[:, None] - mu1.centroids[None, :]
    cost = float(np.sum(diff * diff * plan))
    _check_marginals(plan, w0, w1)
    return TransportPlan(plan, cost)


def _check_marginals(plan, w0, w1):
    if (np.max(np.abs(plan.sum(axis=1) - w0)) > MARGINAL_TOL
            or np.max(np.abs(plan.sum(axis=0) - w1)) > MARGINAL_TOL):
        raise DataValidationError("transport plan marginals drifted")


def _round_indices(xs, q, rng):
    """Vectorized round_to_grid: Bernoulli interpolation between the
    bracketing centroids, clamped to the end centroids outside the grid."""
    xs = np.asarray(xs, dtype=float)
    if len(q) == 1:
        return np.zeros(len(xs), dtype=int)
    j = np.searchsorted(q, xs, side="right") - 1
    j = np.clip(j, 0, len(q) - 2)
    p = np.clip((xs - q[j]) / (q[j + 1] - q[j]), 0.0, 1.0)
    idx = j + (rng.random(len(xs)) < p)
    idx[xs <= q[0]] = 0
    idx[xs >= q[-1]] = len(q) - 1
    return idx


def _round_indices_stratified(xs, q, rng):
    """round_to_grid with exact per-datum marginals and quota-level totals.

    Within each cell, marks at ``U, U+1, ...`` against the cumulative
    Bernoulli probabilities decide which members round up; the systematic
    marks keep each cell's realized occupancy within one unit of its
    expectation.
    """
    xs = np.asarray(xs, dtype=float)
    if len(q) == 1:
        return np.zeros(len(xs), dtype=int)
    j = np.searchsorted(q, xs, side="right") - 1
    j = np.clip(j, 0, len(q) - 2)
    p = np.clip((xs - q[j]) / (q[j + 1] - q[j]), 0.0, 1.0)
    p = np.where(xs <= q[0], 0.0, np.where(xs >= q[-1], 1.0, p))
    j = np.where(xs <= q[0], 0, np.where(xs >= q[-1], len(q) - 2, j))
    up = np.zeros(len(xs), dtype=bool)
    order = np.argsort(j, kind="stable")
    js = j[order]
    starts = np.flatnonzero(np.r_[True, js[1:] != js[:-1]])
    ends = np.r_[starts[1:], len(js)]
    for a, b in zip(starts, ends):
        sel = order[a:b]
        pc = p[sel]
        cum = np.cumsum(pc)
        total = cum[-1]
        if total <= 0:
            continue
        marks = rng.random() + np.arange(int(math.ceil(total)) + 1)
        lo = cum - pc
        pos = np.searchsorted(marks, lo, side="right")
        up[sel] = marks[np.minimum(pos, len(marks) - 1)] <= cum
    return j + up


def round_to_grid(x: float, q: QuantizedConditional, rng) -> int:
    """Round a value onto the centroid grid by a Bernoulli trial.

    Returns the 0-based grid index: the round-down centroid plus a Bernoulli
    draw with success probability proportional to the offset.  Values at or
    beyond the end centroids clamp deterministically.
    """
    return int(_round_indices(np.array([x]), q.centroids, rng)[0])


@dataclass
class GroupRepairer:
    """Conditionals and plan for one state of the unprotected attribute."""

    mu0: QuantizedConditional
    mu1: QuantizedConditional
    plan: TransportPlan

    def __post_init__(self):
        if self.plan.shape != (self.mu0.m, self.mu1.m):
            raise DataValidationError("plan shape must match the conditionals")


@dataclass
class RepairModel:
    """Immutable repair operator: per-u conditionals, plans and weights.

    ``t`` is the geodesic interpolation parameter; the published scheme uses
    the midpoint 0.5 throughout.
    """

    groups: Dict[int, GroupRepairer]
    weights: AttributeWeights
    t: float = 0.5

    def group(self, u: int) -> GroupRepairer:
        try:
            return self.groups[int(u)]
        except KeyError:
            raise UnfittedGroupError(f"no repair fitted for u={u}") from None


def fit_repair_model(dataset: ResearchDataset,
                     learners: Dict[tuple, SubgroupLearner],
                     weights: Optional[AttributeWeights] = None) -> RepairModel:
    """Build the repair operator from four quenched learners.

    Centroid grids come from the learners' partitions; each conditional's
    masses are the expected rounding occupancy of the group's fitted sample,
    so that the plan couples the marginals the repair will actually visit.
    """
    if weights is None:
        weights = empirical_weights(dataset)
    groups = {}
    for u in (0, 1):
        cond = {}
        for s in (0, 1):
            xs = dataset.group(u, s)
            if len(xs) == 0:
                raise InsufficientSupportError(
                    f"group ({u},{s}) has no fitted observations")
            grid = centroids_from_learner(learners[(u, s)])
            masses = occupancy_masses(grid.centroids, xs)
            cond[s] = QuantizedConditional(grid.centroids, masses)
        groups[u] = GroupRepairer(cond[0], cond[1], solve_plan(cond[0], cond[1]))
    return RepairModel(groups=groups, weights=weights)


def repair(model: RepairModel, datum, rng) -> float:
    """Repair a single labelled datum; independent randomness.

    Rounds the feature onto its own group's grid, draws the partner index
    from the plan row (s=0) or column (s=1), and returns the interpolated
    coupled pair ``(1-t) q0 + t q1`` (the midpoint at the default t).
    """
    x, u, s = float(datum[0]), int(datum[1]), int(datum[2])
    g = model.group(u)
    if s == 0:
        j = round_to_grid(x, g.mu0, rng)
        law = g.plan.matrix[j, :]
    else:
        j = round_to_grid(x, g.mu1, rng)
        law = g.plan.matrix[:, j]
    total = law.sum()
    if total <= 0:
        raise DataValidationError("plan slice carries no mass")
    cdf = np.cumsum(law) / total
    partner = int(np.searchsorted(cdf, rng.random(), side="right"))
    j0, j1 = (j, partner) if s == 0 else (partner, j)
    return ((1.0 - model.t) * g.mu0.centroids[j0]
            + model.t * g.mu1.centroids[j1])


def _assign_staircase(rows, cols, masses, src_idx, n_side, rng):
    """Partner indices via one systematic pass over the joint plan law.

    Marks ``(i + U)/n`` over the staircase give pair draws whose prefix
    counts are quota-exact; the t-th datum in source order takes the t-th
    pair's partner.  When a pair's source index strays more than one step
    from the datum's own (only possible for badly unbalanced batches), the
    partner is redrawn from the datum's own conditional law.
    """
    cdf = np.cumsum(masses)
    cdf /= cdf[-1]
    marks = (rng.random() + np.arange(n_side)) / n_side
    entry = np.searchsorted(cdf, marks, side="right")
    pair_rows = rows[entry]
    pair_cols = cols[entry]
    # row-major order with random arrangement inside each row, so every
    # member of a row is equally likely to take any of the row's draws
    perm = rng.permutation(n_side)
    order = perm[np.argsort(src_idx[perm], kind="stable")]
    own_rows = src_idx[order]
    partner = pair_cols.copy()
    diverged = np.flatnonzero(np.abs(pair_rows - own_rows) > 1)
    for t in diverged:
        r = own_rows[t]
        seg = np.flatnonzero(rows == r)
        law = masses[seg]
        c = np.cumsum(law)
        c /= c[-1]
        partner[t] = cols[seg[np.searchsorted(c, rng.random(), side="right")]]
    out = np.empty(n_side, dtype=int)
    out[order] = partner
    return out


def repair_batch(model: RepairModel, data, rng,
                 strategy: str = "independent") -> np.ndarray:
    """Repair labelled rows; returns the ``(n, 3)`` array with x replaced.

    ``strategy="independent"`` repairs each datum with its own randomness.
    ``strategy="stratified"`` preserves every datum's marginal repair law but
    realizes the rounding and partner draws with systematic (quota-exact)
    streams, so a batch's repaired empirical law tracks the plan law as
    closely as the sample sizes allow.
    """
    if strategy not in ("independent", "stratified"):
        raise DataValidationError(f"unknown strategy {strategy!r}")
    arr = validate_labelled(data)
    out = arr.copy()
    for u in (0, 1):
        for s in (0, 1):
            mask = (arr[:, 1] == u) & (arr[:, 2] == s)
            if not mask.any():
                continue
            g = model.group(u)
            xs = arr[mask, 0]
            own = g.mu0 if s == 0 else g.mu1
            if strategy == "independent":
                src = _round_indices(xs, own.centroids, rng)
                dst = _partner_independent(g.plan, s, src, rng)
            else:
                src = _round_indices_stratified(xs, own.centroids, rng)
                dst = _partner_stratified(g.plan, s, src, rng)
            j0, j1 = (src, dst) if s == 0 else (dst, src)
            out[mask, 0] = ((1.0 - model.t) * g.mu0.centroids[j0]
                            + model.t * g.mu1.centroids[j1])
    return out


def _partner_independent(plan, s, src_idx, rng):
    rows = plan.matrix if s == 0 else plan.matrix.T
    dst = np.empty(len(src_idx), dtype=int)
    for r in np.unique(src_idx):
        sel = np.flatnonzero(src_idx == r)
        law = rows[r]
        total = law.sum()
        if total <= 0:
            raise DataValidationError("plan slice carries no mass")
        cdf = np.cumsum(law) / total
        dst[sel] = np.searchsorted(cdf, rng.random(len(sel)), side="right")
    return dst


def _partner_stratified(plan, s, src_idx, rng):
    rows, cols, masses = plan.staircase()
    if s == 1:
        order = np.lexsort((rows, cols))
        rows, cols = cols[order], rows[order]
        masses = masses[order]
    return _assign_staircase(rows, cols, masses, src_idx, len(src_idx), rng)
