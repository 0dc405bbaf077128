"""Sequential Dirichlet-process learning of one group's feature distribution.

Each learner maintains a partition of the real line whose interior vertices
are the distinct observed values, together with the Dirichlet parameters the
process posterior induces on that partition: for a cell ``C``,

    alpha(C) = nu_0 * F0(C) + #observations in C.

Cells follow the half-open convention ``[v_j, v_{j+1})``: every observation's
unit atom sits in the cell whose left endpoint is its value, so each bounded
interior cell carries the atoms of exactly one observed value.  When a new
value splits a cell, the prior mass divides between the halves according to
``F0`` and the accumulated atoms stay with the left half (they sit at its
left endpoint); this is the projection of the process posterior onto the
refined partition.

Learning stops ("quenches") when a trailing mean of the step-to-step
Dirichlet divergences falls below a threshold.  For streams with repeated
values the divergence decays as cell masses grow.  A stream of all-distinct
values keeps opening fresh low-mass cells and the raw divergence sequence
never decays, so continuous features should be snapped to a finite
``resolution`` grid (the ``resolution`` parameter; 0 disables snapping).
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import digamma, gammaln

from .errors import (ConfigError, DataValidationError, NotQuenchedError,
                     QuenchedError)

ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class PriorSpec:
    """Prior expected distribution F0 plus its degrees of freedom nu_0.

    ``kind`` is ``"uniform"`` (bounded support ``[lo, hi]``) or
    ``"gaussian"`` (``mean``, ``sd``).
    """

    kind: str
    lo: float = 0.0
    hi: float = 1.0
    mean: float = 0.0
    sd: float = 1.0
    nu0: float = 0.001

    def __post_init__(self):
        if self.nu0 <= 0:
            raise ConfigError(f"nu0 must be positive, got {self.nu0!r}")
        if self.kind == "uniform":
            if not self.lo < self.hi:
                raise ConfigError(
                    f"uniform prior needs lo < hi, got [{self.lo}, {self.hi}]")
        elif self.kind == "gaussian":
            if self.sd <= 0:
                raise ConfigError(f"gaussian prior needs sd > 0, got {self.sd}")
        else:
            raise ConfigError(f"unknown prior kind {self.kind!r}")

    def cdf(self, x: float) -> float:
        if x == -math.inf:
            return 0.0
        if x == math.inf:
            return 1.0
        if self.kind == "uniform":
            if x <= self.lo:
                return 0.0
            if x >= self.hi:
                return 1.0
            return (x - self.lo) / (self.hi - self.lo)
        z = (x - self.mean) / (self.sd * math.sqrt(2.0))
        return 0.5 * (1.0 + math.erf(z))

    def mass(self, a: float, b: float) -> float:
        """F0-probability of the interval [a, b)."""
        if a > b:
            raise DataValidationError(f"interval bounds out of order: {a} > {b}")
        return max(self.cdf(b) - self.cdf(a), 0.0)

    @classmethod
    def uniform(cls, lo, hi, nu0=0.001):
        return cls(kind="uniform", lo=lo, hi=hi, nu0=nu0)

    @classmethod
    def gaussian(cls, mean, sd, nu0=0.001):
        return cls(kind="gaussian", mean=mean, sd=sd, nu0=nu0)


def prior_mass(prior: PriorSpec, a: float, b: float) -> float:
    """F0-probability that the prior assigns to ``[a, b)``."""
    return prior.mass(a, b)


@dataclass(frozen=True)
class VertexPartition:
    """Strictly increasing interior vertices; end vertices are +-infinity."""

    vertices: tuple

    def __post_init__(self):
        v = self.vertices
        if any(v[i] >= v[i + 1] for i in range(len(v) - 1)):
            raise DataValidationError("vertices must be strictly increasing")

    @property
    def n_cells(self) -> int:
        return len(self.vertices) + 1

    def cell_bounds(self, j: int):
        """Bounds of cell ``j``: ``[v_{j-1}, v_j)`` with infinite ends."""
        v = self.vertices
        left = v[j - 1] if j > 0 else -math.inf
        right = v[j] if j < len(v) else math.inf
        return left, right

    def locate(self, x: float) -> int:
        """Index of the cell containing ``x`` (half-open convention)."""
        return bisect.bisect_right(self.vertices, x)

    def refines_by_one(self, finer: "VertexPartition") -> Optional[float]:
        """The single vertex ``finer`` adds to this partition, or None if
        the partitions are identical.  Raises otherwise."""
        a, b = self.vertices, finer.vertices
        if a == b:
            return None
        if len(b) != len(a) + 1:
            raise DataValidationError(
                "partition must refine the previous one by at most one vertex")
        extra = set(b) - set(a)
        if len(extra) != 1:
            raise DataValidationError("partitions differ by more than one vertex")
        return next(iter(extra))


@dataclass(frozen=True)
class DirichletState:
    """Dirichlet parameters induced on a partition, with the prior weight."""

    partition: VertexPartition
    alphas: np.ndarray
    nu0: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=float))
        if len(self.alphas) != self.partition.n_cells:
            raise DataValidationError("one alpha per cell required")
        if np.any(self.alphas < ALPHA_FLOOR * (1 - 1e-9)):
            raise DataValidationError("alphas must respect the positivity floor")

    @property
    def nu(self) -> float:
        return float(np.sum(self.alphas))


def dirichlet_kld(a, b) -> float:
    """Closed-form KL divergence between Dirichlet distributions.

    ``KL(Dir(a) || Dir(b))`` for parameter vectors over a common partition::

        ln G(a0) - sum ln G(a_j) - ln G(b0) + sum ln G(b_j)
          + sum (a_j - b_j) (psi(a_j) - psi(a0))

    with ``a0 = sum a_j``, ``b0 = sum b_j``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DataValidationError("parameter vectors must share a partition")
    a0 = a.sum()
    b0 = b.sum()
    val = (gammaln(a0) - np.sum(gammaln(a)) - gammaln(b0) + np.sum(gammaln(b))
           + np.sum((a - b) * (digamma(a) - digamma(a0))))
    return float(max(val, 0.0))


def refine_state(prior: PriorSpec, state: DirichletState,
                 finer: VertexPartition) -> DirichletState:
    """Project a Dirichlet state onto a partition finer by one vertex.

    The split cell's prior mass divides according to F0; the accumulated
    observation atoms sit at the cell's left endpoint and stay with the left
    half.  Summing the two children recovers the parent exactly.
    """
    x = state.partition.refines_by_one(finer)
    if x is None:
        return DirichletState(finer, state.alphas.copy(), state.nu0)
    j = state.partition.locate(x)
    left, right = state.partition.cell_bounds(j)
    parent = state.alphas[j]
    right_alpha = max(state.nu0 * prior.mass(x, right), ALPHA_FLOOR)
    left_alpha = max(parent - right_alpha, ALPHA_FLOOR)
    alphas = np.empty(len(state.alphas) + 1)
    alphas[:j] = state.alphas[:j]
    alphas[j] = left_alpha
    alphas[j + 1] = right_alpha
    alphas[j + 2:] = state.alphas[j + 1:]
    return DirichletState(finer, alphas, state.nu0)


def kld_step(prior: PriorSpec, prev: DirichletState,
             curr: DirichletState) -> float:
    """Divergence of the current posterior from the previous one.

    The previous state is first projected onto the current (finer) partition,
    then the closed-form Dirichlet divergence is evaluated with the current
    parameters first.
    """
    refined = refine_state(prior, prev, curr.partition)
    return dirichlet_kld(curr.alphas, refined.alphas)


class SubgroupLearner:
    """Sequential learner for one attribute group with a KLD stopping rule.

    Parameters
    ----------
    prior : PriorSpec
        Prior expected distribution and degrees of freedom.
    epsilon : float
        Stopping threshold for the smoothed divergence sequence.
    window : int
        Length of the trailing mean applied to the divergence sequence.
    k_min : int
        Minimum number of observations before stopping may trigger.
    resolution : float
        Optional grid width; observations are snapped to multiples of it
        before entering the partition.  0 keeps raw values.
    """

    def __init__(self, prior: PriorSpec, epsilon: float = 0.01,
                 window: int = 10, k_min: int = 10, resolution: float = 0.0):
        if epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {epsilon!r}")
        if window < 1:
            raise ConfigError(f"window must be >= 1, got {window!r}")
        if k_min < 2:
            raise ConfigError(f"k_min must be >= 2, got {k_min!r}")
        if resolution < 0:
            raise ConfigError(f"resolution must be >= 0, got {resolution!r}")
        self.prior = prior
        self.epsilon = float(epsilon)
        self.window = int(window)
        self.k_min = int(k_min)
        self.resolution = float(resolution)
        self._vertices = []          # sorted distinct snapped values
        self._atoms = [0]            # observation count per cell
        self.k = 0
        self.kld_history = []
        self._window_sum = 0.0
        self.smoothed_kld = math.inf
        self.quenched = False
        self._warned_zero_prior = False

    # -- state views ------------------------------------------------------

    @property
    def vertices(self) -> np.ndarray:
        return np.asarray(self._vertices, dtype=float)

    @property
    def atom_counts(self) -> np.ndarray:
        return np.asarray(self._atoms, dtype=float)

    @property
    def partition(self) -> VertexPartition:
        return VertexPartition(tuple(self._vertices))

    def cell_alpha(self, j: int) -> float:
        left = self._vertices[j - 1] if j > 0 else -math.inf
        right = self._vertices[j] if j < len(self._vertices) else math.inf
        a = self.prior.nu0 * self.prior.mass(left, right) + self._atoms[j]
        return max(a, ALPHA_FLOOR)

    def dirichlet_state(self) -> DirichletState:
        alphas = np.array([self.cell_alpha(j) for j in range(len(self._atoms))])
        return DirichletState(self.partition, alphas, self.prior.nu0)

    @property
    def nu(self) -> float:
        return self.prior.nu0 + self.k

    def snap(self, x: float) -> float:
        if self.resolution > 0:
            return round(x / self.resolution) * self.resolution
        return float(x)

    # -- learning ----------------------------------------------------------

    def absorb(self, x: float) -> bool:
        """Absorb one observation; returns True once the learner quenches.

        Splits the containing cell at a new value (prior mass divides by F0,
        atoms stay with the left half) and adds the unit atom to the cell
        whose left endpoint is the value.  Appends the step divergence from
        the second observation onward and quenches when the trailing mean
        drops below ``epsilon`` with at least ``k_min`` observations seen.

        Stopping also requires at least two distinct observed values: a
        trivial partition means nothing about the distribution's shape has
        been learned yet (heavily zero-inflated features would otherwise
        stop before their first nonzero arrival), and downstream
        quantization needs an interior cell.
        """
        if self.quenched:
            raise QuenchedError("learner already quenched; refusing observation")
        if not math.isfinite(x):
            raise DataValidationError(f"non-finite observation: {x!r}")
        x = self.snap(x)
        self.k += 1
        nu_prev = self.prior.nu0 + self.k - 1
        j = bisect.bisect_right(self._vertices, x)
        if j > 0 and self._vertices[j - 1] == x:
            atom_cell = j
        else:
            if (self.prior.kind == "uniform"
                    and not (self.prior.lo <= x <= self.prior.hi)
                    and not self._warned_zero_prior):
                warnings.warn(
                    "observation outside the uniform prior support; cell "
                    "parameters are clamped at the positivity floor",
                    RuntimeWarning, stacklevel=2)
                self._warned_zero_prior = True
            self._vertices.insert(j, x)
            self._atoms.insert(j + 1, 0)
            atom_cell = j + 1
        pre_atom_alpha = self.cell_alpha(atom_cell)
        self._atoms[atom_cell] += 1
        if self.k >= 2:
            # closed-form divergence for "same state plus one atom"; equals
            # kld_step on the full refined states
            b = max(pre_atom_alpha, ALPHA_FLOOR)
            kld = (math.log(nu_prev) - math.log(b)
                   + float(digamma(b + 1.0)) - float(digamma(nu_prev + 1.0)))
            kld = max(kld, 0.0)
            self.kld_history.append(kld)
            self._window_sum += kld
            if len(self.kld_history) > self.window:
                self._window_sum -= self.kld_history[-self.window - 1]
            m = min(self.window, len(self.kld_history))
            self.smoothed_kld = self._window_sum / m
            if (self.k >= self.k_min and len(self._vertices) >= 2
                    and self.smoothed_kld < self.epsilon):
                self.quenched = True
        return self.quenched

    def absorb_until_quenched(self, xs: Sequence[float]) -> int:
        """Absorb from ``xs`` until quenched; returns observations used."""
        used = 0
        for x in xs:
            used += 1
            if self.absorb(x):
                break
        return used

    def stopping_number(self) -> int:
        """Observation count at quench time."""
        if not self.quenched:
            raise NotQuenchedError(
                f"learner has not stopped (k={self.k}, "
                f"smoothed={self.smoothed_kld:.4g}, eps={self.epsilon})")
        return self.k

    def posterior_mean_cdf(self, x: float) -> float:
        """Posterior expected CDF: prior-empirical mixture at weight k/(nu0+k)."""
        a_k = self.k / (self.prior.nu0 + self.k)
        if self.k == 0:
            return self.prior.cdf(x)
        idx = bisect.bisect_right(self._vertices, x)
        emp = sum(self._atoms[1:idx + 1]) / self.k
        return (1.0 - a_k) * self.prior.cdf(x) + a_k * emp


def init_learner(prior: PriorSpec, epsilon: float = 0.01, window: int = 10,
                 k_min: int = 10, resolution: float = 0.0) -> SubgroupLearner:
    """Fresh learner over the whole real line (one cell of mass nu_0)."""
    return SubgroupLearner(prior, epsilon=epsilon, window=window, k_min=k_min,
                           resolution=resolution)
