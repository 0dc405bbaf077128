"""Scikit-learn style estimators wrapping the repair pipeline.

``X`` is an ``(n, 3)`` array of ``(x, u, s)`` rows.  ``fit`` learns the
group distributions and the transport plans; ``transform`` returns the rows
with the feature column repaired.  Both estimators follow the
``BaseEstimator`` parameter conventions so they clone and grid-search
cleanly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data import (GROUP_KEYS, empirical_weights, segment,
                   validate_labelled)
from .errors import NonConvergenceError
from .geometric import fit_geometric, repair_geometric_batch
from .stopping import PriorSpec, SubgroupLearner
from .transport import fit_repair_model, repair_batch

PRIOR_PADDING = 0.05


def _auto_range(x):
    lo, hi = float(np.min(x)), float(np.max(x))
    span = hi - lo
    pad = PRIOR_PADDING * span if span > 0 else max(abs(lo), 1.0)
    return lo - pad, hi + pad


class DistributionRepairer(BaseEstimator, TransformerMixin):
    """Learn group distributions to their stopping numbers, then repair.

    Parameters mirror the learner configuration: ``epsilon`` (stopping
    threshold), ``nu0`` (prior weight), ``window``/``k_min`` (smoothing),
    ``resolution`` (observation grid width; required above zero for features
    that never repeat), the prior family, and the batch repair ``strategy``.
    """

    def __init__(self, epsilon=0.01, nu0=0.001, window=10, k_min=10,
                 resolution=0.0, prior="uniform", prior_lo=None, prior_hi=None,
                 prior_mean=0.0, prior_sd=1.0, strategy="stratified",
                 random_state=None):
        self.epsilon = epsilon
        self.nu0 = nu0
        self.window = window
        self.k_min = k_min
        self.resolution = resolution
        self.prior = prior
        self.prior_lo = prior_lo
        self.prior_hi = prior_hi
        self.prior_mean = prior_mean
        self.prior_sd = prior_sd
        self.strategy = strategy
        self.random_state = random_state

    def _prior_spec(self, x):
        if self.prior == "gaussian":
            return PriorSpec.gaussian(self.prior_mean, self.prior_sd,
                                      nu0=self.nu0)
        if self.prior_lo is None or self.prior_hi is None:
            lo, hi = _auto_range(x)
        else:
            lo, hi = self.prior_lo, self.prior_hi
        return PriorSpec.uniform(lo, hi, nu0=self.nu0)

    def fit(self, X, y=None):
        arr = validate_labelled(X)
        dataset = segment(arr)
        prior = self._prior_spec(arr[:, 0])
        learners = {}
        absorbed = {}
        for key in GROUP_KEYS:
            learner = SubgroupLearner(prior, epsilon=self.epsilon,
                                      window=self.window, k_min=self.k_min,
                                      resolution=self.resolution)
            xs = dataset.group(*key)
            used = learner.absorb_until_quenched(xs)
            if not learner.quenched:
                raise NonConvergenceError(
                    f"group {key} exhausted its {len(xs)} observations before "
                    f"stopping (smoothed divergence "
                    f"{learner.smoothed_kld:.4g} >= {self.epsilon})")
            learners[key] = learner
            absorbed[key] = used
        self.learners_ = learners
        self.stopping_numbers_ = {k: l.stopping_number()
                                  for k, l in learners.items()}
        self.model_ = fit_repair_model(dataset, learners,
                                       weights=empirical_weights(dataset))
        return self

    def transform(self, X):
        """Repair rows with the fitted operator.

        A fresh generator is seeded from ``random_state`` on every call, so
        repeated transforms of the same data are identical; leave it None
        for independent randomness per call.
        """
        if not hasattr(self, "model_"):
            raise NotFittedError("fit must be called before transform")
        rng = np.random.default_rng(self.random_state)
        return repair_batch(self.model_, X, rng, strategy=self.strategy)


class QuantileRepairer(BaseEstimator, TransformerMixin):
    """Rank-matching quantile repair; in-sample transform only."""

    def __init__(self):
        pass

    def fit(self, X, y=None):
        self.model_ = fit_geometric(segment(X))
        return self

    def transform(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("fit must be called before transform")
        return repair_geometric_batch(self.model_, X)
