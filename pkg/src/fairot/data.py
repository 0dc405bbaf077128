"""Labelled observations, attribute-group segmentation and group weights.

A labelled datum is a triple ``(x, u, s)``: a scalar feature, a binary
unprotected attribute and a binary protected attribute.  Datasets are kept
segmented by the four ``(u, s)`` groups throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy as np

from .errors import DataValidationError, UndefinedWeightsError

GROUP_KEYS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


class LabelledDatum(NamedTuple):
    """One observation: feature ``x`` with attribute labels ``u`` and ``s``."""

    x: float
    u: int
    s: int


class GroupKey(NamedTuple):
    """Index of one of the four attribute groups."""

    u: int
    s: int


def validate_labelled(data) -> np.ndarray:
    """Coerce labelled data to a float ``(n, 3)`` array and validate it.

    Accepts an ``(n, 3)`` array-like of ``(x, u, s)`` rows or an iterable of
    triples.  Raises :class:`DataValidationError` naming the first offending
    row when a feature is non-finite or an attribute is outside ``{0, 1}``.
    """
    arr = np.asarray(list(data) if not isinstance(data, np.ndarray) else data,
                     dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DataValidationError(
            f"labelled data must have shape (n, 3), got {arr.shape}")
    bad = np.flatnonzero(~np.isfinite(arr[:, 0]))
    if bad.size:
        raise DataValidationError(
            f"non-finite feature at row {bad[0]}: {arr[bad[0], 0]!r}")
    for col, name in ((1, "u"), (2, "s")):
        vals = arr[:, col]
        bad = np.flatnonzero(~np.isin(vals, (0.0, 1.0)))
        if bad.size:
            raise DataValidationError(
                f"attribute {name} must be 0 or 1, got {vals[bad[0]]!r} "
                f"at row {bad[0]}")
    return arr


@dataclass(frozen=True)
class AttributeWeights:
    """Group probabilities ``p[(u, s)]`` with derived conditionals."""

    p: dict

    def __post_init__(self):
        total = math.fsum(self.p.get(k, 0.0) for k in GROUP_KEYS)
        if any(self.p.get(k, 0.0) < 0 for k in GROUP_KEYS):
            raise DataValidationError("group weights must be nonnegative")
        if abs(total - 1.0) > 1e-12:
            raise DataValidationError(
                f"group weights must sum to 1, got {total!r}")

    def pr_u(self, u: int) -> float:
        return self.p[(u, 0)] + self.p[(u, 1)]

    def pr_s_given_u(self, s: int, u: int) -> float:
        """Conditional ``Pr[s | u]``; NaN when ``Pr[u]`` is zero."""
        pu = self.pr_u(u)
        if pu <= 0.0:
            return float("nan")
        return self.p[(u, s)] / pu

    @property
    def undefined_u(self) -> tuple:
        """States of ``u`` whose conditionals are undefined."""
        return tuple(u for u in (0, 1) if self.pr_u(u) <= 0.0)

    def as_dict(self) -> dict:
        return {f"{u},{s}": self.p[(u, s)] for u, s in GROUP_KEYS}

    @classmethod
    def from_probs(cls, p00, p01, p10, p11) -> "AttributeWeights":
        return cls({(0, 0): p00, (0, 1): p01, (1, 0): p10, (1, 1): p11})


@dataclass
class ResearchDataset:
    """Features segmented by attribute group, in arrival order."""

    groups: dict = field(default_factory=dict)

    def __post_init__(self):
        full = {k: np.asarray(self.groups.get(k, ()), dtype=float)
                for k in GROUP_KEYS}
        self.groups = full

    @property
    def counts(self) -> dict:
        return {k: len(v) for k, v in self.groups.items()}

    @property
    def n(self) -> int:
        return sum(len(v) for v in self.groups.values())

    def group(self, u: int, s: int) -> np.ndarray:
        return self.groups[(u, s)]

    def to_array(self) -> np.ndarray:
        """Flatten back to ``(n, 3)`` rows, group blocks in key order."""
        blocks = [np.column_stack((v, np.full(len(v), u), np.full(len(v), s)))
                  for (u, s), v in self.groups.items() if len(v)]
        if not blocks:
            return np.empty((0, 3))
        return np.concatenate(blocks, axis=0)

    def merged(self, other: "ResearchDataset") -> "ResearchDataset":
        return ResearchDataset({
            k: np.concatenate((self.groups[k], other.groups[k]))
            for k in GROUP_KEYS})


def segment(data) -> ResearchDataset:
    """Split labelled data into the four attribute groups.

    Arrival order is preserved within each group.  Invalid rows are rejected
    with the index of the offending record.
    """
    arr = validate_labelled(data)
    groups = {}
    for u, s in GROUP_KEYS:
        mask = (arr[:, 1] == u) & (arr[:, 2] == s)
        groups[(u, s)] = arr[mask, 0].copy()
    return ResearchDataset(groups)


def empirical_weights(dataset: ResearchDataset) -> AttributeWeights:
    """Group frequencies ``n_{u,s} / n`` of a nonempty dataset."""
    n = dataset.n
    if n == 0:
        raise UndefinedWeightsError("weights are undefined for an empty dataset")
    return AttributeWeights({k: len(v) / n for k, v in dataset.groups.items()})


def has_representation_bias(key, weights: AttributeWeights, n: int,
                            stopping_number: int) -> bool:
    """Whether group ``key``'s expected share of ``n`` draws falls short of
    the sample size needed to learn its distribution.

    True iff ``p_{u,s} * n < stopping_number``; equality is not bias.
    """
    if n < 1 or stopping_number < 1:
        raise DataValidationError("n and stopping_number must be >= 1")
    u, s = key
    return weights.p[(u, s)] * n < stopping_number
