"""Seeded generators for the simulation studies.

Covers Gaussian-mixture feature laws, grid-quantized categorical laws with a
Gaussian reference measure, and full labelled mixture models over the four
attribute groups.  All draws go through an explicit ``numpy.random.Generator``
so every experiment is reproducible from its seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, Union

import numpy as np
from scipy.stats import norm

from .data import GROUP_KEYS, AttributeWeights, ResearchDataset
from .errors import ConfigError, NonConvergenceError
from .stopping import SubgroupLearner

DEFAULT_DRAW_CAP = 10_000_000


@dataclass(frozen=True)
class GmmSpec:
    """Gaussian mixture: component weights, means, standard deviations."""

    weights: tuple
    means: tuple
    sds: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0):
            raise ConfigError("component weights must form a simplex")
        if len(self.means) != len(w) or len(self.sds) != len(w):
            raise ConfigError("component arrays must share a length")
        if any(sd <= 0 for sd in self.sds):
            raise ConfigError("component standard deviations must be positive")

    def sample(self, n: int, rng) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=n, p=self.weights)
        return rng.normal(np.asarray(self.means)[comp],
                          np.asarray(self.sds)[comp])

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    @property
    def variance(self) -> float:
        w = np.asarray(self.weights)
        m = np.asarray(self.means)
        sd = np.asarray(self.sds)
        return float(np.dot(w, sd ** 2 + m ** 2) - self.mean ** 2)

    @classmethod
    def gaussian(cls, mean: float, sd: float) -> "GmmSpec":
        return cls((1.0,), (float(mean),), (float(sd),))


@dataclass(frozen=True)
class CategoricalSpec:
    """q-state law on an even grid, masses from a reference CDF.

    The support grid has ``q + 1`` points over ``[lo, hi]``; states are the
    first ``q`` of them and each state's probability is the (normalized)
    reference-measure mass of the interval it opens.
    """

    q: int
    lo: float = -5.0
    hi: float = 5.0
    ref_mean: float = 0.0
    ref_sd: float = 1.0

    def __post_init__(self):
        if self.q < 2:
            raise ConfigError(f"need at least 2 states, got {self.q}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.q + 1)

    @property
    def states(self) -> np.ndarray:
        return self.grid[:-1]

    @property
    def probs(self) -> np.ndarray:
        p = np.diff(norm.cdf(self.grid, self.ref_mean, self.ref_sd))
        return p / p.sum()

    def sample(self, n: int, rng) -> np.ndarray:
        return rng.choice(self.states, size=n, p=self.probs)


FeatureLaw = Union[GmmSpec, CategoricalSpec]


@dataclass(frozen=True)
class MixtureModelSpec:
    """Four group-conditional feature laws plus the attribute weights."""

    weights: AttributeWeights
    conditionals: Dict[tuple, FeatureLaw]

    def __post_init__(self):
        missing = [k for k in GROUP_KEYS if k not in self.conditionals]
        if missing:
            raise ConfigError(f"missing conditionals for groups {missing}")


def sample_labelled(spec: MixtureModelSpec, n: int, rng) -> np.ndarray:
    """``n`` iid labelled rows: attributes first, then the conditional draw."""
    if n == 0:
        return np.empty((0, 3))
    probs = np.array([spec.weights.p[k] for k in GROUP_KEYS])
    which = rng.choice(len(GROUP_KEYS), size=n, p=probs)
    out = np.empty((n, 3))
    for gi, key in enumerate(GROUP_KEYS):
        mask = which == gi
        cnt = int(mask.sum())
        if cnt:
            out[mask, 0] = spec.conditionals[key].sample(cnt, rng)
        out[mask, 1] = key[0]
        out[mask, 2] = key[1]
    return out


def sample_until_quenched(spec: MixtureModelSpec,
                          learners: Dict[tuple, SubgroupLearner], rng,
                          draw_cap: int = DEFAULT_DRAW_CAP,
                          chunk: int = 4096):
    """Stream labelled draws into the four learners until all quench.

    Draws for an already-quenched group are discarded (counted, not stored).
    Returns ``(dataset, stopping_numbers, info)`` where the dataset holds each
    group's absorbed prefix, in arrival order.
    """
    groups = {k: [] for k in GROUP_KEYS}
    discarded = {k: 0 for k in GROUP_KEYS}
    draws = 0
    while not all(l.quenched for l in learners.values()):
        if draws >= draw_cap:
            diag = {f"{k}": {"k": l.k, "smoothed_kld": l.smoothed_kld,
                             "quenched": l.quenched}
                    for k, l in learners.items()}
            raise NonConvergenceError(
                f"stopping rule did not trigger within {draw_cap} draws",
                diagnostics=diag)
        batch = sample_labelled(spec, min(chunk, draw_cap - draws), rng)
        for x, u, s in batch:
            draws += 1
            key = (int(u), int(s))
            learner = learners[key]
            if learner.quenched:
                discarded[key] += 1
                continue
            groups[key].append(x)
            learner.absorb(x)
            if all(l.quenched for l in learners.values()):
                break
    dataset = ResearchDataset({k: np.asarray(v) for k, v in groups.items()})
    stopping = {k: l.stopping_number() for k, l in learners.items()}
    info = {"draws": draws, "discarded": discarded}
    return dataset, stopping, info


def mixture_to_doc(spec: MixtureModelSpec) -> dict:
    """JSON-ready description of a mixture model (for config documents)."""
    conds = {}
    for (u, s), law in spec.conditionals.items():
        if isinstance(law, GmmSpec):
            conds[f"{u},{s}"] = {"kind": "gmm", "weights": list(law.weights),
                                 "means": list(law.means),
                                 "sds": list(law.sds)}
        else:
            conds[f"{u},{s}"] = {"kind": "categorical", "q": law.q,
                                 "lo": law.lo, "hi": law.hi,
                                 "ref_mean": law.ref_mean,
                                 "ref_sd": law.ref_sd}
    return {"weights": spec.weights.as_dict(), "conditionals": conds}


def mixture_from_doc(doc: dict) -> MixtureModelSpec:
    """Inverse of :func:`mixture_to_doc`."""
    try:
        weights = AttributeWeights(
            {tuple(map(int, k.split(","))): float(v)
             for k, v in doc["weights"].items()})
        conds = {}
        for key, law in doc["conditionals"].items():
            uk = tuple(map(int, key.split(",")))
            if law["kind"] == "gmm":
                conds[uk] = GmmSpec(tuple(law["weights"]), tuple(law["means"]),
                                    tuple(law["sds"]))
            elif law["kind"] == "categorical":
                conds[uk] = CategoricalSpec(
                    q=int(law["q"]), lo=law.get("lo", -5.0),
                    hi=law.get("hi", 5.0), ref_mean=law.get("ref_mean", 0.0),
                    ref_sd=law.get("ref_sd", 1.0))
            else:
                raise ConfigError(f"unknown conditional kind {law['kind']!r}")
        return MixtureModelSpec(weights=weights, conditionals=conds)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed mixture document: {exc}") from exc


def biased_sample(spec: MixtureModelSpec, stopping_numbers: Dict[tuple, int],
                  rng) -> ResearchDataset:
    """Comparison dataset of equal total size but biased composition.

    Group counts are ``round(p_{u,s} * total)`` with the spec's own weights,
    mimicking a collection process without the stopping rule.
    """
    total = sum(stopping_numbers.values())
    groups = {}
    for key in GROUP_KEYS:
        cnt = int(round(spec.weights.p[key] * total))
        if cnt == 0:
            warnings.warn(
                f"biased sample leaves group {key} empty; downstream fits "
                "on it will fail", RuntimeWarning, stacklevel=2)
        groups[key] = spec.conditionals[key].sample(cnt, rng)
    return ResearchDataset(groups)
