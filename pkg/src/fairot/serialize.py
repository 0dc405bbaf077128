"""Versioned JSON snapshots for learners and repair models.

Documents are plain field-named JSON with a ``format`` tag and a schema
``version``; floats round-trip exactly through ``repr``.  Serialization is
deterministic (sorted keys, fixed separators) so identical state yields
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .data import AttributeWeights
from .errors import SchemaError
from .geometric import QuantileRepairModel
from .stopping import PriorSpec, SubgroupLearner
from .transport import (GroupRepairer, QuantizedConditional, RepairModel,
                        TransportPlan)

LEARNER_FORMAT = "fairot/learner"
MODEL_FORMAT = "fairot/repair-model"
QUANTILE_FORMAT = "fairot/quantile-model"
VERSION = 1


def write_labelled_csv(path, arr, repaired=None) -> None:
    """Write labelled rows as CSV (header x,u,s; optional x_repaired)."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if repaired is None:
            writer.writerow(["x", "u", "s"])
            for x, u, s in arr:
                writer.writerow([repr(float(x)), int(u), int(s)])
        else:
            writer.writerow(["x", "u", "s", "x_repaired"])
            for (x, u, s), r in zip(arr, repaired):
                writer.writerow([repr(float(x)), int(u), int(s),
                                 repr(float(r))])


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def config_hash(doc) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def save_json(doc, path) -> None:
    Path(path).write_text(canonical_json(doc), encoding="utf-8")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _expect(doc, fmt):
    if doc.get("format") != fmt:
        raise SchemaError(f"expected a {fmt} document, got {doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise SchemaError(f"unsupported {fmt} version {doc.get('version')!r}")


def _prior_doc(prior: PriorSpec) -> dict:
    return {"kind": prior.kind, "lo": prior.lo, "hi": prior.hi,
            "mean": prior.mean, "sd": prior.sd, "nu0": prior.nu0}


def _prior_from(doc) -> PriorSpec:
    return PriorSpec(kind=doc["kind"], lo=doc["lo"], hi=doc["hi"],
                     mean=doc["mean"], sd=doc["sd"], nu0=doc["nu0"])


def learner_to_doc(learner: SubgroupLearner) -> dict:
    return {
        "format": LEARNER_FORMAT,
        "version": VERSION,
        "prior": _prior_doc(learner.prior),
        "epsilon": learner.epsilon,
        "window": learner.window,
        "k_min": learner.k_min,
        "resolution": learner.resolution,
        "vertices": list(map(float, learner.vertices)),
        "atom_counts": list(map(int, learner.atom_counts)),
        "absorbed": learner.k,
        "kld_history": list(map(float, learner.kld_history)),
        "quenched": learner.quenched,
    }


def learner_from_doc(doc) -> SubgroupLearner:
    _expect(doc, LEARNER_FORMAT)
    learner = SubgroupLearner(_prior_from(doc["prior"]), epsilon=doc["epsilon"],
                              window=doc["window"], k_min=doc["k_min"],
                              resolution=doc["resolution"])
    learner._vertices = list(map(float, doc["vertices"]))
    learner._atoms = list(map(int, doc["atom_counts"]))
    learner.k = int(doc["absorbed"])
    learner.kld_history = list(map(float, doc["kld_history"]))
    tail = learner.kld_history[-learner.window:]
    learner._window_sum = float(sum(tail))
    learner.smoothed_kld = (learner._window_sum / len(tail)) if tail else float("inf")
    learner.quenched = bool(doc["quenched"])
    return learner


def model_to_doc(model: RepairModel, meta=None) -> dict:
    groups = {}
    for u, g in model.groups.items():
        groups[str(u)] = {
            "centroids_s0": list(map(float, g.mu0.centroids)),
            "masses_s0": list(map(float, g.mu0.masses)),
            "centroids_s1": list(map(float, g.mu1.centroids)),
            "masses_s1": list(map(float, g.mu1.masses)),
            "plan": [list(map(float, row)) for row in g.plan.matrix],
            "cost": g.plan.cost,
        }
    return {
        "format": MODEL_FORMAT,
        "version": VERSION,
        "t": model.t,
        "weights": model.weights.as_dict(),
        "groups": groups,
        "meta": meta or {},
    }


def model_from_doc(doc) -> RepairModel:
    _expect(doc, MODEL_FORMAT)
    groups = {}
    for key, g in doc["groups"].items():
        mu0 = QuantizedConditional(np.asarray(g["centroids_s0"]),
                                   np.asarray(g["masses_s0"]))
        mu1 = QuantizedConditional(np.asarray(g["centroids_s1"]),
                                   np.asarray(g["masses_s1"]))
        plan = TransportPlan(np.asarray(g["plan"]), float(g["cost"]))
        groups[int(key)] = GroupRepairer(mu0, mu1, plan)
    weights = AttributeWeights(
        {tuple(map(int, k.split(","))): v for k, v in doc["weights"].items()})
    return RepairModel(groups=groups, weights=weights, t=float(doc["t"]))


def quantile_model_to_doc(model: QuantileRepairModel) -> dict:
    return {
        "format": QUANTILE_FORMAT,
        "version": VERSION,
        "groups": {f"{u},{s}": list(map(float, xs))
                   for (u, s), xs in model.sorted_groups.items()},
    }


def quantile_model_from_doc(doc) -> QuantileRepairModel:
    _expect(doc, QUANTILE_FORMAT)
    groups = {tuple(map(int, k.split(","))): np.asarray(v, dtype=float)
              for k, v in doc["groups"].items()}
    return QuantileRepairModel(groups)
