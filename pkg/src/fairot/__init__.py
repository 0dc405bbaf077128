"""Bias-tolerant distribution learning and optimal-transport data repair.

The pipeline: learn each attribute group's feature distribution with a
sequential Dirichlet-process learner and a divergence stopping rule, build
squared-distance optimal transport plans between the protected-group
quantized conditionals, repair data (in- or out-of-sample) to the geodesic
midpoint, and quantify the residual unfairness and the damage done.
"""

from .data import (AttributeWeights, GroupKey, LabelledDatum, ResearchDataset,
                   empirical_weights, has_representation_bias, segment)
from .errors import (ConfigError, DataValidationError, EstimationError,
                     FairotError, NonConvergenceError, NotQuenchedError,
                     OffSampleError, QuenchedError, UndefinedRatioError)
from .estimators import DistributionRepairer, QuantileRepairer
from .geometric import (QuantileRepairModel, fit_geometric, repair_geometric,
                        repair_geometric_batch)
from .metrics import (DamageReport, FairnessReport, HistogramDensity, damage,
                      e_hat, estimate_hist, sample_sym_kld, sym_kld,
                      unfairness)
from .simulate import (CategoricalSpec, GmmSpec, MixtureModelSpec,
                       biased_sample, mixture_from_doc, mixture_to_doc,
                       sample_labelled, sample_until_quenched)
from .stopping import (DirichletState, PriorSpec, SubgroupLearner,
                       VertexPartition, dirichlet_kld, init_learner, kld_step,
                       prior_mass)
from .transport import (QuantizedConditional, RepairModel, TransportPlan,
                        centroids_from_learner, fit_repair_model,
                        occupancy_masses, repair, repair_batch, round_to_grid,
                        solve_plan)

__version__ = "0.1.0"

__all__ = [
    "AttributeWeights", "CategoricalSpec", "ConfigError", "DamageReport",
    "DataValidationError", "DirichletState", "DistributionRepairer",
    "EstimationError", "FairnessReport", "FairotError", "GmmSpec", "GroupKey",
    "HistogramDensity", "LabelledDatum", "MixtureModelSpec",
    "NonConvergenceError", "NotQuenchedError", "OffSampleError", "PriorSpec",
    "QuantileRepairModel", "QuantileRepairer", "QuantizedConditional",
    "QuenchedError", "RepairModel", "ResearchDataset", "SubgroupLearner",
    "TransportPlan", "UndefinedRatioError", "VertexPartition", "biased_sample",
    "centroids_from_learner", "damage", "dirichlet_kld", "e_hat",
    "empirical_weights", "estimate_hist", "fit_geometric", "fit_repair_model",
    "has_representation_bias", "init_learner", "kld_step",
    "mixture_from_doc", "mixture_to_doc",
    "occupancy_masses", "prior_mass", "repair", "repair_batch",
    "repair_geometric", "repair_geometric_batch", "round_to_grid",
    "sample_labelled", "sample_sym_kld", "sample_until_quenched", "segment",
    "solve_plan", "sym_kld", "unfairness",
]
