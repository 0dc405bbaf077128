import numpy as np
import pytest

from fairot.stopping import PriorSpec, SubgroupLearner


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def quenched_learner_from(values, lo=-10.0, hi=10.0, nu0=0.001,
                          resolution=0.0):
    """Learner that absorbed ``values`` and then quenched immediately.

    Uses a huge threshold and ``k_min = len(values)`` so the partition is
    exactly the given observations.
    """
    values = list(values)
    learner = SubgroupLearner(PriorSpec.uniform(lo, hi, nu0=nu0),
                              epsilon=1e12, window=10,
                              k_min=max(len(values), 2),
                              resolution=resolution)
    for x in values:
        learner.absorb(x)
    assert learner.quenched
    return learner
