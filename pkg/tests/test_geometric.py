import numpy as np
import pytest

from fairot.data import segment
from fairot.errors import EstimationError, OffSampleError
from fairot.geometric import (fit_geometric, repair_geometric,
                              repair_geometric_batch)


def paired_dataset():
    rows = ([(x, 0, 0) for x in (0.0, 1.0)] + [(x, 0, 1) for x in (10.0, 11.0)]
            + [(x, 1, 0) for x in (0.0, 1.0)]
            + [(x, 1, 1) for x in (10.0, 11.0)])
    return segment(rows)


class TestFit:
    def test_equal_samples_identity_repair(self, rng):
        xs = rng.normal(size=30)
        rows = [(x, u, s) for x in xs for u in (0, 1) for s in (0, 1)]
        model = fit_geometric(segment(rows))
        for x in xs[:5]:
            assert repair_geometric(model, (x, 0, 0)) == pytest.approx(x)

    def test_two_point_rank_matching(self):
        model = fit_geometric(paired_dataset())
        assert repair_geometric(model, (0.0, 0, 0)) == pytest.approx(5.0)
        assert repair_geometric(model, (1.0, 0, 0)) == pytest.approx(6.0)
        assert repair_geometric(model, (10.0, 0, 1)) == pytest.approx(5.0)
        assert repair_geometric(model, (11.0, 0, 1)) == pytest.approx(6.0)

    def test_empty_group_unfittable(self):
        with pytest.raises(EstimationError):
            fit_geometric(segment([(0.0, 0, 0)]))


class TestRepair:
    def test_median_maps_to_average_of_medians(self, rng):
        a = np.sort(rng.normal(0, 1, 31))
        b = np.sort(rng.normal(5, 2, 31))
        rows = ([(x, 0, 0) for x in a] + [(x, 0, 1) for x in b]
                + [(x, 1, 0) for x in a] + [(x, 1, 1) for x in b])
        model = fit_geometric(segment(rows))
        med_a, med_b = np.median(a), np.median(b)
        assert repair_geometric(model, (med_a, 0, 0)) == pytest.approx(
            0.5 * (med_a + med_b))

    def test_equal_ranks_map_to_same_value(self, rng):
        a = np.sort(rng.normal(0, 1, 20))
        b = np.sort(rng.normal(3, 1, 20))
        rows = ([(x, 0, 0) for x in a] + [(x, 0, 1) for x in b]
                + [(x, 1, 0) for x in a] + [(x, 1, 1) for x in b])
        model = fit_geometric(segment(rows))
        for i in (0, 7, 19):
            r0 = repair_geometric(model, (a[i], 0, 0))
            r1 = repair_geometric(model, (b[i], 0, 1))
            assert r0 == pytest.approx(r1)

    def test_off_sample_refused(self, rng):
        model = fit_geometric(paired_dataset())
        with pytest.raises(OffSampleError):
            repair_geometric(model, (0.5, 0, 0))

    def test_batch_off_sample_refused(self):
        model = fit_geometric(paired_dataset())
        with pytest.raises(OffSampleError):
            repair_geometric_batch(model, [(0.0, 0, 0), (0.37, 0, 0)])

    def test_monotone_within_group(self, rng):
        a = rng.normal(0, 1, 50)
        b = rng.normal(2, 3, 45)
        rows = ([(x, 0, 0) for x in a] + [(x, 0, 1) for x in b]
                + [(x, 1, 0) for x in a] + [(x, 1, 1) for x in b])
        model = fit_geometric(segment(rows))
        xs = np.sort(a)
        repaired = [repair_geometric(model, (x, 0, 0)) for x in xs]
        assert all(r1 <= r2 + 1e-12 for r1, r2 in zip(repaired, repaired[1:]))

    def test_equal_sizes_give_multiset_equality(self, rng):
        a = rng.normal(0, 1, 40)
        b = rng.normal(4, 2, 40)
        rows = ([(x, 0, 0) for x in a] + [(x, 0, 1) for x in b]
                + [(x, 1, 0) for x in a] + [(x, 1, 1) for x in b])
        model = fit_geometric(segment(rows))
        arr = segment(rows).to_array()
        out = repair_geometric_batch(model, arr)
        post = segment(out)
        s0 = np.sort(post.group(0, 0))
        s1 = np.sort(post.group(0, 1))
        np.testing.assert_allclose(s0, s1, atol=1e-12)

    def test_batch_matches_single(self, rng):
        ds = paired_dataset()
        model = fit_geometric(ds)
        arr = ds.to_array()
        out = repair_geometric_batch(model, arr)
        for row, r in zip(arr, out[:, 0]):
            assert repair_geometric(model, row) == pytest.approx(r)

    def test_ties_use_mid_rank(self):
        rows = ([(0.0, 0, 0), (0.0, 0, 0), (1.0, 0, 0)]
                + [(10.0, 0, 1), (20.0, 0, 1), (30.0, 0, 1)]
                + [(0.0, 1, 0), (1.0, 1, 0)] + [(5.0, 1, 1), (6.0, 1, 1)])
        model = fit_geometric(segment(rows))
        # two copies of 0.0 share mid-rank 0.5 -> normalized (0.5+0.5)/3
        r = repair_geometric(model, (0.0, 0, 0))
        own = np.quantile([0.0, 0.0, 1.0], 1.0 / 3, method="hazen")
        other = np.quantile([10.0, 20.0, 30.0], 1.0 / 3, method="hazen")
        assert r == pytest.approx(0.5 * (own + other))
