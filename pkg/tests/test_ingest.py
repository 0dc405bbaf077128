import numpy as np
import pytest

from fairot.data import GROUP_KEYS, segment
from fairot.errors import ConfigError, SchemaError, SplitError
from fairot.ingest import load_adult, split_holdout

HEADER = ("age,workclass,fnlwgt,education,education-num,marital-status,"
          "occupation,relationship,race,sex,capital-gain,capital-loss,"
          "hours-per-week,native-country,income")


def fake_row(age=37, education_num=13, sex="Female", gain=0, loss=0):
    return (f"{age}, Private, 284582, Masters, {education_num}, "
            f"Married-civ-spouse, Exec-managerial, Wife, White, {sex}, "
            f"{gain}, {loss}, 40, United-States, <=50K")


@pytest.fixture
def adult_csv(tmp_path):
    def write(rows, header=True, name="adult.csv"):
        path = tmp_path / name
        lines = ([HEADER] if header else []) + rows
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path
    return write


class TestLoadAdult:
    def test_encoding_rule(self, adult_csv):
        path = adult_csv([fake_row(age=37, education_num=13, sex="Female")])
        arr = load_adult(path, "age")
        np.testing.assert_array_equal(arr, [[37.0, 1.0, 0.0]])

    def test_education_threshold(self, adult_csv):
        rows = [fake_row(education_num=9, sex="Male"),
                fake_row(education_num=10, sex="Male")]
        arr = load_adult(adult_csv(rows), "age")
        np.testing.assert_array_equal(arr[:, 1], [0.0, 1.0])

    def test_headerless_file(self, adult_csv):
        path = adult_csv([fake_row(), fake_row(sex="Male")], header=False)
        arr = load_adult(path, "age")
        assert arr.shape == (2, 3)
        np.testing.assert_array_equal(arr[:, 2], [0.0, 1.0])

    def test_missing_values_dropped(self, adult_csv):
        rows = [fake_row(), fake_row().replace("Masters, 13", "Masters, ?")]
        arr = load_adult(adult_csv(rows), "age")
        assert arr.shape == (1, 3)

    def test_feature_selection(self, adult_csv):
        rows = [fake_row(gain=2174, loss=10)]
        assert load_adult(adult_csv(rows), "capital_gain")[0, 0] == 2174.0
        assert load_adult(adult_csv(rows), "capital_loss")[0, 0] == 10.0

    def test_unknown_feature_rejected(self, adult_csv):
        with pytest.raises(ConfigError):
            load_adult(adult_csv([fake_row()]), "hours")

    def test_bad_schema_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3\n4,5,6\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_adult(path, "age")

    def test_comment_line_skipped(self, adult_csv, tmp_path):
        path = tmp_path / "test_part.csv"
        path.write_text("|1x3 Cross validator\n" + fake_row() + "\n",
                        encoding="utf-8")
        arr = load_adult(path, "age")
        assert arr.shape == (1, 3)

    def test_every_row_maps_to_one_group(self, adult_csv, rng):
        rows = [fake_row(age=int(a), education_num=int(e), sex=sx)
                for a, e, sx in zip(rng.integers(17, 90, 200),
                                    rng.integers(1, 16, 200),
                                    rng.choice(["Male", "Female"], 200))]
        arr = load_adult(adult_csv(rows), "age")
        assert arr.shape == (200, 3)
        assert set(map(tuple, arr[:, 1:])) <= {(u, s) for u, s in GROUP_KEYS}


class TestSplitHoldout:
    def _balanced(self, rng, n=1000):
        rows = []
        for u, s in GROUP_KEYS:
            rows.extend((x, u, s) for x in rng.normal(size=n))
        return segment(rows).to_array()

    def test_balanced_split_sizes(self, rng):
        arr = self._balanced(rng, n=1000)
        train, hold = split_holdout(arr, 0.5, rng)
        tc = segment(train).counts
        hc = segment(hold).counts
        for key in GROUP_KEYS:
            assert abs(tc[key] - 500) <= 1
            assert abs(hc[key] - 500) <= 1

    def test_disjoint_and_complete(self, rng):
        arr = self._balanced(rng, n=50)
        arr[:, 0] = np.arange(len(arr))  # unique markers
        train, hold = split_holdout(arr, 0.3, rng)
        train_ids = set(train[:, 0])
        hold_ids = set(hold[:, 0])
        assert train_ids.isdisjoint(hold_ids)
        assert len(train_ids | hold_ids) == len(arr)

    def test_seed_reproducible(self, rng):
        arr = self._balanced(rng, n=100)
        t1, h1 = split_holdout(arr, 0.3, np.random.default_rng(5))
        t2, h2 = split_holdout(arr, 0.3, np.random.default_rng(5))
        np.testing.assert_array_equal(t1, t2)
        np.testing.assert_array_equal(h1, h2)

    def test_empty_stratum_rejected(self, rng):
        arr = self._balanced(rng, n=2)
        with pytest.raises(SplitError):
            split_holdout(arr, 0.1, rng)

    def test_bad_fraction_rejected(self, rng):
        arr = self._balanced(rng, n=10)
        with pytest.raises(ConfigError):
            split_holdout(arr, 1.5, rng)
