"""Adult census ingestion and holdout splitting.

Encodes sex as the protected attribute (1 for Male, 0 otherwise) and
education as the unprotected one (0 for high-school graduate or below, i.e.
ordinal education number <= 9).  Rows with missing values in the used
columns are dropped and counted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .data import GROUP_KEYS
from .errors import ConfigError, SchemaError, SplitError

log = logging.getLogger(__name__)

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
)

FEATURES = {"age": "age", "capital_gain": "capital_gain",
            "capital_loss": "capital_loss"}

EDUCATION_THRESHOLD = 9  # ordinal level of "HS-grad"


@dataclass(frozen=True)
class AdultRecord:
    """The fields of one census row that this pipeline uses."""

    age: int
    capital_gain: float
    capital_loss: float
    sex: str
    education_num: int

    def __post_init__(self):
        if self.age < 0 or self.capital_gain < 0 or self.capital_loss < 0:
            raise SchemaError("age and capital fields must be nonnegative")


def _normalize(name: str) -> str:
    return str(name).strip().lower().replace("-", "_").replace(".", "_")


def _read_adult_frame(path) -> pd.DataFrame:
    try:
        probe = pd.read_csv(path, header=None, nrows=1, comment="|",
                            skipinitialspace=True)
    except Exception as exc:
        raise SchemaError(f"cannot parse {path}: {exc}") from exc
    has_header = any(_normalize(v) == "age" for v in probe.iloc[0].astype(str))
    kwargs = dict(comment="|", skipinitialspace=True, na_values="?")
    if has_header:
        frame = pd.read_csv(path, header=0, **kwargs)
        frame.columns = [_normalize(c) for c in frame.columns]
    else:
        frame = pd.read_csv(path, header=None, **kwargs)
        if frame.shape[1] < 15:
            raise SchemaError(
                f"{path}: expected the 15-column census schema, "
                f"got {frame.shape[1]} columns")
        frame.columns = list(ADULT_COLUMNS) + [
            f"extra_{i}" for i in range(frame.shape[1] - 15)]
    return frame


def load_adult(path, feature: str = "age") -> np.ndarray:
    """Load the census file as labelled rows ``(x, u, s)``.

    ``feature`` selects the scalar: ``age``, ``capital_gain`` or
    ``capital_loss``.  Returns an ``(n, 3)`` array.
    """
    if feature not in FEATURES:
        raise ConfigError(
            f"unknown feature {feature!r}; choose one of {sorted(FEATURES)}")
    frame = _read_adult_frame(path)
    needed = {FEATURES[feature], "sex", "education_num"}
    missing = needed - set(frame.columns)
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    total = len(frame)
    cols = frame[list(needed)].copy()
    cols["education_num"] = pd.to_numeric(cols["education_num"], errors="coerce")
    cols[FEATURES[feature]] = pd.to_numeric(cols[FEATURES[feature]],
                                            errors="coerce")
    kept = cols.dropna()
    dropped = total - len(kept)
    if dropped:
        log.info("load_adult: dropped %d of %d rows with missing values",
                 dropped, total)
    x = kept[FEATURES[feature]].to_numpy(dtype=float)
    u = (kept["education_num"].to_numpy(dtype=float)
         > EDUCATION_THRESHOLD).astype(float)
    s = (kept["sex"].astype(str).str.strip() == "Male").to_numpy().astype(float)
    return np.column_stack((x, u, s))


def split_holdout(data, fraction: float, rng):
    """Random stratified split into ``(train, holdout)``.

    ``fraction`` is the holdout share; the split is stratified by the
    attribute pair so that no group is empty on either side.
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"fraction must be in (0, 1), got {fraction!r}")
    arr = np.asarray(data, dtype=float)
    hold_mask = np.zeros(len(arr), dtype=bool)
    for u, s in GROUP_KEYS:
        idx = np.flatnonzero((arr[:, 1] == u) & (arr[:, 2] == s))
        n_hold = int(round(len(idx) * fraction))
        if len(idx) == 0 or n_hold == 0 or n_hold == len(idx):
            raise SplitError(
                f"fraction {fraction} leaves group ({u},{s}) empty on one side "
                f"(group size {len(idx)})")
        chosen = rng.permutation(idx)[:n_hold]
        hold_mask[chosen] = True
    return arr[~hold_mask], arr[hold_mask]
