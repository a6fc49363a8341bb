import numpy as np
import pytest

from pqa.catalog import ColumnMeta
from pqa.config import EngineConfig
from pqa.engine import Engine


INSURANCE_COLUMNS = [
    ColumnMeta("age", "numeric", 47),
    ColumnMeta("sex", "categorical", 2, ("female", "male")),
    ColumnMeta("bmi", "numeric", 500),
    ColumnMeta("children", "numeric", 6),
    ColumnMeta("smoker", "categorical", 2, ("no", "yes")),
    ColumnMeta(
        "region", "categorical", 4, ("northeast", "northwest", "southeast", "southwest")
    ),
    ColumnMeta("charges", "numeric", 1300),
]

INSURANCE_QUERY = (
    "predict insurance charge for a 19 year old female, non-smoker, "
    "living in northeast with a BMI of 27.9 and no children"
)

STUDENT_QUERY = (
    "predict student performance for a student who studied 7 hours, "
    "previous scores of 99, with extra-curricular activities, 9 hours of sleep "
    "and practiced 1 sample question paper"
)


@pytest.fixture
def engine_factory(tmp_path):
    """Engines over throwaway data dirs; same dir twice simulates a restart."""

    def make(subdir: str = "data", **overrides) -> Engine:
        cfg = EngineConfig(data_dir=tmp_path / subdir, **overrides)
        return Engine(cfg)

    return make


def random_unit_vectors(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    vecs = rng.normal(size=(n, dim))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
