import pytest
import numpy as np
import sys
import os

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import build_config
from designs import generate_clustered_design, make_synthetic_dataset
from models import SamplingPlan


@pytest.fixture
def x3():
    """Three points on the diagonal of the unit square."""
    return SamplingPlan(np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]))


@pytest.fixture(scope="session")
def small_dataset():
    return make_synthetic_dataset(n=60, k=2, seed=3)


@pytest.fixture(scope="session")
def near_duplicates():
    """Tight clusters of repeated settings, the typical shape of industrial run logs."""
    return generate_clustered_design(213, 2, spread=0.002, seed=0)


@pytest.fixture
def fast_config(tmp_path):
    """Run configuration small enough for unit tests."""
    return build_config(
        {
            "output_dir": str(tmp_path),
            "data": {"synthetic": {"n": 60, "seed": 3}},
            "surrogate": {"forest": {"n_estimators": 10}},
            "optimizer": {"budget": 300, "seed": 0},
        }
    )


@pytest.fixture
def write_csv(tmp_path):
    """Write text to a CSV file in tmp_path and return its path."""
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write
