import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from diagnet import bundled_dataset, compute_stats, make_dataset


@pytest.fixture(scope="session")
def main_dataset():
    """The 3-point d=3 dataset with a unique l1 optimum and shared l1/l2
    support vectors; most regime checks run on it."""
    return bundled_dataset("unique_l1")


@pytest.fixture(scope="session")
def main_stats(main_dataset):
    return compute_stats(main_dataset)


@pytest.fixture(scope="session")
def switch_dataset():
    """Support vectors differ between the l2 and l1 optima here."""
    return bundled_dataset("support_switch")


@pytest.fixture(scope="session")
def single_point():
    return make_dataset([[2.0, 0.0]])
