import numpy as np
import pytest
from hypothesis import settings

from opspace_lab.discover import cartan
from opspace_lab.opspace import column_space, diagonal, full_matrices, upper_triangular

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def corpus():
    return [upper_triangular(2), upper_triangular(3), full_matrices(2), diagonal(2), column_space(2), cartan(3, 2)]


def algebras():
    """Corpus spaces that are unital operator algebras with v = identity."""
    return [upper_triangular(2), upper_triangular(3), full_matrices(2), diagonal(2)]
