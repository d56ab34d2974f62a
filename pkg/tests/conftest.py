import numpy as np
import pytest

from ranktarget.data import Dataset, Household, RankingScheme, assemble_dataset


def make_household(hid, cid, x, elite=(), y=None):
    return Household(id=hid, community_id=cid, x=np.asarray(x, dtype=float),
                     elite_cols=elite, y=y)


def tiny_dataset(standardize=False):
    """Two communities of three households with one ranking each."""
    households = [
        make_household("a1", "c1", [0.0, 1.0]),
        make_household("a2", "c1", [1.0, 0.0]),
        make_household("a3", "c1", [2.0, 1.0]),
        make_household("b1", "c2", [0.5, 0.0]),
        make_household("b2", "c2", [1.5, 1.0]),
        make_household("b3", "c2", [2.5, 0.0]),
    ]
    rankings = [
        RankingScheme("c1", "r1", {"a1": 1, "a2": 2, "a3": 3}),
        RankingScheme("c2", "r1", {"b1": 2, "b2": 1, "b3": 3}),
    ]
    quotas = {"c1": 1, "c2": 1}
    return assemble_dataset(households, rankings, quotas, standardize=standardize)


@pytest.fixture
def dataset():
    return tiny_dataset()
