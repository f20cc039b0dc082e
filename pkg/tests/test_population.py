import numpy as np
import pytest

from specedge import PopulationSpec, from_values
from specedge.errors import PopulationError


def test_entries_merge_and_sort():
    pop = PopulationSpec(((2.0, 3), (-1.0, 4), (2.0, 7)), 10)
    assert pop.entries == ((-1.0, 4), (2.0, 10))
    assert pop.total_mult == 14
    assert pop.rank == 14


def test_zero_entries_merge_to_one():
    pop = PopulationSpec(((0.0, 3), (1.0, 2), (0.0, 5)), 10)
    assert pop.entries == ((0.0, 8), (1.0, 2))
    assert pop.rank == 2


def test_ratio_band_enforced():
    with pytest.raises(PopulationError):
        PopulationSpec(((1.0, 1),), 1000)   # M/N = 1/1000 < 1/20
    with pytest.raises(PopulationError):
        PopulationSpec(((1.0, 500),), 10)   # M/N = 50 > 20
    # custom band admits it
    PopulationSpec(((1.0, 1),), 1000, ratio_band=(1e-4, 1e4))


def test_value_bound_and_finiteness():
    with pytest.raises(PopulationError):
        PopulationSpec(((2e3, 10),), 10)
    with pytest.raises(PopulationError):
        PopulationSpec(((float("nan"), 10),), 10)
    with pytest.raises(PopulationError):
        PopulationSpec(((1.0, 0),), 10)


def test_expand_and_poles():
    pop = PopulationSpec(((-2.0, 2), (3.0, 1)), 3)
    assert list(pop.expand()) == [-2.0, -2.0, 3.0]
    np.testing.assert_allclose(pop.poles(), [-1 / 3, 0.0, 0.5])


def test_reflection_and_scaling():
    pop = PopulationSpec(((-2.0, 350), (0.5, 300), (6.0, 50)), 500)
    refl = pop.reflected()
    assert refl.entries == ((-6.0, 50), (-0.5, 300), (2.0, 350))
    scaled = pop.scaled(2.0)
    assert scaled.entries == ((-4.0, 350), (1.0, 300), (12.0, 50))
    with pytest.raises(PopulationError):
        pop.scaled(-1.0)


def test_json_round_trip():
    pop = PopulationSpec(((-1.0, 400), (4.0, 100)), 500)
    again = PopulationSpec.from_json(pop.to_json())
    assert again == pop


def test_malformed_documents():
    with pytest.raises(PopulationError):
        PopulationSpec.from_json("not json")
    with pytest.raises(PopulationError):
        PopulationSpec.from_json('{"n_dim": 10}')


def test_from_values_counts():
    pop = from_values([1.0, 1.0, -2.0, 0.0, 1.0], 5)
    assert pop.entries == ((-2.0, 1), (0.0, 1), (1.0, 3))
