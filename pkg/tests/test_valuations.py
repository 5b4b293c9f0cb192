import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poalab import valuations as Vl
from poalab.errors import CapacityError, DomainError


def _projection_count(n, d, direction, bundle):
    """Distinct coordinate tuples after dropping ``direction``; items are base-n numbers, digit k = coordinate k."""
    seen = set()
    for item in bundle:
        coords = [(item // n**k) % n for k in range(d)]
        seen.add(tuple(c for k, c in enumerate(coords) if k != direction))
    return len(seen)


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_grid_projection_matches_coordinate_oracle(n, d):
    rng = np.random.default_rng(n * 10 + d)
    for direction in range(d):
        v = Vl.GridProjection.of(n, direction, scale=1.5, d=d)
        for _ in range(40):
            bundle = np.flatnonzero(rng.random(v.m) < 0.3)
            assert v.value(bundle) == pytest.approx(1.5 * _projection_count(n, d, direction, bundle))


def test_grid_projection_is_submodular_with_exact_oxs_witness():
    v = Vl.GridProjection.of(2, 1)
    assert Vl.check_class(v, "submodular")
    assert Vl.check_class(v, "oxs-witness", witness=Vl.grid_oxs_witness(v))


def test_grid_witness_on_sampled_bundles_for_larger_grid():
    v = Vl.GridProjection.of(3, 2)
    rng = np.random.default_rng(0)
    bundles = rng.random((300, v.m)) < 0.25
    assert Vl.witness_agreement(v, Vl.grid_oxs_witness(v), "oxs-witness", bundles)


def test_class_check_refuses_large_ground_sets():
    with pytest.raises(CapacityError):
        Vl.check_class(Vl.GridProjection.of(3, 0, d=3), "submodular")


def test_complementary_valuation_is_not_subadditive():
    m = 2
    table = [0.0, 0.0, 0.0, 1.0]  # only the pair has value
    v = Vl.Tabulated(m, tuple(table))
    assert not Vl.check_class(v, "subadditive")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=1, max_size=6))
def test_additive_and_unit_demand_are_submodular(values):
    m = len(values)
    assert Vl.check_class(Vl.Additive(m, tuple(values)), "additive")
    ud = Vl.UnitDemand(m, tuple(values))
    assert Vl.check_class(ud, "submodular")
    assert Vl.check_class(ud, "oxs-witness", witness=np.asarray([values]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.data())
def test_xos_witness_roundtrip(k, data):
    m = 4
    clauses = np.asarray(data.draw(st.lists(st.lists(st.floats(0, 3), min_size=m, max_size=m),
                                            min_size=k, max_size=k)))
    v = Vl.Xos(m, tuple(map(tuple, clauses)))
    assert Vl.check_class(v, "xos-witness", witness=clauses)
    assert Vl.check_class(v, "subadditive")


def test_item_set_rejects_out_of_range():
    with pytest.raises(DomainError):
        Vl.item_set([5], 3)


def test_config_roundtrip():
    for v in (Vl.Additive(3, (1.0, 2.0, 0.5)), Vl.GridProjection.of(2, 1, scale=2.0)):
        back = Vl.from_config(v.to_config(), v.m)
        for bundle in itertools.chain.from_iterable(itertools.combinations(range(v.m), r) for r in range(v.m + 1)):
            assert back.value(list(bundle)) == v.value(list(bundle))
