import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsbm.evaluation import ari, confusion

from oracles import brute_ari


def test_identical_is_one():
    assert ari([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0


def test_label_names_do_not_matter():
    assert ari([0, 0, 1, 1, 2], [5, 5, 9, 9, 1]) == 1.0


def test_constant_prediction_is_zero():
    assert ari([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0


def test_known_value():
    # 2 agreeing pairs against 1.6 expected by chance, out of a maximum of 4
    x, y = [0, 0, 0, 1, 1], [0, 0, 1, 1, 1]
    assert ari(x, y) == brute_ari(x, y)
    assert ari(x, y) == pytest.approx(1 / 6)


def test_degenerate_partitions():
    assert ari([0, 1, 2], [0, 1, 2]) == 1.0
    assert ari([0, 0, 0], [1, 1, 1]) == 1.0
    assert ari([0, 1, 2], [0, 0, 0]) == 0.0


def test_errors():
    with pytest.raises(ValueError):
        ari([0, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        ari([0], [0])


def test_confusion_table():
    t = confusion([0, 0, 1, 2], ["a", "b", "b", "b"])
    assert t.tolist() == [[1, 1], [0, 1], [0, 1]]
    assert t.sum() == 4


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 40).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n),
                        st.lists(st.integers(0, 5), min_size=n, max_size=n))))
def test_matches_pair_counting(pair):
    x, y = pair
    assert ari(x, y) == brute_ari(x, y)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=30), st.data())
def test_symmetric_and_bounded(x, data):
    y = data.draw(st.lists(st.integers(0, 4), min_size=len(x), max_size=len(x)))
    v = ari(x, y)
    assert v == ari(y, x)
    assert v <= 1.0
    assert np.isfinite(v)
