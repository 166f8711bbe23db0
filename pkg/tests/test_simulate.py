import math

import numpy as np
import pytest

from tsbm.simulate import (
    SCENARIO2_L1,
    SCENARIO2_L2,
    PlantedModel,
    sample_planted,
    scenario1,
    scenario1_model,
    scenario2,
)


def test_scenario1_rates():
    m = scenario1_model(2.35, 1.21, N=50, U=50)
    assert m.rates.shape == (3, 3, 3)
    np.testing.assert_allclose(np.diag(m.rates[:, :, 0]), 2.35)
    assert m.rates[0, 1, 0] == 2.0
    np.testing.assert_allclose(m.rates[:, :, 1], m.rates[:, :, 0] * 1.1)
    np.testing.assert_allclose(m.rates[:, :, 2], m.rates[:, :, 0] * 1.21)
    assert m.node_weights.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("psi,g", [(1.9, 1.0), (2.0, 0.9)])
def test_scenario1_parameter_ranges(psi, g):
    with pytest.raises(ValueError):
        scenario1_model(psi, g)


def test_scenario2_patterns():
    assert SCENARIO2_L1[0, 0] > SCENARIO2_L1[0, 1]
    assert SCENARIO2_L2[0, 0] < SCENARIO2_L2[0, 1]
    _, _, y = scenario2(N=20, U=30, seed=1, fixed_balanced_y=True)
    assert np.bincount(y).tolist() == [15, 15]
    with pytest.raises(ValueError):
        scenario2(N=20, U=31, fixed_balanced_y=True)


def test_sampling_is_seeded():
    a = scenario1(2.0, 1.2, N=12, U=8, seed=[3, 1])
    b = scenario1(2.0, 1.2, N=12, U=8, seed=[3, 1])
    c = scenario1(2.0, 1.2, N=12, U=8, seed=[3, 2])
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1], b[1])
    assert a[0] != c[0]


def test_no_self_loops():
    t, _, _ = scenario1(3.0, 1.4, N=10, U=5, seed=0)
    x = t.dense()
    assert x[np.arange(10), np.arange(10)].sum() == 0


def test_homogeneous_custom_model():
    m = PlantedModel(30, 20, [1.0], [1.0], [[[0.5]]])
    t, c, y = sample_planted(m, 7)
    assert set(c.tolist()) == {0} and set(y.tolist()) == {0}
    mean = t.total / (30 * 29 * 20)
    assert abs(mean - 0.5) < 4 * math.sqrt(0.5 / (30 * 29 * 20))


def test_model_round_trip():
    m = scenario1_model(2.2, 1.1, N=9, U=7)
    back = PlantedModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(back.rates, m.rates)
    assert (back.N, back.U) == (9, 7)


@pytest.mark.parametrize(
    "kw",
    [
        dict(node_weights=[0.5, 0.4]),
        dict(rates=np.ones((2, 2, 2))),
        dict(rates=-np.ones((1, 1, 1))),
        dict(N=0),
    ],
)
def test_model_validation(kw):
    base = dict(N=5, U=5, node_weights=[1.0], time_weights=[1.0], rates=np.ones((1, 1, 1)))
    base.update(kw)
    with pytest.raises(ValueError):
        PlantedModel(**base)
