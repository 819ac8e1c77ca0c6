"""Applicability-domain filter: neighbor-distance statistic and threshold.

The full synthetic-Gaussian inclusion protocol runs in the acceptance suite;
these tests pin the formula itself.
"""
from __future__ import annotations

import numpy as np
import pytest

from pgfs.scoring import ADModel, ad_distance, ad_inside, fit_ad_model


def test_statistic_is_mean_of_k_nearest():
    # four collinear points; for k=2 the statistic of a query at the origin
    # is the mean of its two smallest distances
    train = np.array([[1.0], [2.0], [3.0], [10.0]])
    model = fit_ad_model(train, k=2, z=1.5)
    assert ad_distance(np.array([0.0]), model) == pytest.approx((1.0 + 2.0) / 2)


def test_training_statistic_excludes_self():
    # two identical points plus one far away: with self-exclusion each of the
    # twins has nearest distance 0 to the other, not to itself
    train = np.array([[0.0], [0.0], [9.0]])
    model = fit_ad_model(train, k=1, z=0.0)
    # statistics: twin->0, twin->0, far->9  => mean 3
    assert model.d_bar == pytest.approx(3.0)


def test_threshold_formula():
    train = np.random.default_rng(0).normal(size=(50, 4))
    model = fit_ad_model(train, k=5, z=1.5)
    assert model.threshold == pytest.approx(model.d_bar + 1.5 * model.s, rel=1e-15)
    stricter = fit_ad_model(train, k=5, z=0.5)
    assert stricter.threshold < model.threshold


def test_default_k_is_sqrt_n():
    train = np.random.default_rng(1).normal(size=(100, 3))
    model = fit_ad_model(train)
    assert model.k == 10


def test_inside_and_outside():
    rng = np.random.default_rng(2)
    train = rng.normal(size=(200, 8))
    model = fit_ad_model(train, k=20, z=1.5)
    # the training mean is deep inside the domain
    assert ad_inside(train.mean(axis=0), model)
    # a point shifted far away is not
    assert not ad_inside(train.mean(axis=0) + 50.0, model)


def test_inclusion_rates_small_scale():
    rng = np.random.default_rng(3)
    train = rng.normal(size=(150, 6))
    model = fit_ad_model(train, k=10, z=1.5)
    self_in = np.mean([ad_inside(x, model) for x in train])
    held = rng.normal(size=(150, 6))
    held_in = np.mean([ad_inside(x, model) for x in held])
    shifted = rng.normal(size=(150, 6)) + 5.0
    shifted_in = np.mean([ad_inside(x, model) for x in shifted])
    assert self_in >= 0.9
    assert held_in >= 0.7
    assert shifted_in <= 0.1


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_ad_model(np.zeros(5))  # 1-D
    with pytest.raises(ValueError):
        fit_ad_model(np.zeros((5, 2)), k=5)  # n <= k


def test_model_is_frozen():
    train = np.zeros((3, 1)) + np.arange(3)[:, None]
    model = fit_ad_model(train, k=1)
    with pytest.raises(AttributeError):
        model.k = 2


def test_distance_of_training_point_reasonable():
    train = np.array([[0.0], [1.0], [2.0]])
    model = ADModel(train=train, k=1, z=1.5, d_bar=1.0, s=0.0)
    # query equal to a training row: nearest distance 0
    assert ad_distance(np.array([1.0]), model) == 0.0
