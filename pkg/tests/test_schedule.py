"""Decay schedule unit tests."""

import math

import pytest

from detsom.schedule import (
    DecaySchedule,
    influence,
    initial_radius,
    learning_rate_at,
    radius_at,
)


@pytest.mark.parametrize(
    "rows,cols,expected",
    [(4, 3, 1.5), (2, 2, 1.0), (10, 6, 3.0), (1, 1, 0.5), (3, 7, 1.5)],
)
def test_initial_radius(rows, cols, expected):
    assert initial_radius(rows, cols) == expected


def test_initial_radius_rejects_bad_dims():
    with pytest.raises(ValueError):
        initial_radius(0, 3)


class TestDecaySchedule:
    def test_lambda_radius_definition(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=100)
        assert s.lambda_radius == pytest.approx(100 / math.log(1.5), rel=1e-15)
        assert s.lambda_radius > 0
        assert s.lambda_rate == 100.0

    def test_degenerate_radius_has_no_time_constant(self):
        s = DecaySchedule(radius0=1.0, rate0=0.1, max_epochs=10)
        assert s.lambda_radius is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(radius0=0.0, rate0=0.1, max_epochs=10),
            dict(radius0=1.5, rate0=0.0, max_epochs=10),
            dict(radius0=1.5, rate0=1.2, max_epochs=10),
            dict(radius0=1.5, rate0=0.1, max_epochs=0),
            dict(radius0=1.5, rate0=0.1, max_epochs=10, base=1.0),
        ],
    )
    def test_rejects_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            DecaySchedule(**kwargs)


class TestRadiusAt:
    def test_starts_at_initial_radius(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=10)
        assert radius_at(0, s) == 1.5

    @pytest.mark.parametrize("radius0", [1.5, 2.0, 3.0, 10.0])
    @pytest.mark.parametrize("max_epochs", [1, 10, 1000])
    def test_reaches_one_at_budget_end(self, radius0, max_epochs):
        s = DecaySchedule(radius0=radius0, rate0=0.1, max_epochs=max_epochs)
        assert abs(radius_at(max_epochs, s) - 1.0) <= 1e-9

    def test_midpoint_value(self):
        # R(max/2) = R0 * R0**(-1/2) = sqrt(R0) by algebra
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=100)
        assert radius_at(50, s) == pytest.approx(math.sqrt(1.5), rel=1e-12)

    def test_degenerate_radius_held_constant(self):
        s = DecaySchedule(radius0=1.0, rate0=0.1, max_epochs=10)
        assert [radius_at(t, s) for t in range(11)] == [1.0] * 11
        s_half = DecaySchedule(radius0=0.5, rate0=0.1, max_epochs=10)
        assert radius_at(7, s_half) == 0.5

    @pytest.mark.parametrize("radius0", [1.5, 2.0, 3.0, 10.0])
    def test_nonincreasing(self, radius0):
        s = DecaySchedule(radius0=radius0, rate0=0.1, max_epochs=200)
        values = [radius_at(t, s) for t in range(201)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("t", [-1, 11])
    def test_epoch_out_of_range(self, t):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=10)
        with pytest.raises(ValueError):
            radius_at(t, s)


class TestLearningRateAt:
    def test_starts_at_initial_rate(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=10)
        assert learning_rate_at(0, s) == 0.1

    def test_ends_at_rate_over_base(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=10)
        assert learning_rate_at(10, s) == pytest.approx(0.1 / math.e, abs=1e-15)

    def test_midpoint_value(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=100)
        assert learning_rate_at(50, s) == pytest.approx(0.1 * math.exp(-0.5), rel=1e-12)

    def test_strictly_decreasing(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=200)
        values = [learning_rate_at(t, s) for t in range(201)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_epoch_out_of_range(self):
        s = DecaySchedule(radius0=1.5, rate0=0.1, max_epochs=10)
        with pytest.raises(ValueError):
            learning_rate_at(11, s)


class TestInfluence:
    def test_bmu_itself_gets_full_influence(self):
        assert influence(0.0, 1.5) == 1.0

    def test_known_ratios(self):
        assert influence(3.0, 1.5) == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert influence(1.5, 1.5) == pytest.approx(math.exp(-0.5), rel=1e-15)

    def test_strictly_decreasing_in_distance(self):
        values = [influence(d / 4, 1.5) for d in range(20)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_bounded_in_unit_interval(self):
        for d in (0.0, 0.3, 1.0, 2.5, 7.0, 100.0):
            for radius in (0.5, 1.0, 1.5, 3.0):
                assert 0.0 < influence(d, radius) <= 1.0

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            influence(1.0, 0.0)
        with pytest.raises(ValueError):
            influence(1.0, -2.0)

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            influence(-0.1, 1.0)
